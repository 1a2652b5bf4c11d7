#pragma once

#include <charconv>
#include <string>

namespace ucbvi {

// Shortest round-trip representation; CSV output is byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace ucbvi
