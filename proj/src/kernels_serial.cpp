#include <cmath>

#include "ucbvi/kernels.hpp"

namespace ucbvi::serial {

void aggregate_rewards(const Grid& grid, const ContinuousMdp& env, std::span<double> out) {
  const int actions = env.action_count;
  const int m = grid.quadrature_points();
  const int subs = static_cast<int>(std::pow(m, grid.dimension()));
  State s;
  for (int c = 0; c < grid.cell_count(); ++c) {
    for (int a = 0; a < actions; ++a) {
      double sum = 0.0;
      for (int i = 0; i < subs; ++i) {
        grid.sub_point(c, i, m, s);
        sum += env.reward(s, a);
      }
      out[static_cast<std::size_t>(c * actions + a)] = sum / subs;
    }
  }
}

void aggregate_transitions(const Grid& grid, const ContinuousMdp& env, int points,
                           std::span<double> out) {
  const int cells = grid.cell_count();
  const int actions = env.action_count;
  const int subs = static_cast<int>(std::pow(points, grid.dimension()));
  // Each destination sample carries volume (1/(n*points))^d; the source
  // average divides by subs.
  const double dest_weight = std::pow(grid.width() / points, grid.dimension());
  State src;
  State dst;
  for (int c = 0; c < cells; ++c) {
    for (int a = 0; a < actions; ++a) {
      double* row = out.data() + static_cast<std::size_t>(c * actions + a) * cells;
      for (int y = 0; y < cells; ++y) {
        double mass = 0.0;
        for (int i = 0; i < subs; ++i) {
          grid.sub_point(c, i, points, src);
          for (int j = 0; j < subs; ++j) {
            grid.sub_point(y, j, points, dst);
            mass += env.density(dst, src, a);
          }
        }
        row[y] = mass * dest_weight / subs;
      }
    }
  }
}

void expected_next(std::span<const double> transitions, std::span<const double> next_values,
                   std::span<double> out) {
  const std::size_t cells = next_values.size();
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = transitions.data() + r * cells;
    double acc = 0.0;
    for (std::size_t y = 0; y < cells; ++y) acc += row[y] * next_values[y];
    out[r] = acc;
  }
}

}  // namespace ucbvi::serial

namespace ucbvi::serial {

void expected_next_selected(std::span<const double> transitions, int action_count,
                            std::span<const int> actions, std::span<const double> next_values,
                            std::span<double> out) {
  const std::size_t cells = next_values.size();
  for (std::size_t x = 0; x < out.size(); ++x) {
    const std::size_t r = x * static_cast<std::size_t>(action_count) +
                          static_cast<std::size_t>(actions[x]);
    const double* row = transitions.data() + r * cells;
    double acc = 0.0;
    for (std::size_t y = 0; y < cells; ++y) acc += row[y] * next_values[y];
    out[x] = acc;
  }
}

}  // namespace ucbvi::serial
