#pragma once

#include <span>

#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"

namespace ucbvi {

// The data-parallel inner loops. `parallel` is what the library calls;
// `serial` is the straightforward reference the tests and benchmarks compare
// it against. Both produce identical results for identical inputs: every
// output element is reduced in the same order on one thread.

namespace serial {

/// out[cell * A + a] = midpoint mean of r(., a) over the cell.
void aggregate_rewards(const Grid& grid, const ContinuousMdp& env, std::span<double> out);

/// out[(cell * A + a) * C + next] = raw (unnormalized) quadrature of P_agg.
void aggregate_transitions(const Grid& grid, const ContinuousMdp& env, int points,
                           std::span<double> out);

/// out[row] = sum_y transitions[row * C + y] * next_values[y], C = next_values.size().
void expected_next(std::span<const double> transitions, std::span<const double> next_values,
                   std::span<double> out);

/// out[x] = expected next value of row (x, actions[x]) in a [cell][action][next] table.
void expected_next_selected(std::span<const double> transitions, int action_count,
                            std::span<const int> actions, std::span<const double> next_values,
                            std::span<double> out);

}  // namespace serial

namespace parallel {

void aggregate_rewards(const Grid& grid, const ContinuousMdp& env, std::span<double> out);
void aggregate_transitions(const Grid& grid, const ContinuousMdp& env, int points,
                           std::span<double> out);
void expected_next(std::span<const double> transitions, std::span<const double> next_values,
                   std::span<double> out);
void expected_next_selected(std::span<const double> transitions, int action_count,
                            std::span<const int> actions, std::span<const double> next_values,
                            std::span<double> out);

}  // namespace parallel

}  // namespace ucbvi
