#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "ucbvi/env.hpp"

namespace ucbvi {

// Cell of s in [0,1] under the convention I_1 = [0, 1/n], I_j = ((j-1)/n, j/n].
inline int cell_index_1d(double s, int n) {
  if (s <= 0.0) return 0;
  const int j = static_cast<int>(std::ceil(s * n)) - 1;
  return std::clamp(j, 0, n - 1);
}

struct IntervalId {
  int flat_index = 0;
  std::vector<int> per_dim;  // row-major: the last dimension varies fastest

  friend bool operator==(const IntervalId&, const IntervalId&) = default;
};

/// Uniform partition of [0,1]^d into n^d cells.
class Grid {
 public:
  /// `quadrature_points` is the number of midpoint sub-samples per cell per
  /// dimension; 0 selects 64 for d = 1 and 16 otherwise.
  Grid(int n_per_dim, int dimension, int quadrature_points = 0);

  int n() const { return n_; }
  int dimension() const { return d_; }
  int cell_count() const { return cells_; }
  int quadrature_points() const { return m_; }
  double width() const { return 1.0 / n_; }

  /// Throws std::out_of_range for states outside the unit box.
  IntervalId interval_of(StateView s) const;
  int flat_of(StateView s) const { return interval_of(s).flat_index; }

  int flatten(std::span<const int> per_dim) const;
  std::vector<int> unflatten(int flat) const;

  void center_of(int flat, State& out) const;
  State center_of(int flat) const;

  /// Midpoint of sub-cell `sub` (in [0, points^d)) when `flat` is split into
  /// `points` pieces per dimension.
  void sub_point(int flat, int sub, int points, State& out) const;

 private:
  int n_;
  int d_;
  int m_;
  int cells_;
};

/// r_agg laid out as [cell][action].
struct RewardTable {
  int cell_count = 0;
  int action_count = 0;
  std::vector<double> values;

  double operator()(int cell, int a) const {
    return values[static_cast<std::size_t>(cell * action_count + a)];
  }
};

/// P_agg laid out as [cell][action][next_cell]; each row is a probability
/// vector.
struct TransitionTable {
  int cell_count = 0;
  int action_count = 0;
  std::vector<double> values;
  // Largest |raw row sum - 1| seen before renormalization.
  double max_raw_deviation = 0.0;

  double operator()(int next, int cell, int a) const {
    return values[row_offset(cell, a) + static_cast<std::size_t>(next)];
  }
  std::size_t row_offset(int cell, int a) const {
    return static_cast<std::size_t>((cell * action_count + a)) *
           static_cast<std::size_t>(cell_count);
  }
  std::span<const double> row(int cell, int a) const {
    return {values.data() + row_offset(cell, a), static_cast<std::size_t>(cell_count)};
  }
};

/// Mean of r(., a) over the cell by the midpoint rule with m^d points.
double aggregate_reward(const Grid& grid, const ContinuousMdp& env, const IntervalId& cell, int a);

RewardTable aggregate_reward_table(const Grid& grid, const ContinuousMdp& env);

/// Double midpoint quadrature of the transition density. `points` overrides
/// the per-dimension sub-sample count for both source and destination cells
/// (0 uses the grid's quadrature_points). Throws std::invalid_argument when
/// the environment has no density and std::runtime_error when a raw row sum
/// misses 1 by more than 1e-3.
TransitionTable aggregate_transition_matrix(const Grid& grid, const ContinuousMdp& env,
                                            int points = 0);

/// Default transition quadrature resolution: the grid's own points in 1D,
/// capped at 4 per dimension otherwise.
int default_transition_points(const Grid& grid);

/// CSV rows (next_cell,cell,action,value) for P_agg, or (cell,action,value)
/// for r_agg.
void write_transition_csv(std::ostream& out, const TransitionTable& table);
void write_reward_csv(std::ostream& out, const RewardTable& table);

}  // namespace ucbvi
