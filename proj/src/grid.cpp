#include "ucbvi/grid.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

#include "ucbvi/format.hpp"
#include "ucbvi/kernels.hpp"

namespace ucbvi {

Grid::Grid(int n_per_dim, int dimension, int quadrature_points)
    : n_(n_per_dim), d_(dimension), m_(quadrature_points) {
  if (n_ < 1) throw std::invalid_argument("grid: n must be >= 1");
  if (d_ < 1) throw std::invalid_argument("grid: dimension must be >= 1");
  if (m_ < 0) throw std::invalid_argument("grid: quadrature points must be >= 0");
  if (m_ == 0) m_ = d_ == 1 ? 64 : 16;
  double cells = std::pow(static_cast<double>(n_), d_);
  if (cells > 1e8) throw std::invalid_argument("grid: too many cells");
  cells_ = static_cast<int>(cells);
}

IntervalId Grid::interval_of(StateView s) const {
  if (static_cast<int>(s.size()) != d_) {
    throw std::out_of_range("interval_of: state has dimension " + std::to_string(s.size()) +
                            ", grid has " + std::to_string(d_));
  }
  IntervalId id;
  id.per_dim.resize(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k) {
    const double v = s[static_cast<std::size_t>(k)];
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream msg;
      msg << "interval_of: coordinate " << k << " = " << v << " lies outside [0,1]";
      throw std::out_of_range(msg.str());
    }
    id.per_dim[static_cast<std::size_t>(k)] = cell_index_1d(v, n_);
  }
  id.flat_index = flatten(id.per_dim);
  return id;
}

int Grid::flatten(std::span<const int> per_dim) const {
  int flat = 0;
  for (int k = 0; k < d_; ++k) flat = flat * n_ + per_dim[static_cast<std::size_t>(k)];
  return flat;
}

std::vector<int> Grid::unflatten(int flat) const {
  std::vector<int> idx(static_cast<std::size_t>(d_));
  for (int k = d_ - 1; k >= 0; --k) {
    idx[static_cast<std::size_t>(k)] = flat % n_;
    flat /= n_;
  }
  return idx;
}

void Grid::center_of(int flat, State& out) const { sub_point(flat, 0, 1, out); }

State Grid::center_of(int flat) const {
  State s;
  center_of(flat, s);
  return s;
}

void Grid::sub_point(int flat, int sub, int points, State& out) const {
  out.resize(static_cast<std::size_t>(d_));
  const double w = 1.0 / n_;
  const double sw = w / points;
  for (int k = d_ - 1; k >= 0; --k) {
    const int cell = flat % n_;
    const int piece = sub % points;
    flat /= n_;
    sub /= points;
    out[static_cast<std::size_t>(k)] = cell * w + (piece + 0.5) * sw;
  }
}

double aggregate_reward(const Grid& grid, const ContinuousMdp& env, const IntervalId& cell, int a) {
  const int m = grid.quadrature_points();
  const int subs = static_cast<int>(std::pow(m, grid.dimension()));
  State s;
  double sum = 0.0;
  for (int i = 0; i < subs; ++i) {
    grid.sub_point(cell.flat_index, i, m, s);
    sum += env.reward(s, a);
  }
  return sum / subs;
}

RewardTable aggregate_reward_table(const Grid& grid, const ContinuousMdp& env) {
  if (env.dimension != grid.dimension()) {
    throw std::invalid_argument("aggregate_reward_table: grid/environment dimension mismatch");
  }
  RewardTable table;
  table.cell_count = grid.cell_count();
  table.action_count = env.action_count;
  table.values.assign(static_cast<std::size_t>(table.cell_count * table.action_count), 0.0);
  parallel::aggregate_rewards(grid, env, table.values);
  return table;
}

int default_transition_points(const Grid& grid) {
  return std::min(grid.quadrature_points(), grid.dimension() == 1 ? 16 : 4);
}

TransitionTable aggregate_transition_matrix(const Grid& grid, const ContinuousMdp& env,
                                            int points) {
  if (!env.has_density()) {
    throw std::invalid_argument("aggregate_transition_matrix: environment '" + env.name +
                                "' has no transition density");
  }
  if (env.dimension != grid.dimension()) {
    throw std::invalid_argument("aggregate_transition_matrix: grid/environment dimension mismatch");
  }
  if (points <= 0) points = default_transition_points(grid);

  TransitionTable table;
  table.cell_count = grid.cell_count();
  table.action_count = env.action_count;
  table.values.assign(static_cast<std::size_t>(table.cell_count) * table.cell_count *
                          static_cast<std::size_t>(table.action_count),
                      0.0);
  parallel::aggregate_transitions(grid, env, points, table.values);

  const auto c = static_cast<std::size_t>(table.cell_count);
  const std::size_t rows = table.values.size() / c;
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = table.values.data() + r * c;
    double sum = 0.0;
    for (std::size_t y = 0; y < c; ++y) sum += row[y];
    const double dev = std::abs(sum - 1.0);
    table.max_raw_deviation = std::max(table.max_raw_deviation, dev);
    if (dev > 1e-3) {
      throw std::runtime_error("aggregate_transition_matrix: quadrature row sum " +
                               std::to_string(sum) + " for row " + std::to_string(r) +
                               " is not within 1e-3 of 1; increase quadrature points");
    }
    for (std::size_t y = 0; y < c; ++y) row[y] /= sum;
  }
  return table;
}

void write_transition_csv(std::ostream& out, const TransitionTable& table) {
  out << "next_cell,cell,action,value\n";
  for (int x = 0; x < table.cell_count; ++x)
    for (int a = 0; a < table.action_count; ++a)
      for (int y = 0; y < table.cell_count; ++y)
        out << y << ',' << x << ',' << a << ',' << format_double(table(y, x, a)) << '\n';
}

void write_reward_csv(std::ostream& out, const RewardTable& table) {
  out << "cell,action,value\n";
  for (int x = 0; x < table.cell_count; ++x)
    for (int a = 0; a < table.action_count; ++a)
      out << x << ',' << a << ',' << format_double(table(x, a)) << '\n';
}

}  // namespace ucbvi
