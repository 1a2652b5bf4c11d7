#include <cmath>
#include <vector>

#include "ucbvi/kernels.hpp"

namespace ucbvi::parallel {

void aggregate_rewards(const Grid& grid, const ContinuousMdp& env, std::span<double> out) {
  const int actions = env.action_count;
  const int m = grid.quadrature_points();
  const int subs = static_cast<int>(std::pow(m, grid.dimension()));
  const int cells = grid.cell_count();
#pragma omp parallel
  {
    State s;
#pragma omp for schedule(static)
    for (int c = 0; c < cells; ++c) {
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
}

void aggregate_transitions(const Grid& grid, const ContinuousMdp& env, int points,
                           std::span<double> out) {
  const int cells = grid.cell_count();
  const int actions = env.action_count;
  const int d = grid.dimension();
  const int subs = static_cast<int>(std::pow(points, d));
  const double dest_weight = std::pow(grid.width() / points, d);

  // Destination samples are shared by every source row.
  std::vector<double> dest(static_cast<std::size_t>(cells) * subs * d);
  {
    State p;
    for (int y = 0; y < cells; ++y)
      for (int j = 0; j < subs; ++j) {
        grid.sub_point(y, j, points, p);
        for (int k = 0; k < d; ++k)
          dest[(static_cast<std::size_t>(y) * subs + j) * d + k] = p[static_cast<std::size_t>(k)];
      }
  }

#pragma omp parallel
  {
    State src;
#pragma omp for schedule(dynamic, 1)
    for (int c = 0; c < cells; ++c) {
      for (int a = 0; a < actions; ++a) {
        double* row = out.data() + static_cast<std::size_t>(c * actions + a) * cells;
        for (int y = 0; y < cells; ++y) row[y] = 0.0;
        // Same accumulation order per entry as the serial kernel: source
        // sample outermost, destination sample innermost.
        for (int i = 0; i < subs; ++i) {
          grid.sub_point(c, i, points, src);
          for (int y = 0; y < cells; ++y) {
            double mass = row[y];
            const double* base = dest.data() + static_cast<std::size_t>(y) * subs * d;
            for (int j = 0; j < subs; ++j)
              mass += env.density(StateView(base + static_cast<std::size_t>(j) * d,
                                            static_cast<std::size_t>(d)),
                                  src, a);
            row[y] = mass;
          }
        }
        for (int y = 0; y < cells; ++y) row[y] = row[y] * dest_weight / subs;
      }
    }
  }
}

void expected_next(std::span<const double> transitions, std::span<const double> next_values,
                   std::span<double> out) {
  const std::size_t cells = next_values.size();
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
  // Small rows are not worth a parallel region.
#pragma omp parallel for schedule(static) if (rows * static_cast<std::ptrdiff_t>(cells) > 65536)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const double* row = transitions.data() + static_cast<std::size_t>(r) * cells;
    double acc = 0.0;
    for (std::size_t y = 0; y < cells; ++y) acc += row[y] * next_values[y];
    out[static_cast<std::size_t>(r)] = acc;
  }
}

}  // namespace ucbvi::parallel

namespace ucbvi::parallel {

void expected_next_selected(std::span<const double> transitions, int action_count,
                            std::span<const int> actions, std::span<const double> next_values,
                            std::span<double> out) {
  const std::size_t cells = next_values.size();
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (rows * static_cast<std::ptrdiff_t>(cells) > 65536)
  for (std::ptrdiff_t x = 0; x < rows; ++x) {
    const std::size_t r = static_cast<std::size_t>(x) * static_cast<std::size_t>(action_count) +
                          static_cast<std::size_t>(actions[static_cast<std::size_t>(x)]);
    const double* row = transitions.data() + r * cells;
    double acc = 0.0;
    for (std::size_t y = 0; y < cells; ++y) acc += row[y] * next_values[y];
    out[static_cast<std::size_t>(x)] = acc;
  }
}

}  // namespace ucbvi::parallel
