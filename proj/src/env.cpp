#include "ucbvi/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ucbvi/grid.hpp"

namespace ucbvi {

namespace {

State sample_uniform_box(int dimension, Rng& rng) {
  State s(static_cast<std::size_t>(dimension));
  for (auto& v : s) v = rng.uniform();
  return s;
}

void attach_uniform_transitions(ContinuousMdp& env) {
  const int d = env.dimension;
  env.sample_next = [d](StateView, int, Rng& rng) {
    return sample_uniform_box(d, rng);
  };
  env.density = [](StateView, StateView, int) { return 1.0; };
}

double param_or(const std::map<std::string, double>& params,
                const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

double state_distance(StateView a, StateView b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ContinuousMdp make_sine_1d() {
  constexpr double kSpan = 5.0 * std::numbers::pi;
  ContinuousMdp env;
  env.name = "sine1d";
  env.dimension = 1;
  env.action_count = 2;
  env.raw_box = {{0.0, kSpan}};
  env.reward = [](StateView s, int a) {
    const double raw = std::sin(kSpan * s[0]);
    return a == 0 ? 0.5 * (1.0 + raw) : 0.5 * (1.0 - raw);
  };
  attach_uniform_transitions(env);
  // d/ds of sin(5*pi*s)/2; transitions are state-independent.
  env.holder = {kSpan / 2.0, 1.0};
  return env;
}

ContinuousMdp make_sine_2d() {
  ContinuousMdp env;
  env.name = "sine2d";
  env.dimension = 2;
  env.action_count = 2;
  env.raw_box = {{0.0, 1.0}, {0.0, 1.0}};
  env.reward = [](StateView s, int a) {
    const double u = (s[0] - s[1]) / std::numbers::sqrt2;
    const double v = (s[0] + s[1]) / std::numbers::sqrt2;
    const double raw = a == 0 ? std::sin(u) + std::cos(v) : -std::sin(u) - std::cos(v);
    return (raw + 2.0) / 4.0;
  };
  attach_uniform_transitions(env);
  // The l1 norm of the gradient is at most 2 before the /4 scaling, which
  // bounds the constant with respect to sup-norm distance.
  env.holder = {0.5, 1.0};
  return env;
}

ContinuousMdp make_lower_bound_env(int n_cells, double lipschitz_L) {
  if (n_cells < 1) throw std::invalid_argument("lowerbound: n_cells must be >= 1");
  if (!(lipschitz_L > 0.0)) throw std::invalid_argument("lowerbound: L must be positive");
  // Peak height L/(4n) on a baseline of 1/2.
  if (lipschitz_L > 2.0 * n_cells) {
    throw std::invalid_argument("lowerbound: L > 2*n_cells pushes rewards outside [0,1]");
  }
  ContinuousMdp env;
  env.name = "lowerbound";
  env.dimension = 1;
  env.action_count = 2;
  env.raw_box = {{0.0, 1.0}};
  const double n = static_cast<double>(n_cells);
  const double peak = lipschitz_L / (4.0 * n);
  env.reward = [n, peak, lipschitz_L](StateView s, int a) {
    const double x = s[0] * n;
    const double j = std::min(std::floor(x), n - 1.0);
    const double t = (x - j) / n;  // offset inside the cell, in state units
    const double first = std::max(0.0, peak - lipschitz_L * std::abs(t - 0.25 / n));
    const double second = std::max(0.0, peak - lipschitz_L * std::abs(t - 0.75 / n));
    const double bump = first - second;
    return a == 0 ? 0.5 + bump : 0.5 - bump;
  };
  attach_uniform_transitions(env);
  env.holder = {lipschitz_L, 1.0};
  return env;
}

ContinuousMdp make_piecewise_constant(
    std::vector<std::vector<double>> rewards,
    std::vector<std::vector<std::vector<double>>> transitions) {
  const int n = static_cast<int>(rewards.size());
  if (n < 1) throw std::invalid_argument("piecewise: need at least one cell");
  const int actions = static_cast<int>(rewards.front().size());
  if (static_cast<int>(transitions.size()) != n) {
    throw std::invalid_argument("piecewise: transition table has wrong cell count");
  }
  for (int x = 0; x < n; ++x) {
    if (static_cast<int>(rewards[x].size()) != actions ||
        static_cast<int>(transitions[x].size()) != actions) {
      throw std::invalid_argument("piecewise: ragged action dimension");
    }
    for (int a = 0; a < actions; ++a) {
      if (rewards[x][a] < 0.0 || rewards[x][a] > 1.0) {
        throw std::invalid_argument("piecewise: reward outside [0,1]");
      }
      const auto& row = transitions[x][a];
      if (static_cast<int>(row.size()) != n) {
        throw std::invalid_argument("piecewise: transition row has wrong length");
      }
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) throw std::invalid_argument("piecewise: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("piecewise: transition row does not sum to 1");
      }
    }
  }

  ContinuousMdp env;
  env.name = "piecewise";
  env.dimension = 1;
  env.action_count = actions;
  env.raw_box = {{0.0, 1.0}};
  env.reward = [rewards, n](StateView s, int a) {
    return rewards[static_cast<std::size_t>(cell_index_1d(s[0], n))][static_cast<std::size_t>(a)];
  };
  env.sample_next = [transitions, n](StateView s, int a, Rng& rng) {
    const auto& row = transitions[static_cast<std::size_t>(cell_index_1d(s[0], n))]
                                 [static_cast<std::size_t>(a)];
    const double u = rng.uniform();
    double acc = 0.0;
    int next = n - 1;
    for (int y = 0; y < n; ++y) {
      acc += row[static_cast<std::size_t>(y)];
      if (u < acc) {
        next = y;
        break;
      }
    }
    // Open interior of the cell keeps the sample away from shared endpoints.
    const double offset = 0.5 * (1.0 + (2.0 * rng.uniform() - 1.0) * (1.0 - 1e-9));
    return State{(next + offset) / n};
  };
  env.density = [transitions, n](StateView next, StateView s, int a) {
    const auto x = static_cast<std::size_t>(cell_index_1d(s[0], n));
    const auto y = static_cast<std::size_t>(cell_index_1d(next[0], n));
    return n * transitions[x][static_cast<std::size_t>(a)][y];
  };
  // Discontinuous; no finite Hölder constant exists.
  env.holder = {std::numeric_limits<double>::infinity(), 1.0};
  return env;
}

ContinuousMdp make_constant_env(int dimension, int action_count, double value) {
  if (value < 0.0 || value > 1.0) throw std::invalid_argument("constant: reward outside [0,1]");
  ContinuousMdp env;
  env.name = "constant";
  env.dimension = dimension;
  env.action_count = action_count;
  env.raw_box.assign(static_cast<std::size_t>(dimension), Interval{});
  env.reward = [value](StateView, int) { return value; };
  attach_uniform_transitions(env);
  env.holder = {0.0, 1.0};
  return env;
}

std::vector<std::string> env_names() { return {"sine1d", "sine2d", "lowerbound"}; }

ContinuousMdp make_env(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "sine1d") return make_sine_1d();
  if (name == "sine2d") return make_sine_2d();
  if (name == "lowerbound") {
    const double cells = param_or(params, "n_cells", 8.0);
    if (cells < 1.0 || cells != std::floor(cells)) {
      throw std::invalid_argument("lowerbound: n_cells must be a positive integer");
    }
    return make_lower_bound_env(static_cast<int>(cells), param_or(params, "L", 4.0));
  }
  throw std::invalid_argument("unknown environment '" + name + "'");
}

HolderReport estimate_holder(const ContinuousMdp& env, double alpha, int probe_count,
                             std::uint64_t seed) {
  if (probe_count < 2) throw std::invalid_argument("estimate_holder: probe_count must be >= 2");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("estimate_holder: alpha must lie in (0,1]");
  }
  const int d = env.dimension;
  const int actions = env.action_count;
  Rng rng(seed);

  // Half the pairs are global, half are local with a log-uniform offset so
  // that steep regions are resolved.
  auto draw_pair = [&](int i) {
    State s = sample_uniform_box(d, rng);
    State t(static_cast<std::size_t>(d));
    if (i % 2 == 0) {
      t = sample_uniform_box(d, rng);
    } else {
      const double scale = std::pow(10.0, -4.0 + 3.0 * rng.uniform());
      for (int k = 0; k < d; ++k) {
        const double step = scale * (2.0 * rng.uniform() - 1.0);
        t[static_cast<std::size_t>(k)] = std::clamp(s[static_cast<std::size_t>(k)] + step, 0.0, 1.0);
      }
    }
    return std::pair{s, t};
  };

  HolderReport report;
  report.alpha_assumed = alpha;
  report.reward_L_est.assign(static_cast<std::size_t>(actions), 0.0);
  report.max_violation = -std::numeric_limits<double>::infinity();
  const double declared = env.holder.lipschitz;

  for (int i = 0; i < probe_count; ++i) {
    auto [s, t] = draw_pair(i);
    const double dist = state_distance(s, t);
    if (dist <= 0.0) continue;
    const double scale = std::pow(dist, alpha);
    for (int a = 0; a < actions; ++a) {
      const double diff = std::abs(env.reward(s, a) - env.reward(t, a));
      auto& est = report.reward_L_est[static_cast<std::size_t>(a)];
      est = std::max(est, diff / scale);
      report.max_violation = std::max(report.max_violation, diff - declared * scale);
    }
  }

  if (env.has_density()) {
    const int q = d == 1 ? 256 : 32;
    const Grid probe_grid(q, d, 1);
    const double volume = std::pow(1.0 / q, d);
    const int pairs = std::min(probe_count, 200);
    std::vector<double> est(static_cast<std::size_t>(actions), 0.0);
    State y(static_cast<std::size_t>(d));
    for (int i = 0; i < pairs; ++i) {
      auto [s, t] = draw_pair(i);
      const double dist = state_distance(s, t);
      if (dist <= 0.0) continue;
      const double scale = std::pow(dist, alpha);
      for (int a = 0; a < actions; ++a) {
        double l1 = 0.0;
        for (int c = 0; c < probe_grid.cell_count(); ++c) {
          probe_grid.center_of(c, y);
          l1 += std::abs(env.density(y, s, a) - env.density(y, t, a)) * volume;
        }
        auto& e = est[static_cast<std::size_t>(a)];
        e = std::max(e, l1 / scale);
        report.max_violation = std::max(report.max_violation, l1 - declared * scale);
      }
    }
    report.transition_L_est = std::move(est);
  }
  return report;
}

}  // namespace ucbvi
