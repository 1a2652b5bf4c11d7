#pragma once

// Generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ucbvi/env.hpp"
#include "ucbvi/oracle.hpp"
#include "ucbvi/rng.hpp"

namespace ucbvi::testing {

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline int int_in(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random tabular MDP; rows drawn from normalized exponentials, some sparse.
inline DiscreteMdp random_discrete_mdp(Rng& rng, int cells, int actions, int horizon) {
  DiscreteMdp m;
  m.cell_count = cells;
  m.action_count = actions;
  m.horizon = horizon;
  m.rewards.resize(static_cast<std::size_t>(cells * actions));
  for (auto& r : m.rewards) r = rng.uniform();
  m.transitions.resize(static_cast<std::size_t>(cells * actions * cells));
  for (int row = 0; row < cells * actions; ++row) {
    double sum = 0.0;
    for (int y = 0; y < cells; ++y) {
      double w = -std::log(1.0 - rng.uniform());
      if (rng.uniform() < 0.2) w = 0.0;
      m.transitions[static_cast<std::size_t>(row * cells + y)] = w;
      sum += w;
    }
    if (sum == 0.0) {
      m.transitions[static_cast<std::size_t>(row * cells)] = 1.0;
      sum = 1.0;
    }
    for (int y = 0; y < cells; ++y) m.transitions[static_cast<std::size_t>(row * cells + y)] /= sum;
  }
  return m;
}

/// Smooth random 1D environment with a known Hölder pair.
///
/// r(s,a) = 1/2 + sum_j c_j sin(2 pi j s + phi_j) with sum |c_j| <= 1/2.
/// p(s'|s,a) = 1 + beta cos(2 pi k s' + theta_a + 2 pi omega s), which
/// integrates to 1 in s' and moves at most 2 pi omega beta |s - s'| in l1.
/// The declared L is the larger of the two slopes; with alpha = 1/2 the same
/// L still holds on [0,1] because |s - s'| <= |s - s'|^(1/2).
struct SmoothEnvSpec {
  int actions = 2;
  std::vector<std::vector<double>> amp, phase;  // [a][j]
  double beta = 0.0;
  int k = 1;
  double omega = 0.0;
  std::vector<double> theta;
  double alpha = 1.0;
};

inline SmoothEnvSpec random_smooth_spec(Rng& rng) {
  SmoothEnvSpec sp;
  sp.actions = int_in(rng, 1, 3);
  const int terms = int_in(rng, 1, 3);
  sp.amp.assign(static_cast<std::size_t>(sp.actions), std::vector<double>(static_cast<std::size_t>(terms)));
  sp.phase = sp.amp;
  for (int a = 0; a < sp.actions; ++a) {
    double total = 0.0;
    for (int j = 0; j < terms; ++j) {
      sp.amp[a][j] = rng.uniform();
      sp.phase[a][j] = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
      total += sp.amp[a][j];
    }
    const double scale = uniform_in(rng, 0.05, 0.5) / total;
    for (auto& c : sp.amp[a]) c *= scale;
  }
  sp.beta = uniform_in(rng, 0.0, 0.8);
  sp.k = int_in(rng, 1, 2);
  sp.omega = uniform_in(rng, 0.0, 1.0);
  for (int a = 0; a < sp.actions; ++a) sp.theta.push_back(uniform_in(rng, 0.0, 2.0 * std::numbers::pi));
  sp.alpha = rng.uniform() < 0.5 ? 0.5 : 1.0;
  return sp;
}

inline ContinuousMdp make_smooth_env(const SmoothEnvSpec& sp) {
  constexpr double tau = 2.0 * std::numbers::pi;
  ContinuousMdp env;
  env.name = "smooth";
  env.dimension = 1;
  env.action_count = sp.actions;
  env.raw_box = {{0.0, 1.0}};
  env.reward = [sp](StateView s, int a) {
    double r = 0.5;
    for (std::size_t j = 0; j < sp.amp[a].size(); ++j)
      r += sp.amp[a][j] * std::sin(tau * static_cast<double>(j + 1) * s[0] + sp.phase[a][j]);
    return std::clamp(r, 0.0, 1.0);
  };
  env.density = [sp](StateView next, StateView s, int a) {
    return 1.0 + sp.beta * std::cos(tau * sp.k * next[0] + sp.theta[a] + tau * sp.omega * s[0]);
  };
  env.sample_next = [sp](StateView s, int a, Rng& rng) {
    for (;;) {
      const double y = rng.uniform();
      const double p = 1.0 + sp.beta * std::cos(tau * sp.k * y + sp.theta[a] + tau * sp.omega * s[0]);
      if (rng.uniform() * (1.0 + sp.beta) <= p) return State{y};
    }
  };
  double reward_l = 0.0;
  for (const auto& row : sp.amp) {
    double l = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) l += row[j] * tau * static_cast<double>(j + 1);
    reward_l = std::max(reward_l, l);
  }
  env.holder = {std::max(reward_l, tau * sp.omega * sp.beta), sp.alpha};
  return env;
}

/// Tabular MDP handed to make_piecewise_constant, as nested vectors.
struct PiecewiseSpec {
  std::vector<std::vector<double>> rewards;
  std::vector<std::vector<std::vector<double>>> transitions;
};

inline PiecewiseSpec to_piecewise(const DiscreteMdp& m) {
  PiecewiseSpec sp;
  sp.rewards.assign(static_cast<std::size_t>(m.cell_count), std::vector<double>(static_cast<std::size_t>(m.action_count)));
  sp.transitions.assign(static_cast<std::size_t>(m.cell_count),
                        std::vector<std::vector<double>>(static_cast<std::size_t>(m.action_count),
                                                         std::vector<double>(static_cast<std::size_t>(m.cell_count))));
  for (int x = 0; x < m.cell_count; ++x)
    for (int a = 0; a < m.action_count; ++a) {
      sp.rewards[x][a] = m.reward(x, a);
      double sum = 0.0;
      for (int y = 0; y < m.cell_count; ++y) sum += m.transition(y, x, a);
      for (int y = 0; y < m.cell_count; ++y) sp.transitions[x][a][y] = m.transition(y, x, a) / sum;
    }
  return sp;
}

/// Largest relative difference between two value tables over h in [1, H].
inline double max_relative_gap(const ValueTables& a, const ValueTables& b) {
  double worst = 0.0;
  for (int h = 1; h <= a.horizon; ++h)
    for (int x = 0; x < a.cell_count; ++x) {
      const double u = a.value(h, x), v = b.value(h, x);
      const double scale = std::max({std::abs(u), std::abs(v), 1e-300});
      worst = std::max(worst, std::abs(u - v) / scale);
    }
  return worst;
}

}  // namespace ucbvi::testing
