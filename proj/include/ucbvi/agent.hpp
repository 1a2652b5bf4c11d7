#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"
#include "ucbvi/rng.hpp"

namespace ucbvi {

struct AgentParams {
  int horizon = 1;           // H
  std::int64_t episodes = 1;  // K; fixes T = K * H inside the log term
  double delta = 0.05;
};

/// One observed step: (x_h, a_h, x_{h+1}) at step h in [1, H].
struct Transition {
  int cell = 0;
  int action = 0;
  int next_cell = 0;
  int step = 1;
};

/// Tabular state of the optimistic learner on the discretized MDP.
///
/// Steps are 1-based in every accessor. Per-step state counts are kept for
/// h in [1, H+1]; the (H+1) row counts terminal states of episodes.
struct AgentState {
  int cells = 0;
  int actions = 0;
  int horizon = 0;
  int n_per_dim = 0;
  std::int64_t total_steps = 0;  // T = K * H
  double delta = 0.05;
  double log_term = 0.0;         // ln(5 n A T / delta), n taken as the cell count

  std::vector<std::int64_t> n_sas;   // [cell][action][next]
  std::vector<std::int64_t> n_sa;    // [cell][action]
  std::vector<std::int64_t> n_step;  // [h-1][cell], h in [1, H+1]
  std::vector<double> p_hat;         // [cell][action][next]
  std::vector<double> q;             // [h-1][cell][action], h in [1, H]
  std::vector<double> v;             // [h-1][cell], h in [1, H+1]
  std::vector<double> r_agg;         // [cell][action]

  std::size_t sa(int x, int a) const { return static_cast<std::size_t>(x * actions + a); }
  std::size_t sas(int x, int a, int y) const { return sa(x, a) * cells + static_cast<std::size_t>(y); }
  std::size_t hx(int h, int x) const { return static_cast<std::size_t>((h - 1) * cells + x); }
  std::size_t hxa(int h, int x, int a) const { return hx(h, x) * actions + static_cast<std::size_t>(a); }

  double q_at(int h, int x, int a) const { return q[hxa(h, x, a)]; }
  double v_at(int h, int x) const { return v[hx(h, x)]; }
  double p_hat_at(int y, int x, int a) const { return p_hat[sas(x, a, y)]; }
  std::int64_t visits(int x, int a) const { return n_sa[sa(x, a)]; }
  std::int64_t step_visits(int h, int x) const { return n_step[hx(h, x)]; }
};

/// Fresh agent: no history, Q = H everywhere, V(H+1, .) = 0.
AgentState make_agent(const Grid& grid, RewardTable r_agg, const AgentParams& params);

/// Folds observed transitions into the counts and refreshes the empirical
/// rows of every touched (cell, action).
void update_model(AgentState& state, std::span<const Transition> transitions);

/// Bernstein-style exploration bonus for (x, a) at step h, built from the
/// empirical variance of V(h+1, .) plus two lower-order corrections.
/// Requires visits(x, a) >= 1; throws std::logic_error otherwise.
double bonus(const AgentState& state, int h, int x, int a);

/// Optimistic backward induction from h = H down to 1. Q only ever
/// decreases: each entry is min(previous Q, H, r + P_hat V + bonus).
void plan(AgentState& state);

/// Greedy action with the lowest index among ties.
int act(const AgentState& state, int h, int x);

/// Greedy policy table laid out as [h-1][cell].
std::vector<int> greedy_policy(const AgentState& state);

struct EpisodeRecord {
  State start;
  std::vector<State> states;  // x_1 .. x_{H+1}
  std::vector<int> cells;     // I(x_1) .. I(x_{H+1})
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<int> policy;    // aggregate policy executed, [h-1][cell]
  double optimistic_start_value = 0.0;  // V(1, I(start)) after planning
};

/// Plans on the history so far, executes H steps of the greedy aggregate
/// policy from `start`, then folds the episode into the counts.
EpisodeRecord run_episode(AgentState& state, const ContinuousMdp& env, const Grid& grid,
                          StateView start, Rng& rng);

/// CSV snapshot keyed by (h, cell, action): h,cell,action,q,v,visits.
void write_agent_snapshot(std::ostream& out, const AgentState& state);

}  // namespace ucbvi
