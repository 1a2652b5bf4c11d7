#include "ucbvi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ucbvi/format.hpp"
#include "ucbvi/kernels.hpp"

namespace ucbvi {

void DiscreteMdp::validate() const {
  if (cell_count < 1 || action_count < 1 || horizon < 1) {
    throw std::invalid_argument("discrete mdp: cell_count, action_count and horizon must be >= 1");
  }
  const auto rows = static_cast<std::size_t>(cell_count * action_count);
  if (rewards.size() != rows || transitions.size() != rows * static_cast<std::size_t>(cell_count)) {
    throw std::invalid_argument("discrete mdp: table sizes do not match the dimensions");
  }
  for (double r : rewards) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("discrete mdp: reward outside [0,1]");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int y = 0; y < cell_count; ++y) {
      const double p = transitions[r * static_cast<std::size_t>(cell_count) + static_cast<std::size_t>(y)];
      if (p < 0.0) throw std::invalid_argument("discrete mdp: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("discrete mdp: transition row " + std::to_string(r) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

DiscreteMdp make_discrete_mdp(const RewardTable& rewards, const TransitionTable& transitions,
                              int horizon) {
  if (rewards.cell_count != transitions.cell_count ||
      rewards.action_count != transitions.action_count) {
    throw std::invalid_argument("make_discrete_mdp: reward and transition tables disagree");
  }
  DiscreteMdp mdp;
  mdp.cell_count = rewards.cell_count;
  mdp.action_count = rewards.action_count;
  mdp.horizon = horizon;
  mdp.rewards = rewards.values;
  mdp.transitions = transitions.values;
  mdp.validate();
  return mdp;
}

ValueTables optimal_values(const DiscreteMdp& mdp) {
  const int C = mdp.cell_count;
  const int A = mdp.action_count;
  ValueTables out;
  out.horizon = mdp.horizon;
  out.cell_count = C;
  out.values.assign(static_cast<std::size_t>((mdp.horizon + 1) * C), 0.0);
  out.policy.assign(static_cast<std::size_t>(mdp.horizon * C), 0);

  std::vector<double> expected(static_cast<std::size_t>(C * A));
  for (int h = mdp.horizon; h >= 1; --h) {
    std::span<const double> next(out.values.data() + static_cast<std::size_t>(h * C),
                                 static_cast<std::size_t>(C));
    if (h == mdp.horizon) {
      std::fill(expected.begin(), expected.end(), 0.0);
    } else {
      parallel::expected_next(mdp.transitions, next, expected);
    }
    for (int x = 0; x < C; ++x) {
      int best_a = 0;
      double best = mdp.reward(x, 0) + expected[static_cast<std::size_t>(x * A)];
      for (int a = 1; a < A; ++a) {
        const double q = mdp.reward(x, a) + expected[static_cast<std::size_t>(x * A + a)];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      out.values[static_cast<std::size_t>((h - 1) * C + x)] = best;
      out.policy[static_cast<std::size_t>((h - 1) * C + x)] = best_a;
    }
  }
  return out;
}

ValueTables policy_values(const DiscreteMdp& mdp, std::span<const int> policy) {
  const int C = mdp.cell_count;
  if (policy.size() != static_cast<std::size_t>(mdp.horizon * C)) {
    throw std::invalid_argument("policy_values: policy must cover every (step, cell)");
  }
  for (int a : policy) {
    if (a < 0 || a >= mdp.action_count) throw std::invalid_argument("policy_values: action out of range");
  }
  ValueTables out;
  out.horizon = mdp.horizon;
  out.cell_count = C;
  out.values.assign(static_cast<std::size_t>((mdp.horizon + 1) * C), 0.0);
  out.policy.assign(policy.begin(), policy.end());

  std::vector<double> expected(static_cast<std::size_t>(C));
  for (int h = mdp.horizon; h >= 1; --h) {
    std::span<const double> next(out.values.data() + static_cast<std::size_t>(h * C),
                                 static_cast<std::size_t>(C));
    std::span<const int> step_policy = policy.subspan(static_cast<std::size_t>((h - 1) * C),
                                                      static_cast<std::size_t>(C));
    if (h == mdp.horizon) {
      std::fill(expected.begin(), expected.end(), 0.0);
    } else {
      parallel::expected_next_selected(mdp.transitions, mdp.action_count, step_policy, next, expected);
    }
    for (int x = 0; x < C; ++x) {
      out.values[static_cast<std::size_t>((h - 1) * C + x)] =
          mdp.reward(x, step_policy[static_cast<std::size_t>(x)]) + expected[static_cast<std::size_t>(x)];
    }
  }
  return out;
}

ValueTables brute_force_values(const DiscreteMdp& mdp) {
  const int C = mdp.cell_count;
  const int A = mdp.action_count;
  const int H = mdp.horizon;
  const int slots = H * C;
  const double count = std::pow(static_cast<double>(A), slots);
  if (count > 1e6) {
    throw std::length_error("brute_force_values: " + std::to_string(count) +
                            " policies exceed the enumeration limit of 1e6");
  }
  const auto policies = static_cast<long long>(count);

  ValueTables best;
  best.horizon = H;
  best.cell_count = C;
  best.values.assign(static_cast<std::size_t>((H + 1) * C), -1.0);
  for (int x = 0; x < C; ++x) best.values[static_cast<std::size_t>(H * C + x)] = 0.0;

  std::vector<int> policy(static_cast<std::size_t>(slots));
  std::vector<double> dist(static_cast<std::size_t>(C));
  std::vector<double> next(static_cast<std::size_t>(C));
  for (long long id = 0; id < policies; ++id) {
    long long rest = id;
    for (int i = 0; i < slots; ++i) {
      policy[static_cast<std::size_t>(i)] = static_cast<int>(rest % A);
      rest /= A;
    }
    for (int h0 = 1; h0 <= H; ++h0) {
      for (int x0 = 0; x0 < C; ++x0) {
        std::fill(dist.begin(), dist.end(), 0.0);
        dist[static_cast<std::size_t>(x0)] = 1.0;
        double total = 0.0;
        for (int h = h0; h <= H; ++h) {
          std::fill(next.begin(), next.end(), 0.0);
          for (int x = 0; x < C; ++x) {
            const double mass = dist[static_cast<std::size_t>(x)];
            if (mass == 0.0) continue;
            const int a = policy[static_cast<std::size_t>((h - 1) * C + x)];
            total += mass * mdp.reward(x, a);
            for (int y = 0; y < C; ++y) next[static_cast<std::size_t>(y)] += mass * mdp.transition(y, x, a);
          }
          dist.swap(next);
        }
        double& slot = best.values[static_cast<std::size_t>((h0 - 1) * C + x0)];
        slot = std::max(slot, total);
      }
    }
  }
  return best;
}

FineReference continuous_reference(const ContinuousMdp& env, int fine_n, int horizon,
                                   int quadrature_points, int transition_points) {
  if (!env.has_density()) {
    throw std::invalid_argument("continuous_reference: environment '" + env.name +
                                "' has no transition density");
  }
  Grid fine(fine_n, env.dimension, quadrature_points);
  if (transition_points <= 0) transition_points = env.dimension == 1 ? 4 : 2;
  auto rewards = aggregate_reward_table(fine, env);
  auto transitions = aggregate_transition_matrix(fine, env, transition_points);
  DiscreteMdp mdp = make_discrete_mdp(rewards, transitions, horizon);
  ValueTables opt = optimal_values(mdp);
  const double tol = 5.0 * env.holder.lipschitz * std::pow(static_cast<double>(fine_n), -env.holder.alpha) *
                     horizon;
  return FineReference{fine, std::move(mdp), std::move(opt), tol};
}

RegretDecomposer::RegretDecomposer(Grid agent_grid, DiscreteMdp agent_mdp, FineReference reference)
    : agent_grid_(agent_grid),
      agent_mdp_(std::move(agent_mdp)),
      reference_(std::move(reference)) {
  const Grid& fine = reference_.grid;
  if (fine.dimension() != agent_grid_.dimension() || fine.n() % agent_grid_.n() != 0) {
    throw std::invalid_argument("RegretDecomposer: fine grid must refine the agent grid (fine_n = k * n)");
  }
  if (agent_mdp_.horizon != reference_.mdp.horizon ||
      agent_mdp_.action_count != reference_.mdp.action_count ||
      agent_mdp_.cell_count != agent_grid_.cell_count()) {
    throw std::invalid_argument("RegretDecomposer: agent and reference MDPs disagree");
  }
  agent_optimal_ = optimal_values(agent_mdp_);
  fine_to_agent_.resize(static_cast<std::size_t>(fine.cell_count()));
  State c;
  for (int f = 0; f < fine.cell_count(); ++f) {
    fine.center_of(f, c);
    fine_to_agent_[static_cast<std::size_t>(f)] = agent_grid_.flat_of(c);
  }
}

std::vector<int> RegretDecomposer::lift(std::span<const int> policy) const {
  const int H = agent_mdp_.horizon;
  const int C = agent_mdp_.cell_count;
  const int F = reference_.grid.cell_count();
  std::vector<int> fine_policy(static_cast<std::size_t>(H * F));
  for (int h = 0; h < H; ++h)
    for (int f = 0; f < F; ++f)
      fine_policy[static_cast<std::size_t>(h * F + f)] =
          policy[static_cast<std::size_t>(h * C + fine_to_agent_[static_cast<std::size_t>(f)])];
  return fine_policy;
}

namespace {

// Re-evaluates steps from `last_step` down to 1, reusing the stored values of
// later steps; `tables.policy` must already hold the new policy.
void refresh_policy_values(const DiscreteMdp& mdp, ValueTables& tables, int last_step) {
  const int C = mdp.cell_count;
  std::vector<double> expected(static_cast<std::size_t>(C));
  for (int h = last_step; h >= 1; --h) {
    std::span<const double> next(tables.values.data() + static_cast<std::size_t>(h * C),
                                 static_cast<std::size_t>(C));
    std::span<const int> step_policy(tables.policy.data() + static_cast<std::size_t>((h - 1) * C),
                                     static_cast<std::size_t>(C));
    if (h == mdp.horizon) {
      std::fill(expected.begin(), expected.end(), 0.0);
    } else {
      parallel::expected_next_selected(mdp.transitions, mdp.action_count, step_policy, next, expected);
    }
    for (int x = 0; x < C; ++x) {
      tables.values[static_cast<std::size_t>((h - 1) * C + x)] =
          mdp.reward(x, step_policy[static_cast<std::size_t>(x)]) + expected[static_cast<std::size_t>(x)];
    }
  }
}

}  // namespace

RegretSplit RegretDecomposer::decompose(std::span<const int> policy, StateView start) {
  const int H = agent_mdp_.horizon;
  const int C = agent_mdp_.cell_count;
  if (policy.size() != static_cast<std::size_t>(H * C)) {
    throw std::invalid_argument("decompose: policy must cover every (step, cell)");
  }
  if (cached_policy_.empty()) {
    cached_policy_.assign(policy.begin(), policy.end());
    cached_agg_ = policy_values(agent_mdp_, policy);
    cached_fine_ = policy_values(reference_.mdp, lift(policy));
  } else {
    // Values of steps after the last changed step are still valid.
    int last_changed = 0;
    for (int h = H; h >= 1 && last_changed == 0; --h) {
      for (int x = 0; x < C; ++x) {
        const auto i = static_cast<std::size_t>((h - 1) * C + x);
        if (policy[i] != cached_policy_[i]) {
          last_changed = h;
          break;
        }
      }
    }
    if (last_changed > 0) {
      for (int a : policy) {
        if (a < 0 || a >= agent_mdp_.action_count) throw std::invalid_argument("decompose: action out of range");
      }
      cached_policy_.assign(policy.begin(), policy.end());
      cached_agg_.policy = cached_policy_;
      refresh_policy_values(agent_mdp_, cached_agg_, last_changed);
      cached_fine_.policy = lift(policy);
      refresh_policy_values(reference_.mdp, cached_fine_, last_changed);
    }
  }
  const int x = agent_grid_.flat_of(start);
  const int f = reference_.grid.flat_of(start);
  RegretSplit out;
  out.agg_optimal = agent_optimal_.value(1, x);
  out.agg_policy = cached_agg_.value(1, x);
  out.continuous_optimal = reference_.optimal.value(1, f);
  out.continuous_policy = cached_fine_.value(1, f);
  out.delta_agg = out.agg_optimal - out.agg_policy;
  out.delta_error = (out.continuous_optimal - out.agg_optimal) + (out.agg_policy - out.continuous_policy);
  return out;
}

RegretSplit regret_decomposition(const ContinuousMdp& env, const Grid& grid,
                                 std::span<const int> policy, StateView start,
                                 const FineReference& reference) {
  DiscreteMdp agent_mdp = make_discrete_mdp(aggregate_reward_table(grid, env),
                                            aggregate_transition_matrix(grid, env),
                                            reference.mdp.horizon);
  RegretDecomposer decomposer(grid, std::move(agent_mdp), reference);
  return decomposer.decompose(policy, start);
}

void write_value_csv(std::ostream& out, const ValueTables& tables) {
  out << "h,cell,value,greedy_action\n";
  for (int h = 1; h <= tables.horizon; ++h)
    for (int x = 0; x < tables.cell_count; ++x)
      out << h << ',' << x << ',' << format_double(tables.value(h, x)) << ','
          << (tables.policy.empty() ? -1 : tables.action(h, x)) << '\n';
}

}  // namespace ucbvi
