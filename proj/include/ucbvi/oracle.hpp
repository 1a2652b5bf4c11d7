#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"

namespace ucbvi {

/// Finite-horizon tabular MDP on the cells of a grid.
struct DiscreteMdp {
  int cell_count = 0;
  int action_count = 0;
  int horizon = 1;
  std::vector<double> rewards;      // [cell][action], in [0,1]
  std::vector<double> transitions;  // [cell][action][next], rows sum to 1

  double reward(int x, int a) const {
    return rewards[static_cast<std::size_t>(x * action_count + a)];
  }
  double transition(int y, int x, int a) const {
    return transitions[(static_cast<std::size_t>(x * action_count + a)) *
                           static_cast<std::size_t>(cell_count) +
                       static_cast<std::size_t>(y)];
  }

  /// Throws std::invalid_argument if rewards leave [0,1] or a row is not a
  /// probability vector (tolerance 1e-9).
  void validate() const;
};

DiscreteMdp make_discrete_mdp(const RewardTable& rewards, const TransitionTable& transitions,
                              int horizon);

/// V laid out as [h-1][cell] for h in [1, H+1]; policy (if any) as [h-1][cell]
/// for h in [1, H].
struct ValueTables {
  int horizon = 0;
  int cell_count = 0;
  std::vector<double> values;
  std::vector<int> policy;

  double value(int h, int x) const {
    return values[static_cast<std::size_t>((h - 1) * cell_count + x)];
  }
  int action(int h, int x) const {
    return policy[static_cast<std::size_t>((h - 1) * cell_count + x)];
  }
};

/// Backward induction with a max over actions; lowest-index greedy ties.
ValueTables optimal_values(const DiscreteMdp& mdp);

/// Backward induction for a fixed non-stationary policy laid out as
/// [h-1][cell]. The returned tables carry the policy.
ValueTables policy_values(const DiscreteMdp& mdp, std::span<const int> policy);

/// Enumerates every deterministic Markov policy and propagates state
/// distributions forward; refuses (std::length_error) when the number of
/// policies A^(H * cells) exceeds 10^6.
ValueTables brute_force_values(const DiscreteMdp& mdp);

/// Fine-grid surrogate for the continuous optimal values.
struct FineReference {
  Grid grid;
  DiscreteMdp mdp;
  ValueTables optimal;
  // Per-episode bound on the surrogate's error: 5 L fine_n^-alpha H.
  double surrogate_tolerance = 0.0;
};

/// `transition_points` = 0 picks 4 sub-samples per cell in 1D and 2 per
/// dimension otherwise. Throws std::invalid_argument without a density.
FineReference continuous_reference(const ContinuousMdp& env, int fine_n, int horizon,
                                   int quadrature_points = 0, int transition_points = 0);

struct RegretSplit {
  double delta_agg = 0.0;
  double delta_error = 0.0;
  double agg_optimal = 0.0;         // V^agg*_1(I(start))
  double agg_policy = 0.0;          // V^agg_{pi,1}(I(start))
  double continuous_optimal = 0.0;  // V*_1(start) via the fine reference
  double continuous_policy = 0.0;   // V^pi_1(start) via the fine reference

  double total() const { return delta_agg + delta_error; }
};

/// Splits one episode's regret into the learning part on the agent's grid
/// and the discretization part. Policy evaluations are cached so that
/// consecutive episodes executing the same aggregate policy cost nothing.
class RegretDecomposer {
 public:
  RegretDecomposer(Grid agent_grid, DiscreteMdp agent_mdp, FineReference reference);

  RegretSplit decompose(std::span<const int> policy, StateView start);

  const Grid& agent_grid() const { return agent_grid_; }
  const DiscreteMdp& agent_mdp() const { return agent_mdp_; }
  const ValueTables& agent_optimal() const { return agent_optimal_; }
  const FineReference& reference() const { return reference_; }

  /// Lifts an aggregate policy [h-1][agent cell] to the fine grid.
  std::vector<int> lift(std::span<const int> policy) const;

 private:
  Grid agent_grid_;
  DiscreteMdp agent_mdp_;
  ValueTables agent_optimal_;
  FineReference reference_;
  std::vector<int> fine_to_agent_;

  std::vector<int> cached_policy_;
  ValueTables cached_agg_;
  ValueTables cached_fine_;
};

/// One-shot form of RegretDecomposer::decompose; builds the agent-grid MDP
/// from `env` by quadrature.
RegretSplit regret_decomposition(const ContinuousMdp& env, const Grid& grid,
                                 std::span<const int> policy, StateView start,
                                 const FineReference& reference);

/// CSV rows h,cell,value,greedy_action for h in [1, H]; greedy_action is -1
/// when the tables carry no policy.
void write_value_csv(std::ostream& out, const ValueTables& tables);

}  // namespace ucbvi
