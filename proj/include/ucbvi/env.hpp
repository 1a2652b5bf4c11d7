#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ucbvi/rng.hpp"

namespace ucbvi {

using State = std::vector<double>;
using StateView = std::span<const double>;

struct HolderParams {
  double lipschitz = 0.0;
  double alpha = 1.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Continuous-state, finite-action episodic environment.
///
/// States are always exposed in the unit box [0,1]^d; `raw_box` only records
/// the domain the environment was defined on before normalization. Distances
/// in the Hölder constants are sup-norm distances on the normalized box.
struct ContinuousMdp {
  using RewardFn = std::function<double(StateView, int)>;
  using SamplerFn = std::function<State(StateView, int, Rng&)>;
  using DensityFn = std::function<double(StateView next, StateView s, int)>;

  std::string name;
  int dimension = 1;
  int action_count = 1;
  std::vector<Interval> raw_box;
  RewardFn reward;
  SamplerFn sample_next;
  DensityFn density;  // empty when the environment has no closed-form density
  HolderParams holder;

  bool has_density() const { return static_cast<bool>(density); }
};

struct HolderReport {
  std::vector<double> reward_L_est;
  // Absent when the environment exposes no transition density.
  std::optional<std::vector<double>> transition_L_est;
  double alpha_assumed = 1.0;
  // Largest |r(s,a) - r(s',a)| - L |s-s'|^alpha over the probed pairs.
  double max_violation = 0.0;
};

ContinuousMdp make_sine_1d();
ContinuousMdp make_sine_2d();
ContinuousMdp make_lower_bound_env(int n_cells, double lipschitz_L);

/// Rewards constant on each of the `rewards.size()` cells of [0,1]; the
/// next state is drawn from a piecewise-constant density whose cell masses
/// are given by `transitions[cell][action][next_cell]`. Aggregating such an
/// environment on its own grid is exact.
ContinuousMdp make_piecewise_constant(
    std::vector<std::vector<double>> rewards,
    std::vector<std::vector<std::vector<double>>> transitions);

/// Reward fixed at `value` for every state and action; uniform transitions.
ContinuousMdp make_constant_env(int dimension, int action_count, double value);

/// Registry lookup: "sine1d", "sine2d", "lowerbound" (params n_cells, L).
ContinuousMdp make_env(const std::string& name,
                       const std::map<std::string, double>& params);

std::vector<std::string> env_names();

HolderReport estimate_holder(const ContinuousMdp& env, double alpha,
                             int probe_count, std::uint64_t seed);

/// Sup-norm distance.
double state_distance(StateView a, StateView b);

}  // namespace ucbvi
