#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucbvi/agent.hpp"
#include "ucbvi/env.hpp"

namespace ucbvi {

/// Validation failure tied to one configuration field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string env_name = "sine1d";
  std::map<std::string, double> env_params;
  int n = 16;
  int horizon = 5;
  std::int64_t episodes = 1000;
  double delta = 0.05;
  std::uint64_t seed = 1;
  int fine_multiplier = 0;             // 0: 16 in 1D, 4 per dimension otherwise
  int quadrature_points = 0;            // 0: grid default
  int transition_points = 0;            // 0: default_transition_points
  int reference_transition_points = 0;  // 0: continuous_reference default
  std::string start_mode = "uniform";   // "uniform" or "fixed"
  std::vector<double> fixed_start;
  int ma_window = 100;
  double threshold_fraction = 0.02;     // first-below marker: MA <= fraction * H
  std::vector<std::int64_t> checkpoints;
  std::string out_dir;
  std::string format = "csv";

  // Sweep axes. A non-empty t_values list runs T-sweeps with n chosen by
  // corollary_n(T, corollary_k) and K = T / H.
  std::vector<int> n_values;
  std::vector<int> h_values;
  std::vector<std::int64_t> k_values;
  std::vector<std::int64_t> t_values;
  int seed_count = 5;
  int corollary_k = 1;

  std::int64_t total_steps() const { return episodes * horizon; }
  int resolved_fine_multiplier(int dimension) const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct RegretReport {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  std::vector<double> delta_agg;
  std::vector<double> delta_error;
  std::vector<double> moving_avg;
  std::optional<std::int64_t> first_below;  // 1-based episode
  double threshold = 0.0;
  double upper_bound = 0.0;         // regret_upper_bound at the run's parameters
  double lower_bound = 0.0;         // lower_bound_value at the run's parameters
  double discretization_bound = 0.0;  // 5 L n^-alpha T
  double surrogate_tolerance = 0.0;   // per-episode fine-grid error bound
  double transition_quadrature_deviation = 0.0;

  std::string config_hash;
  std::string revision;
  ExperimentConfig config;

  double final_cumulative() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  double final_moving_average() const { return moving_avg.empty() ? 0.0 : moving_avg.back(); }
};

using CheckpointFn = std::function<void(std::int64_t episode, const AgentState&)>;

ContinuousMdp build_env(const ExperimentConfig& cfg);

RegretReport run_experiment(const ExperimentConfig& cfg, const CheckpointFn& on_checkpoint = {});

/// Upper regret bound 5 L n^-a T + 30 L' sqrt(S A T H) + 2500 H^2 S^2 A L'^2
/// + 4 H sqrt(T L') with L' = ln(5 H S A T / delta) and S = n^dimension.
double regret_upper_bound(double n, double actions, double horizon, double steps,
                          double lipschitz, double alpha, double delta, int dimension = 1);

/// round(T^(k / (2k + 1))), at least 1.
int corollary_n(double steps, int k_smooth);

/// L sqrt(H A) T^(2/3).
double lower_bound_value(double actions, double horizon, double steps, double lipschitz);

/// Trailing mean over min(w, i + 1) entries.
std::vector<double> moving_average(const std::vector<double>& series, int window);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRun {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<std::int64_t> first_below;
  double final_moving_average = 0.0;
  double final_cumulative = 0.0;
  std::vector<double> cumulative;  // kept for checkpoint queries
};

struct SweepCell {
  int n = 0;
  int horizon = 0;
  std::int64_t episodes = 0;
  std::int64_t steps = 0;
  std::vector<SweepRun> runs;

  // Medians over successful seeds; a missing marker counts as +infinity.
  double median_first_below() const;
  double median_final_moving_average() const;
  double median_final_cumulative() const;
  double median_cumulative_at(std::int64_t episode) const;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  // Per horizon: log-log slope of median cumulative regret against T
  // (T-sweeps only).
  std::map<int, double> t_slopes;
};

/// Runs the cross product of the sweep axes over `seed_count` seeds
/// (seed, seed + 1, ...). Failures are recorded per run and the sweep
/// continues.
SweepResult sweep(const ExperimentConfig& cfg);

void write_report_csv(std::ostream& out, const RegretReport& report);
nlohmann::json report_summary(const RegretReport& report);
nlohmann::json sweep_summary(const SweepResult& result);

/// FNV-1a of the canonical JSON form of the config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string revision_string();

double median(std::vector<double> values);

}  // namespace ucbvi
