#include "ucbvi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "ucbvi/format.hpp"
#include "ucbvi/grid.hpp"
#include "ucbvi/oracle.hpp"
#include "ucbvi/rng.hpp"

#ifndef UCBVI_REVISION
#define UCBVI_REVISION "unknown"
#endif

namespace ucbvi {

using nlohmann::json;

void ExperimentConfig::validate() const {
  const auto names = env_names();
  if (std::find(names.begin(), names.end(), env_name) == names.end()) {
    throw ConfigError("env.name", "unknown environment '" + env_name + "'");
  }
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (horizon < 1) throw ConfigError("H", "must be >= 1");
  if (episodes < 1) throw ConfigError("K", "must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0,1)");
  if (fine_multiplier != 0 && fine_multiplier < 4) {
    throw ConfigError("fine_multiplier", "must be 0 (automatic) or >= 4");
  }
  if (quadrature_points < 0) throw ConfigError("quadrature_points", "must be >= 0");
  if (transition_points < 0) throw ConfigError("transition_points", "must be >= 0");
  if (reference_transition_points < 0) throw ConfigError("reference_transition_points", "must be >= 0");
  if (start_mode != "uniform" && start_mode != "fixed") {
    throw ConfigError("start.mode", "must be 'uniform' or 'fixed'");
  }
  if (start_mode == "fixed") {
    if (fixed_start.empty()) throw ConfigError("start.state", "required when start.mode is 'fixed'");
    for (double v : fixed_start) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("start.state", "coordinates must lie in [0,1]");
    }
  }
  if (ma_window < 1) throw ConfigError("ma_window", "must be >= 1");
  if (!(threshold_fraction >= 0.0)) throw ConfigError("threshold_fraction", "must be >= 0");
  if (format != "csv" && format != "json") throw ConfigError("format", "must be 'csv' or 'json'");
  for (auto c : checkpoints) {
    if (c < 1 || c > episodes) throw ConfigError("checkpoints", "episodes must lie in [1, K]");
  }
  for (int v : n_values) if (v < 1) throw ConfigError("sweep.n", "entries must be >= 1");
  for (int v : h_values) if (v < 1) throw ConfigError("sweep.H", "entries must be >= 1");
  for (auto v : k_values) if (v < 1) throw ConfigError("sweep.K", "entries must be >= 1");
  for (auto v : t_values) if (v < 1) throw ConfigError("sweep.T", "entries must be >= 1");
  if (seed_count < 1) throw ConfigError("sweep.seeds", "must be >= 1");
  if (corollary_k < 1) throw ConfigError("sweep.corollary_k", "must be >= 1");
}

int ExperimentConfig::resolved_fine_multiplier(int dimension) const {
  if (fine_multiplier > 0) return fine_multiplier;
  // 16x per dimension in 2D would need a (16n)^4-entry transition tensor.
  return dimension == 1 ? 16 : 4;
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& path, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("wrong type: ") + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw ConfigError(prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown key");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"env", "n", "H", "K", "delta", "seed", "fine_multiplier", "quadrature_points",
                  "transition_points", "reference_transition_points", "start", "ma_window",
                  "threshold_fraction", "checkpoints", "out_dir", "format", "sweep"},
                 "");
  ExperimentConfig cfg;
  if (auto it = j.find("env"); it != j.end()) {
    if (it->is_string()) {
      cfg.env_name = it->get<std::string>();
    } else {
      reject_unknown(*it, {"name", "params"}, "env");
      cfg.env_name = field<std::string>(*it, "name", "env.name", cfg.env_name);
      if (auto p = it->find("params"); p != it->end()) {
        if (!p->is_object()) throw ConfigError("env.params", "must be an object");
        for (auto kv = p->begin(); kv != p->end(); ++kv) {
          if (!kv->is_number()) throw ConfigError("env.params." + kv.key(), "must be a number");
          cfg.env_params[kv.key()] = kv->get<double>();
        }
      }
    }
  }
  cfg.n = field<int>(j, "n", "n", cfg.n);
  cfg.horizon = field<int>(j, "H", "H", cfg.horizon);
  cfg.episodes = field<std::int64_t>(j, "K", "K", cfg.episodes);
  cfg.delta = field<double>(j, "delta", "delta", cfg.delta);
  cfg.seed = field<std::uint64_t>(j, "seed", "seed", cfg.seed);
  cfg.fine_multiplier = field<int>(j, "fine_multiplier", "fine_multiplier", cfg.fine_multiplier);
  cfg.quadrature_points = field<int>(j, "quadrature_points", "quadrature_points", cfg.quadrature_points);
  cfg.transition_points = field<int>(j, "transition_points", "transition_points", cfg.transition_points);
  cfg.reference_transition_points = field<int>(j, "reference_transition_points",
                                               "reference_transition_points",
                                               cfg.reference_transition_points);
  if (auto it = j.find("start"); it != j.end()) {
    reject_unknown(*it, {"mode", "state"}, "start");
    cfg.start_mode = field<std::string>(*it, "mode", "start.mode", cfg.start_mode);
    cfg.fixed_start = field<std::vector<double>>(*it, "state", "start.state", cfg.fixed_start);
  }
  cfg.ma_window = field<int>(j, "ma_window", "ma_window", cfg.ma_window);
  cfg.threshold_fraction = field<double>(j, "threshold_fraction", "threshold_fraction", cfg.threshold_fraction);
  cfg.checkpoints = field<std::vector<std::int64_t>>(j, "checkpoints", "checkpoints", cfg.checkpoints);
  cfg.out_dir = field<std::string>(j, "out_dir", "out_dir", cfg.out_dir);
  cfg.format = field<std::string>(j, "format", "format", cfg.format);
  if (auto it = j.find("sweep"); it != j.end()) {
    reject_unknown(*it, {"n", "H", "K", "T", "seeds", "corollary_k"}, "sweep");
    cfg.n_values = field<std::vector<int>>(*it, "n", "sweep.n", {});
    cfg.h_values = field<std::vector<int>>(*it, "H", "sweep.H", {});
    cfg.k_values = field<std::vector<std::int64_t>>(*it, "K", "sweep.K", {});
    cfg.t_values = field<std::vector<std::int64_t>>(*it, "T", "sweep.T", {});
    cfg.seed_count = field<int>(*it, "seeds", "sweep.seeds", cfg.seed_count);
    cfg.corollary_k = field<int>(*it, "corollary_k", "sweep.corollary_k", cfg.corollary_k);
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json params = json::object();
  for (const auto& [k, v] : cfg.env_params) params[k] = v;
  json j = {
      {"env", {{"name", cfg.env_name}, {"params", params}}},
      {"n", cfg.n},
      {"H", cfg.horizon},
      {"K", cfg.episodes},
      {"delta", cfg.delta},
      {"seed", cfg.seed},
      {"fine_multiplier", cfg.fine_multiplier},
      {"quadrature_points", cfg.quadrature_points},
      {"transition_points", cfg.transition_points},
      {"reference_transition_points", cfg.reference_transition_points},
      {"start", {{"mode", cfg.start_mode}, {"state", cfg.fixed_start}}},
      {"ma_window", cfg.ma_window},
      {"threshold_fraction", cfg.threshold_fraction},
      {"checkpoints", cfg.checkpoints},
      {"format", cfg.format},
  };
  if (!cfg.n_values.empty() || !cfg.h_values.empty() || !cfg.k_values.empty() || !cfg.t_values.empty()) {
    j["sweep"] = {{"n", cfg.n_values}, {"H", cfg.h_values},        {"K", cfg.k_values},
                  {"T", cfg.t_values}, {"seeds", cfg.seed_count}, {"corollary_k", cfg.corollary_k}};
  }
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string revision_string() { return UCBVI_REVISION; }

ContinuousMdp build_env(const ExperimentConfig& cfg) {
  auto params = cfg.env_params;
  // The lower-bound construction defaults to one bump pair per agent cell.
  if (cfg.env_name == "lowerbound" && !params.contains("n_cells")) params["n_cells"] = cfg.n;
  try {
    return make_env(cfg.env_name, params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("env.params", e.what());
  }
}

double regret_upper_bound(double n, double actions, double horizon, double steps, double lipschitz,
                          double alpha, double delta, int dimension) {
  const double states = std::pow(n, dimension);
  const double log_term = std::log(5.0 * horizon * states * actions * steps / delta);
  return 5.0 * lipschitz * std::pow(n, -alpha) * steps +
         30.0 * log_term * std::sqrt(states * actions * steps * horizon) +
         2500.0 * horizon * horizon * states * states * actions * log_term * log_term +
         4.0 * horizon * std::sqrt(steps * log_term);
}

int corollary_n(double steps, int k_smooth) {
  const double x = static_cast<double>(k_smooth) / (2.0 * k_smooth + 1.0);
  return std::max(1, static_cast<int>(std::lround(std::pow(steps, x))));
}

double lower_bound_value(double actions, double horizon, double steps, double lipschitz) {
  return lipschitz * std::sqrt(horizon * actions) * std::pow(steps, 2.0 / 3.0);
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  const auto w = static_cast<std::size_t>(window);
  // Direct window sums: a running sum drifts over long series.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 > w ? i + 1 - w : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log_log_slope: need at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  const double count = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

RegretReport run_experiment(const ExperimentConfig& cfg, const CheckpointFn& on_checkpoint) {
  cfg.validate();
  const ContinuousMdp env = build_env(cfg);
  if (!env.has_density()) throw ConfigError("env.name", "the oracle needs a transition density");
  if (cfg.start_mode == "fixed" && static_cast<int>(cfg.fixed_start.size()) != env.dimension) {
    throw ConfigError("start.state", "dimension does not match the environment");
  }

  const Grid grid(cfg.n, env.dimension, cfg.quadrature_points);
  RewardTable r_agg = aggregate_reward_table(grid, env);
  TransitionTable p_agg = aggregate_transition_matrix(grid, env, cfg.transition_points);
  const double quadrature_dev = p_agg.max_raw_deviation;
  DiscreteMdp agent_mdp = make_discrete_mdp(r_agg, p_agg, cfg.horizon);
  FineReference reference = continuous_reference(env, cfg.n * cfg.resolved_fine_multiplier(env.dimension), cfg.horizon,
                                                 cfg.quadrature_points, cfg.reference_transition_points);
  const double surrogate = reference.surrogate_tolerance;
  RegretDecomposer decomposer(grid, std::move(agent_mdp), std::move(reference));

  AgentState agent = make_agent(grid, std::move(r_agg), {cfg.horizon, cfg.episodes, cfg.delta});
  Rng start_rng(derive_seed(cfg.seed, 0));
  Rng env_rng(derive_seed(cfg.seed, 1));
  std::set<std::int64_t> checkpoints(cfg.checkpoints.begin(), cfg.checkpoints.end());

  RegretReport report;
  report.config = cfg;
  const auto k_total = static_cast<std::size_t>(cfg.episodes);
  report.instantaneous.reserve(k_total);
  report.delta_agg.reserve(k_total);
  report.delta_error.reserve(k_total);

  State start(static_cast<std::size_t>(env.dimension));
  for (std::int64_t k = 1; k <= cfg.episodes; ++k) {
    if (cfg.start_mode == "fixed") {
      start = cfg.fixed_start;
    } else {
      for (auto& v : start) v = start_rng.uniform();
    }
    EpisodeRecord rec = run_episode(agent, env, grid, start, env_rng);
    const RegretSplit split = decomposer.decompose(rec.policy, start);
    report.delta_agg.push_back(split.delta_agg);
    report.delta_error.push_back(split.delta_error);
    report.instantaneous.push_back(split.delta_agg + split.delta_error);
    if (on_checkpoint && checkpoints.contains(k)) on_checkpoint(k, agent);
  }

  report.cumulative.resize(report.instantaneous.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < report.instantaneous.size(); ++i) {
    acc += report.instantaneous[i];
    report.cumulative[i] = acc;
  }
  report.moving_avg = moving_average(report.instantaneous, cfg.ma_window);
  report.threshold = cfg.threshold_fraction * cfg.horizon;
  // The marker needs a full window so a lucky first episode cannot set it.
  for (std::size_t i = static_cast<std::size_t>(cfg.ma_window) - 1; i < report.moving_avg.size(); ++i) {
    if (report.moving_avg[i] <= report.threshold) {
      report.first_below = static_cast<std::int64_t>(i) + 1;
      break;
    }
  }

  const double steps = static_cast<double>(cfg.total_steps());
  report.upper_bound = regret_upper_bound(cfg.n, env.action_count, cfg.horizon, steps,
                                          env.holder.lipschitz, env.holder.alpha, cfg.delta,
                                          env.dimension);
  report.lower_bound = lower_bound_value(env.action_count, cfg.horizon, steps, env.holder.lipschitz);
  report.discretization_bound = 5.0 * env.holder.lipschitz * std::pow(cfg.n, -env.holder.alpha) * steps;
  report.surrogate_tolerance = surrogate;
  report.transition_quadrature_deviation = quadrature_dev;
  report.config_hash = config_hash(cfg);
  report.revision = revision_string();
  return report;
}

namespace {

double median_of(const std::vector<SweepRun>& runs, double (*pick)(const SweepRun&)) {
  std::vector<double> v;
  for (const auto& r : runs)
    if (r.ok) v.push_back(pick(r));
  return median(std::move(v));
}

}  // namespace

double SweepCell::median_first_below() const {
  return median_of(runs, [](const SweepRun& r) {
    return r.first_below ? static_cast<double>(*r.first_below) : std::numeric_limits<double>::infinity();
  });
}

double SweepCell::median_final_moving_average() const {
  return median_of(runs, [](const SweepRun& r) { return r.final_moving_average; });
}

double SweepCell::median_final_cumulative() const {
  return median_of(runs, [](const SweepRun& r) { return r.final_cumulative; });
}

double SweepCell::median_cumulative_at(std::int64_t episode) const {
  std::vector<double> v;
  for (const auto& r : runs) {
    if (r.ok && episode >= 1 && static_cast<std::size_t>(episode) <= r.cumulative.size()) {
      v.push_back(r.cumulative[static_cast<std::size_t>(episode - 1)]);
    }
  }
  return median(std::move(v));
}

SweepResult sweep(const ExperimentConfig& cfg) {
  if (cfg.n_values.empty() && cfg.h_values.empty() && cfg.k_values.empty() && cfg.t_values.empty()) {
    throw ConfigError("sweep", "at least one sweep axis is required");
  }
  cfg.validate();

  SweepResult result;
  const std::vector<int> hs = cfg.h_values.empty() ? std::vector<int>{cfg.horizon} : cfg.h_values;
  if (!cfg.t_values.empty()) {
    for (int h : hs)
      for (auto t : cfg.t_values) {
        SweepCell cell;
        cell.horizon = h;
        cell.n = corollary_n(static_cast<double>(t), cfg.corollary_k);
        cell.episodes = std::max<std::int64_t>(1, t / h);
        cell.steps = cell.episodes * h;
        result.cells.push_back(cell);
      }
  } else {
    const std::vector<int> ns = cfg.n_values.empty() ? std::vector<int>{cfg.n} : cfg.n_values;
    const std::vector<std::int64_t> ks =
        cfg.k_values.empty() ? std::vector<std::int64_t>{cfg.episodes} : cfg.k_values;
    for (int n : ns)
      for (int h : hs)
        for (auto k : ks) result.cells.push_back({n, h, k, k * h, {}});
  }
  for (auto& cell : result.cells) cell.runs.resize(static_cast<std::size_t>(cfg.seed_count));

  const auto jobs = static_cast<std::ptrdiff_t>(result.cells.size() * static_cast<std::size_t>(cfg.seed_count));
  // Each job owns its environment, agent, oracle and streams.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    auto& cell = result.cells[static_cast<std::size_t>(job / cfg.seed_count)];
    auto& run = cell.runs[static_cast<std::size_t>(job % cfg.seed_count)];
    ExperimentConfig c = cfg;
    c.n = cell.n;
    c.horizon = cell.horizon;
    c.episodes = cell.episodes;
    c.seed = cfg.seed + static_cast<std::uint64_t>(job % cfg.seed_count);
    c.checkpoints.clear();
    c.n_values.clear();
    c.h_values.clear();
    c.k_values.clear();
    c.t_values.clear();
    run.seed = c.seed;
    try {
      RegretReport rep = run_experiment(c);
      run.ok = true;
      run.first_below = rep.first_below;
      run.final_moving_average = rep.final_moving_average();
      run.final_cumulative = rep.final_cumulative();
      run.cumulative = std::move(rep.cumulative);
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
  }

  if (!cfg.t_values.empty()) {
    for (int h : hs) {
      std::vector<double> ts, regrets;
      for (const auto& cell : result.cells) {
        if (cell.horizon != h) continue;
        const double m = cell.median_final_cumulative();
        if (std::isfinite(m) && m > 0.0) {
          ts.push_back(static_cast<double>(cell.steps));
          regrets.push_back(m);
        }
      }
      if (ts.size() >= 2) result.t_slopes[h] = log_log_slope(ts, regrets);
    }
  }
  return result;
}

void write_report_csv(std::ostream& out, const RegretReport& report) {
  out << "episode,inst_regret,cum_regret,delta_agg,delta_error,ma_regret\n";
  for (std::size_t i = 0; i < report.instantaneous.size(); ++i) {
    out << (i + 1) << ',' << format_double(report.instantaneous[i]) << ','
        << format_double(report.cumulative[i]) << ',' << format_double(report.delta_agg[i]) << ','
        << format_double(report.delta_error[i]) << ',' << format_double(report.moving_avg[i]) << '\n';
  }
}

json report_summary(const RegretReport& report) {
  double error_sum = 0.0;
  for (double v : report.delta_error) error_sum += v;
  json j = {
      {"config", config_to_json(report.config)},
      {"metadata",
       {{"config_hash", report.config_hash}, {"seed", report.config.seed}, {"revision", report.revision}}},
      {"episodes", report.instantaneous.size()},
      {"final_cumulative_regret", report.final_cumulative()},
      {"final_moving_average", report.final_moving_average()},
      {"threshold", report.threshold},
      {"first_below_threshold", report.first_below ? json(*report.first_below) : json(nullptr)},
      {"delta_error_sum", error_sum},
      {"discretization_bound", report.discretization_bound},
      {"surrogate_tolerance_per_episode", report.surrogate_tolerance},
      {"upper_bound", report.upper_bound},
      {"lower_bound", report.lower_bound},
      {"transition_quadrature_deviation", report.transition_quadrature_deviation},
  };
  return j;
}

json sweep_summary(const SweepResult& result) {
  json cells = json::array();
  for (const auto& cell : result.cells) {
    json runs = json::array();
    for (const auto& r : cell.runs) {
      json jr = {{"seed", r.seed}, {"ok", r.ok}};
      if (r.ok) {
        jr["first_below_threshold"] = r.first_below ? json(*r.first_below) : json(nullptr);
        jr["final_moving_average"] = r.final_moving_average;
        jr["final_cumulative_regret"] = r.final_cumulative;
      } else {
        jr["error"] = r.error;
      }
      runs.push_back(jr);
    }
    const double fb = cell.median_first_below();
    cells.push_back({{"n", cell.n},
                     {"H", cell.horizon},
                     {"K", cell.episodes},
                     {"T", cell.steps},
                     {"median_first_below_threshold", std::isfinite(fb) ? json(fb) : json(nullptr)},
                     {"median_final_moving_average", cell.median_final_moving_average()},
                     {"median_final_cumulative_regret", cell.median_final_cumulative()},
                     {"runs", runs}});
  }
  json slopes = json::object();
  for (const auto& [h, s] : result.t_slopes) slopes[std::to_string(h)] = s;
  return {{"cells", cells}, {"t_slopes", slopes}};
}

}  // namespace ucbvi
