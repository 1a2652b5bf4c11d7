// Command-line front end: run, sweep, bounds, oracle, check-holder.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucbvi/agent.hpp"
#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"
#include "ucbvi/harness.hpp"
#include "ucbvi/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ucbvi;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> env;
  std::vector<std::string> params;
  std::optional<int> n;
  std::optional<int> horizon;
  std::optional<std::int64_t> episodes;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::optional<int> fine_multiplier;
  std::optional<int> quadrature_points;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::vector<std::int64_t> checkpoints;

  std::vector<int> sweep_n;
  std::vector<int> sweep_h;
  std::vector<std::int64_t> sweep_k;
  std::vector<std::int64_t> sweep_t;
  std::optional<int> seeds;
  std::optional<int> corollary_k;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("-c,--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--env", f.env, "environment: sine1d, sine2d, lowerbound");
  app->add_option("--param", f.params, "environment parameter key=value (repeatable)");
  app->add_option("--n", f.n, "cells per dimension");
  app->add_option("--H", f.horizon, "horizon");
  app->add_option("--K", f.episodes, "episodes");
  app->add_option("--delta", f.delta, "confidence parameter");
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--fine-multiplier", f.fine_multiplier, "reference grid refinement factor");
  app->add_option("--quadrature-points", f.quadrature_points, "midpoint sub-samples per cell and dimension");
  app->add_option("--out-dir", f.out_dir, "output directory (stdout when omitted)");
  app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--checkpoint", f.checkpoints, "episodes at which to snapshot Q/V tables");
}

void add_sweep_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--sweep-n", f.sweep_n, "n values");
  app->add_option("--sweep-H", f.sweep_h, "horizon values");
  app->add_option("--sweep-K", f.sweep_k, "episode counts");
  app->add_option("--sweep-T", f.sweep_t, "step budgets; n follows the corollary rule");
  app->add_option("--seeds", f.seeds, "seeds per sweep cell");
  app->add_option("--corollary-k", f.corollary_k, "smoothness index k for n = T^(k/(2k+1))");
}

ExperimentConfig resolve_config(const ConfigFlags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
  }
  if (f.env || !f.params.empty()) {
    if (!j.contains("env") || j["env"].is_string()) {
      json env = {{"name", j.contains("env") ? j["env"] : json("sine1d")}, {"params", json::object()}};
      j["env"] = env;
    }
    if (f.env) j["env"]["name"] = *f.env;
    for (const auto& kv : f.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("env.params", "expected key=value, got '" + kv + "'");
      try {
        j["env"]["params"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("env.params." + kv.substr(0, eq), "value is not a number");
      }
    }
  }
  if (f.n) j["n"] = *f.n;
  if (f.horizon) j["H"] = *f.horizon;
  if (f.episodes) j["K"] = *f.episodes;
  if (f.delta) j["delta"] = *f.delta;
  if (f.seed) j["seed"] = *f.seed;
  if (f.fine_multiplier) j["fine_multiplier"] = *f.fine_multiplier;
  if (f.quadrature_points) j["quadrature_points"] = *f.quadrature_points;
  if (f.out_dir) j["out_dir"] = *f.out_dir;
  if (f.format) j["format"] = *f.format;
  if (!f.checkpoints.empty()) j["checkpoints"] = f.checkpoints;
  auto set_sweep = [&](const char* key, const json& value) {
    if (!j.contains("sweep")) j["sweep"] = json::object();
    j["sweep"][key] = value;
  };
  if (!f.sweep_n.empty()) set_sweep("n", f.sweep_n);
  if (!f.sweep_h.empty()) set_sweep("H", f.sweep_h);
  if (!f.sweep_k.empty()) set_sweep("K", f.sweep_k);
  if (!f.sweep_t.empty()) set_sweep("T", f.sweep_t);
  if (f.seeds) set_sweep("seeds", *f.seeds);
  if (f.corollary_k) set_sweep("corollary_k", *f.corollary_k);

  ExperimentConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
  return out;
}

json report_json(const RegretReport& report) {
  json rows = json::array();
  for (std::size_t i = 0; i < report.instantaneous.size(); ++i) {
    rows.push_back({{"episode", i + 1},
                    {"inst_regret", report.instantaneous[i]},
                    {"cum_regret", report.cumulative[i]},
                    {"delta_agg", report.delta_agg[i]},
                    {"delta_error", report.delta_error[i]},
                    {"ma_regret", report.moving_avg[i]}});
  }
  json j = report_summary(report);
  j["series"] = rows;
  return j;
}

int cmd_run(const ConfigFlags& flags) {
  const ExperimentConfig cfg = resolve_config(flags);
  CheckpointFn snapshot;
  if (!cfg.out_dir.empty()) {
    snapshot = [&cfg](std::int64_t episode, const AgentState& st) {
      auto out = open_output(cfg.out_dir, "qv_episode_" + std::to_string(episode) + ".csv");
      write_agent_snapshot(out, st);
    };
  }
  const RegretReport report = run_experiment(cfg, snapshot);
  if (cfg.out_dir.empty()) {
    if (cfg.format == "csv") {
      write_report_csv(std::cout, report);
    } else {
      std::cout << report_json(report).dump(2) << '\n';
    }
    return 0;
  }
  if (cfg.format == "csv") {
    auto out = open_output(cfg.out_dir, "regret.csv");
    write_report_csv(out, report);
  } else {
    auto out = open_output(cfg.out_dir, "regret.json");
    out << report_json(report).dump(2) << '\n';
  }
  auto summary = open_output(cfg.out_dir, "summary.json");
  summary << report_summary(report).dump(2) << '\n';
  return 0;
}

int cmd_sweep(const ConfigFlags& flags) {
  const ExperimentConfig cfg = resolve_config(flags);
  const SweepResult result = sweep(cfg);
  json summary = sweep_summary(result);
  summary["config"] = config_to_json(cfg);
  if (cfg.out_dir.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    auto out = open_output(cfg.out_dir, "sweep_summary.json");
    out << summary.dump(2) << '\n';
  }
  bool any_failed = false;
  for (const auto& cell : result.cells)
    for (const auto& run : cell.runs) any_failed = any_failed || !run.ok;
  return any_failed ? 3 : 0;
}

struct BoundsFlags {
  double n = 1, actions = 2, horizon = 1, steps = 1, lipschitz = 1, alpha = 1, delta = 0.05;
  int dimension = 1;
  int k = 1;
};

int cmd_bounds(const BoundsFlags& b) {
  if (!(b.delta > 0.0 && b.delta < 1.0)) throw ConfigError("delta", "must lie in (0,1)");
  if (b.n < 1 || b.actions < 1 || b.horizon < 1 || b.steps < 1) {
    throw ConfigError("bounds", "n, A, H and T must be >= 1");
  }
  json j = {
      {"upper_bound", regret_upper_bound(b.n, b.actions, b.horizon, b.steps, b.lipschitz, b.alpha,
                                         b.delta, b.dimension)},
      {"corollary_n", corollary_n(b.steps, b.k)},
      {"lower_bound", lower_bound_value(b.actions, b.horizon, b.steps, b.lipschitz)},
  };
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const ConfigFlags& flags, bool fine, bool dump_model) {
  const ExperimentConfig cfg = resolve_config(flags);
  const ContinuousMdp env = build_env(cfg);
  const int n = fine ? cfg.n * cfg.resolved_fine_multiplier(env.dimension) : cfg.n;
  const Grid grid(n, env.dimension, cfg.quadrature_points);
  const RewardTable rewards = aggregate_reward_table(grid, env);
  const TransitionTable transitions =
      aggregate_transition_matrix(grid, env, fine ? cfg.reference_transition_points : cfg.transition_points);
  const DiscreteMdp mdp = make_discrete_mdp(rewards, transitions, cfg.horizon);
  const ValueTables values = optimal_values(mdp);
  if (cfg.out_dir.empty()) {
    write_value_csv(std::cout, values);
    return 0;
  }
  auto out = open_output(cfg.out_dir, "values.csv");
  write_value_csv(out, values);
  if (dump_model) {
    auto r = open_output(cfg.out_dir, "r_agg.csv");
    write_reward_csv(r, rewards);
    auto p = open_output(cfg.out_dir, "p_agg.csv");
    write_transition_csv(p, transitions);
  }
  return 0;
}

int cmd_check_holder(const std::string& env_name, const std::vector<std::string>& params,
                     double alpha, int probes, std::uint64_t seed) {
  std::map<std::string, double> p;
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("env.params", "expected key=value, got '" + kv + "'");
    try {
      p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("env.params." + kv.substr(0, eq), "value is not a number");
    }
  }
  ContinuousMdp env;
  try {
    env = make_env(env_name, p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("env", e.what());
  }
  const HolderReport rep = estimate_holder(env, alpha, probes, seed);
  json j = {{"env", env.name},
            {"declared_L", env.holder.lipschitz},
            {"declared_alpha", env.holder.alpha},
            {"alpha_assumed", rep.alpha_assumed},
            {"reward_L_est", rep.reward_L_est},
            {"transition_L_est", rep.transition_L_est ? json(*rep.transition_L_est) : json(nullptr)},
            {"max_violation", rep.max_violation},
            {"declared_constants_hold", rep.max_violation <= 0.0}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int emit_error(const std::string& kind, const std::string& message, const std::string& field = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << '\n';
  return kind == "config" || kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic value iteration on discretized continuous-state MDPs"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "single experiment; per-episode regret series");
  add_config_flags(run, run_flags);

  ConfigFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "cross product of n/H/K (or T) over seeds");
  add_config_flags(sweep_cmd, sweep_flags);
  add_sweep_flags(sweep_cmd, sweep_flags);

  BoundsFlags bounds_flags;
  auto* bounds = app.add_subcommand("bounds", "evaluate the upper bound, corollary n and lower bound");
  bounds->add_option("--n", bounds_flags.n, "cells per dimension");
  bounds->add_option("--A", bounds_flags.actions, "actions");
  bounds->add_option("--H", bounds_flags.horizon, "horizon");
  bounds->add_option("--T", bounds_flags.steps, "total steps");
  bounds->add_option("--L", bounds_flags.lipschitz, "Hölder constant");
  bounds->add_option("--alpha", bounds_flags.alpha, "Hölder exponent");
  bounds->add_option("--delta", bounds_flags.delta, "confidence parameter");
  bounds->add_option("--dimension", bounds_flags.dimension, "state dimension");
  bounds->add_option("--k", bounds_flags.k, "smoothness index for the corollary rule");

  ConfigFlags oracle_flags;
  bool oracle_fine = false;
  bool oracle_dump = false;
  auto* oracle = app.add_subcommand("oracle", "optimal value tables of the aggregated MDP");
  add_config_flags(oracle, oracle_flags);
  oracle->add_flag("--fine", oracle_fine, "use the refined reference grid");
  oracle->add_flag("--dump-model", oracle_dump, "also write r_agg.csv and p_agg.csv to --out-dir");

  std::string holder_env = "sine1d";
  std::vector<std::string> holder_params;
  double holder_alpha = 1.0;
  int holder_probes = 2000;
  std::uint64_t holder_seed = 1;
  auto* holder = app.add_subcommand("check-holder", "audit the declared Hölder constants");
  holder->add_option("--env", holder_env, "environment");
  holder->add_option("--param", holder_params, "environment parameter key=value");
  holder->add_option("--alpha", holder_alpha, "exponent to test");
  holder->add_option("--probes", holder_probes, "probe pairs");
  holder->add_option("--seed", holder_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep_cmd) return cmd_sweep(sweep_flags);
    if (*bounds) return cmd_bounds(bounds_flags);
    if (*oracle) return cmd_oracle(oracle_flags, oracle_fine, oracle_dump);
    if (*holder) return cmd_check_holder(holder_env, holder_params, holder_alpha, holder_probes, holder_seed);
  } catch (const ConfigError& e) {
    return emit_error("config", e.what(), e.field());
  } catch (const std::exception& e) {
    return emit_error("runtime", e.what());
  }
  return 0;
}
