//
// Copyright 2026 The Regen Concentration Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef REGEN_HARNESS_CLI_HPP_
#define REGEN_HARNESS_CLI_HPP_

// The `regen` command line. Exit codes: 0 success, 1 invalid input or
// configuration, 2 a bound failed to dominate its estimates.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "regen/harness/config.hpp"
#include "regen/harness/experiment.hpp"
#include "regen/harness/report.hpp"

namespace regen::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotDominated = 2;

struct CliOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::optional<unsigned> threads;
  std::string out;
  std::string format;
};

inline void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

inline ExperimentConfig load_with_overrides(const CliOptions& o) {
  if (o.config.empty()) throw ValidationError("--config is required");
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.reps) cfg.reps = *o.reps;
  if (o.threads) cfg.threads = *o.threads;
  return cfg;
}

inline std::string pick_format(const CliOptions& o, const char* fallback) {
  const std::string f = o.format.empty() ? fallback : o.format;
  if (f != "csv" && f != "json") throw ValidationError("--format must be csv or json");
  return f;
}

inline int cmd_simulate(const CliOptions& o, bool reps_given) {
  const ExperimentConfig cfg = load_with_overrides(o);
  if (pick_format(o, "csv") != "csv") throw ValidationError("simulate writes csv only");
  const std::int64_t count = reps_given ? cfg.reps : 1;
  if (cfg.n < 1) throw ValidationError("config needs n >= 1");
  const AnySetup setup = build_setup(cfg);
  std::string text = "step,state_index,flag\n";
  std::visit(
      [&](const auto& s) {
        for (std::int64_t r = 0; r < count; ++r) {
          const auto traj = simulate_split(s.kernel, static_cast<std::size_t>(cfg.n),
                                           derive_seed(cfg.seed, static_cast<std::uint64_t>(r),
                                                       Stream::kMain));
          for (std::size_t i = 0; i < traj.states.size(); ++i) {
            text += std::to_string(i + 1) + "," +
                    std::to_string(s.kernel.index_of(traj.states[i])) + "," +
                    std::to_string(static_cast<int>(traj.flags[i])) + "\n";
          }
        }
      },
      setup);
  write_output(o.out, text);
  return kExitOk;
}

inline int cmd_estimate(const CliOptions& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const std::string format = pick_format(o, "json");
  const AnySetup setup = build_setup(cfg);
  const EstimateReport rep = std::visit(
      [&](const auto& s) {
        if (cfg.trajectory_file) {
          return run_estimate_external(cfg, s, read_trajectories(*cfg.trajectory_file));
        }
        return run_estimate(cfg, s);
      },
      setup);
  write_output(o.out, format == "json" ? estimate_json(rep).dump(2) + "\n" : estimate_csv(rep));
  return kExitOk;
}

inline void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

inline int cmd_verify(const CliOptions& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const std::string format = pick_format(o, "csv");
  const AnySetup setup = build_setup(cfg);
  const TailReport rep =
      std::visit([&](const auto& s) { return run_tail_experiment(cfg, s); }, setup);
  print_warnings(rep.warnings);
  write_output(o.out, format == "json" ? tail_json(rep).dump(2) + "\n" : tail_csv(rep));
  return rep.passed ? kExitOk : kExitNotDominated;
}

inline int cmd_calibrate(const CliOptions& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const std::string format = pick_format(o, "csv");
  const AnySetup setup = build_setup(cfg);
  const CalibrationReport rep =
      std::visit([&](const auto& s) { return run_calibration(cfg, s); }, setup);
  std::cerr << rep.knob << " = " << fmt(rep.constant) << "\n";
  write_output(o.out,
               format == "json" ? calibration_json(rep).dump(2) + "\n" : calibration_csv(rep));
  return rep.validation_passed ? kExitOk : kExitNotDominated;
}

inline int cmd_truncation(const CliOptions& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  if (pick_format(o, "json") != "json") throw ValidationError("truncation writes json only");
  const AnySetup setup = build_setup(cfg);
  const std::int64_t reps = o.reps ? *o.reps : cfg.pilot_reps;
  const TruncationReport rep =
      std::visit([&](const auto& s) { return run_truncation(cfg, s, reps); }, setup);
  json j = truncation_json(rep);
  j["experiment_id"] = cfg.experiment_id;
  j["seeds"] = streams_json(cfg.seed);
  write_output(o.out, j.dump(2) + "\n");
  return rep.exceedance_ok && rep.f2_ok ? kExitOk : kExitNotDominated;
}

inline int cmd_log_necessity(const CliOptions& o) {
  std::vector<int> rs = {6, 8, 10};
  std::vector<double> betas = {1.0, 0.5};
  std::int64_t reps = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  if (!o.config.empty()) {
    const ExperimentConfig cfg = load_with_overrides(o);
    rs = cfg.r_values;
    betas = cfg.betas;
    reps = cfg.reps;
    seed = cfg.seed;
    threads = cfg.threads;
  } else {
    if (o.seed) seed = *o.seed;
    if (o.reps) reps = *o.reps;
    if (o.threads) threads = *o.threads;
  }
  const std::string format = pick_format(o, "csv");
  const LogNecessityReport rep = run_lognecessity_experiment(rs, betas, reps, seed, threads);
  write_output(o.out,
               format == "json" ? lognecessity_json(rep).dump(2) + "\n" : lognecessity_csv(rep));
  return rep.levy_all_ok && rep.max_all_ok ? kExitOk : kExitNotDominated;
}

inline int cmd_bounded_difference(const CliOptions& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const std::string format = pick_format(o, "csv");
  const AnySetup setup = build_setup(cfg);
  const TailReport rep = std::visit(
      [&](const auto& s) { return run_bounded_difference_experiment(cfg, s); }, setup);
  print_warnings(rep.warnings);
  write_output(o.out, format == "json" ? tail_json(rep).dump(2) + "\n" : tail_csv(rep));
  return rep.passed ? kExitOk : kExitNotDominated;
}

// Command a config is meant for, judged from its keys.
inline std::string default_command(const ExperimentConfig& cfg, bool has_log_block) {
  if (has_log_block) return "log-necessity";
  if (!cfg.bound) return "estimate";
  if (*cfg.bound == BoundId::kBoundedDifference && cfg.train_grid.empty()) {
    return "bounded-difference";
  }
  if (!cfg.train_grid.empty()) return "calibrate";
  return "verify-bound";
}

inline int cmd_run(const CliOptions& o) {
  if (o.config.empty()) throw ValidationError("--config is required");
  const json raw = read_json_file(o.config);
  const ExperimentConfig cfg = parse_config(raw);
  const std::string cmd = default_command(cfg, raw.contains("log_necessity"));
  if (cmd == "log-necessity") return cmd_log_necessity(o);
  if (cmd == "estimate") return cmd_estimate(o);
  if (cmd == "bounded-difference") return cmd_bounded_difference(o);
  if (cmd == "calibrate") return cmd_calibrate(o);
  return cmd_verify(o);
}

inline void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--config", o.config, "experiment config (JSON)");
  sub->add_option("--seed", o.seed, "base seed, overrides the config");
  sub->add_option("--reps", o.reps, "replications, overrides the config");
  sub->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  sub->add_option("--out", o.out, "output path (default stdout)");
  sub->add_option("--format", o.format, "csv or json");
}

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Regeneration-based concentration checks for Markov chains"};
  app.require_subcommand(1);
  CliOptions o;
  CLI::App* simulate = app.add_subcommand("simulate", "dump a split-chain trajectory");
  CLI::App* estimate = app.add_subcommand("estimate", "regeneration block statistics");
  CLI::App* verify = app.add_subcommand("verify-bound", "tail experiment against a bound");
  CLI::App* calibrate = app.add_subcommand("calibrate", "fit a bound constant");
  CLI::App* truncation = app.add_subcommand("truncation", "truncation-level diagnostics");
  CLI::App* run = app.add_subcommand("run", "whichever of the above the config describes");
  CLI::App* experiment = app.add_subcommand("experiment", "named experiments");
  experiment->require_subcommand(1);
  CLI::App* lognec = experiment->add_subcommand("log-necessity", "log-factor experiment");
  CLI::App* bdiff =
      experiment->add_subcommand("bounded-difference", "symmetric statistic tail experiment");
  for (CLI::App* sub : {simulate, estimate, verify, calibrate, truncation, run, lognec, bdiff}) {
    add_common(sub, o);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  const auto start = std::chrono::steady_clock::now();
  int code = kExitError;
  try {
    if (*simulate) code = cmd_simulate(o, simulate->count("--reps") > 0);
    if (*estimate) code = cmd_estimate(o);
    if (*verify) code = cmd_verify(o);
    if (*calibrate) code = cmd_calibrate(o);
    if (*truncation) code = cmd_truncation(o);
    if (*lognec) code = cmd_log_necessity(o);
    if (*bdiff) code = cmd_bounded_difference(o);
    if (*run) code = cmd_run(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "wall time: %.2f s\n", secs);
  std::cerr << buf;
  return code;
}

}  // namespace regen::harness

#endif  // REGEN_HARNESS_CLI_HPP_
