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

#ifndef REGEN_HARNESS_EXPERIMENT_HPP_
#define REGEN_HARNESS_EXPERIMENT_HPP_

// Monte Carlo experiments: tail checks of a bound, constant calibration,
// block estimates, truncation diagnostics, the log-factor experiment and the
// bounded-difference experiment. Replication i always draws from
// derive_seed(seed, i, stream), so results do not depend on the thread count.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "regen/bounds.hpp"
#include "regen/calibration.hpp"
#include "regen/chain.hpp"
#include "regen/estimators.hpp"
#include "regen/harness/config.hpp"
#include "regen/parallel.hpp"
#include "regen/regeneration.hpp"
#include "regen/rng.hpp"
#include "regen/stats.hpp"
#include "regen/zoo.hpp"

namespace regen::harness {

inline constexpr std::int64_t kMinTailReps = 10000;
// Trajectories whose complete blocks feed the automatic parameters.
inline constexpr std::int64_t kBlockPilotCap = 2000;

enum class Statistic {
  kSupAbsSum,
  kSupSum,
  kAbsSum,
  kDistinctStates,
  kOccupation,
  kInitialBlockAbs,
  kRemainderAbs,
  kRemainderLength,
  kBlockCount,
  kMaxSup,
};

struct StatisticInfo {
  Statistic id;
  const char* name;
};

inline constexpr StatisticInfo kStatistics[] = {
    {Statistic::kSupAbsSum, "sup_abs_sum"},
    {Statistic::kSupSum, "sup_sum"},
    {Statistic::kAbsSum, "abs_sum"},
    {Statistic::kDistinctStates, "distinct_states"},
    {Statistic::kOccupation, "occupation"},
    {Statistic::kInitialBlockAbs, "initial_block_abs"},
    {Statistic::kRemainderAbs, "remainder_abs"},
    {Statistic::kRemainderLength, "remainder_length"},
    {Statistic::kBlockCount, "block_count"},
    {Statistic::kMaxSup, "max_sup"},
};

inline Statistic statistic_from_name(const std::string& name) {
  for (const StatisticInfo& s : kStatistics) {
    if (name == s.name) return s.id;
  }
  std::string msg = "unknown statistic '" + name + "'; available:";
  for (const StatisticInfo& s : kStatistics) msg += std::string(" ") + s.name;
  throw ValidationError(msg);
}

inline std::string statistic_name(Statistic id) {
  for (const StatisticInfo& s : kStatistics) {
    if (s.id == id) return s.name;
  }
  throw InternalError("statistic missing from table");
}

inline Statistic default_statistic(BoundId id) {
  switch (id) {
    case BoundId::kBernsteinPsi1:
    case BoundId::kMarkovSum:
    case BoundId::kOrliczTail:
      return Statistic::kAbsSum;
    case BoundId::kBoundedDifference:
      return Statistic::kDistinctStates;
    case BoundId::kInitialBlock:
      return Statistic::kInitialBlockAbs;
    case BoundId::kLastBlock:
      return Statistic::kRemainderAbs;
    case BoundId::kNOvershoot:
      return Statistic::kBlockCount;
    default:
      return Statistic::kSupAbsSum;
  }
}

inline bool needs_indices(Statistic s) {
  return s == Statistic::kDistinctStates || s == Statistic::kOccupation;
}

inline double distinct_count(std::vector<std::uint64_t> idx) {
  std::sort(idx.begin(), idx.end());
  return static_cast<double>(std::unique(idx.begin(), idx.end()) - idx.begin());
}

inline double occupation_count(const std::vector<std::uint64_t>& idx,
                               std::uint64_t target) {
  return static_cast<double>(std::count(idx.begin(), idx.end(), target));
}

struct PathRecord {
  PathSummary summary;
  double statistic = 0.0;
};

// Simulates one trajectory of length n and summarizes it.
template <class K>
PathRecord simulate_record(const Setup<K>& setup, std::int64_t n,
                           std::uint64_t seed, Statistic stat,
                           std::optional<std::size_t> occupation_state,
                           bool keep_blocks) {
  const auto traj = simulate_split(setup.kernel, static_cast<std::size_t>(n), seed);
  const RegenDecomposition d = decompose(traj.flags, setup.m);
  PathRecord rec;
  rec.summary = summarize_path<typename K::State>(traj.states, d, setup.cls, keep_blocks);
  const PathSummary& s = rec.summary;
  switch (stat) {
    case Statistic::kSupAbsSum:
      rec.statistic = sup_abs(s.total);
      break;
    case Statistic::kSupSum:
      rec.statistic = *std::max_element(s.total.begin(), s.total.end());
      break;
    case Statistic::kAbsSum:
      rec.statistic = std::abs(s.total.front());
      break;
    case Statistic::kDistinctStates:
    case Statistic::kOccupation: {
      std::vector<std::uint64_t> idx;
      idx.reserve(traj.states.size());
      for (const auto& x : traj.states) idx.push_back(setup.kernel.index_of(x));
      if (stat == Statistic::kDistinctStates) {
        rec.statistic = distinct_count(std::move(idx));
      } else {
        if (!occupation_state) {
          throw ValidationError("statistic 'occupation' needs occupation_state");
        }
        rec.statistic = occupation_count(idx, *occupation_state);
      }
      break;
    }
    case Statistic::kInitialBlockAbs:
      rec.statistic = sup_abs(s.initial);
      break;
    case Statistic::kRemainderAbs:
      rec.statistic = sup_abs(s.remainder);
      break;
    case Statistic::kRemainderLength:
      rec.statistic = static_cast<double>(s.remainder_length);
      break;
    case Statistic::kBlockCount:
      rec.statistic = static_cast<double>(s.n_blocks);
      break;
    case Statistic::kMaxSup:
      rec.statistic = s.max_sup;
      break;
  }
  return rec;
}

// Bound parameters after "auto"/"exact" entries have been filled in.
struct ResolvedParams {
  BoundParams params;
  // Where each value came from: config, pilot, exact, class or run.
  json sources = json::object();
};

struct EventSpec {
  enum class Kind { kAtLeast, kAtMost, kAbsDeviationAtLeast, kGreaterThan };
  Kind kind = Kind::kAtLeast;
  std::function<double(double)> level;
  double center = 0.0;

  bool occurs(double stat, double t) const {
    switch (kind) {
      case Kind::kAtLeast:
        return stat >= level(t);
      case Kind::kAtMost:
        return stat <= level(t);
      case Kind::kAbsDeviationAtLeast:
        return std::abs(stat - center) >= t;
      case Kind::kGreaterThan:
        return stat > level(t);
    }
    return false;
  }
};

inline EventSpec event_for(BoundId id, Side side, const BoundParams& p,
                           const ConstantLedger& ledger) {
  EventSpec ev;
  auto need_ez = [&] { return BoundParams::require(p.ez, "ez"); };
  auto need_eta = [&] { return BoundParams::require(p.eta, "eta"); };
  const bool upper = side == Side::kUpper;
  switch (id) {
    case BoundId::kTalagrandBennett:
    case BoundId::kTalagrandBernstein: {
      const double ez = need_ez();
      ev.level = [ez](double t) { return ez + t; };
      break;
    }
    case BoundId::kMassart:
      ev.kind = upper ? EventSpec::Kind::kAtLeast : EventSpec::Kind::kAtMost;
      ev.level = [p, side](double t) { return massart_threshold(p, t, side); };
      break;
    case BoundId::kKleinRio: {
      const double ez = need_ez();
      ev.kind = upper ? EventSpec::Kind::kAtLeast : EventSpec::Kind::kAtMost;
      ev.level = [ez, upper](double t) { return upper ? ez + t : ez - t; };
      break;
    }
    case BoundId::kCltType:
    case BoundId::kUnboundedClass: {
      const double ez = need_ez();
      const double eta = need_eta();
      ev.kind = upper ? EventSpec::Kind::kAtLeast : EventSpec::Kind::kAtMost;
      ev.level = [ez, eta, upper](double t) {
        return upper ? (1.0 + eta) * ez + t : (1.0 - eta) * ez - t;
      };
      break;
    }
    case BoundId::kMarkovEmpirical: {
      const double level = ledger.get("K_markov_empirical_mean") * need_ez();
      ev.level = [level](double t) { return level + t; };
      break;
    }
    case BoundId::kBoundedDifference:
      ev.kind = EventSpec::Kind::kAbsDeviationAtLeast;
      ev.center = need_ez();
      ev.level = [](double t) { return t; };
      break;
    case BoundId::kNOvershoot: {
      const double n = static_cast<double>(BoundParams::require(p.n, "n"));
      const double m = static_cast<double>(BoundParams::require(p.m, "m"));
      const double et2 = BoundParams::require(p.et2, "et2");
      const double cut = std::floor(3.0 * n / (m * et2));
      ev.kind = EventSpec::Kind::kGreaterThan;
      ev.level = [cut](double) { return cut; };
      break;
    }
    default:
      ev.level = [](double t) { return t; };
      break;
  }
  return ev;
}

namespace detail {

inline bool is_auto(const json& v) { return v.is_string() && v.get<std::string>() == "auto"; }
inline bool is_exact(const json& v) { return v.is_string() && v.get<std::string>() == "exact"; }

inline const std::set<std::string>& known_param_keys() {
  static const std::set<std::string> keys = {
      "a",     "sigma_sq", "v_strong", "ez",  "eta",    "slack_delta",
      "alpha", "max_norm", "tau",      "et2", "var_z1", "lipschitz"};
  return keys;
}

}  // namespace detail

// Fills in bound parameters. "auto" entries come from an independent pilot
// batch (Stream::kPilot) and, for block quantities, from up to 2000 further
// trajectories (Stream::kAuxiliary); "exact" entries from closed forms the
// source knows.
template <class K>
ResolvedParams resolve_params(const ExperimentConfig& cfg, const Setup<K>& setup,
                              BoundId id, Statistic stat) {
  ResolvedParams out;
  BoundParams& p = out.params;
  const json& j = cfg.params.is_null() ? json::object() : cfg.params;
  if (!j.is_object()) throw ValidationError("params must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!detail::known_param_keys().count(key)) {
      throw ValidationError("unknown parameter '" + key + "'");
    }
  }
  if (cfg.n < 1) throw ValidationError("config needs n >= 1");
  p.n = cfg.n;
  out.sources["n"] = "config";
  p.m = setup.m;
  out.sources["m"] = "source";

  bool want_pilot = false;
  bool want_blocks = false;
  for (const auto& [key, v] : j.items()) {
    if (!detail::is_auto(v)) continue;
    if (key == "et2" || key == "var_z1" || key == "tau" ||
        (key == "sigma_sq" && id == BoundId::kMarkovEmpirical)) {
      want_blocks = true;
    } else {
      want_pilot = true;
    }
  }

  std::vector<PathRecord> pilot;
  if (want_pilot) {
    pilot = parallel_map(static_cast<std::size_t>(cfg.pilot_reps), cfg.threads,
                         [&](std::size_t i) {
                           return simulate_record(setup, cfg.n,
                                                  derive_seed(cfg.seed, i, Stream::kPilot),
                                                  stat, cfg.occupation_state, false);
                         });
  }
  std::optional<BlockStats> blocks;
  std::vector<double> t1s;
  std::vector<double> gaps;
  if (want_blocks) {
    const auto count = static_cast<std::size_t>(std::min(cfg.pilot_reps, kBlockPilotCap));
    const std::vector<PathRecord> recs =
        parallel_map(count, cfg.threads, [&](std::size_t i) {
          return simulate_record(setup, cfg.n,
                                 derive_seed(cfg.seed, i, Stream::kAuxiliary), stat,
                                 cfg.occupation_state, true);
        });
    std::vector<PathSummary> sums;
    for (const PathRecord& r : recs) {
      sums.push_back(r.summary);
      if (r.summary.t1 > 0) t1s.push_back(static_cast<double>(r.summary.t1));
      for (std::int64_t g : r.summary.gaps) gaps.push_back(static_cast<double>(g));
    }
    blocks = block_statistics(sums, setup.cls.names);
  }

  auto number = [&](const char* key, std::optional<double>& field) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number()) {
      field = v.get<double>();
      out.sources[key] = "config";
    }
  };
  for (const char* key : {"a", "sigma_sq", "v_strong", "ez", "eta", "slack_delta",
                          "max_norm", "tau", "et2", "var_z1", "lipschitz"}) {
    std::optional<double>* field = nullptr;
    const std::string k = key;
    if (k == "a") field = &p.a;
    if (k == "sigma_sq") field = &p.sigma_sq;
    if (k == "v_strong") field = &p.v_strong;
    if (k == "ez") field = &p.ez;
    if (k == "eta") field = &p.eta;
    if (k == "slack_delta") field = &p.slack_delta;
    if (k == "max_norm") field = &p.max_norm;
    if (k == "tau") field = &p.tau;
    if (k == "et2") field = &p.et2;
    if (k == "var_z1") field = &p.var_z1;
    if (k == "lipschitz") field = &p.lipschitz;
    number(key, *field);
    if (!j.contains(key) || j.at(key).is_number()) continue;
    const json& v = j.at(key);
    const bool a = detail::is_auto(v);
    const bool e = detail::is_exact(v);
    if (!a && !e) {
      throw ValidationError(std::string("parameter '") + key +
                            "' must be a number, \"auto\" or \"exact\"");
    }
    const std::size_t nstat = pilot.size();
    if (k == "ez" && a) {
      std::vector<double> xs(nstat);
      for (std::size_t i = 0; i < nstat; ++i) xs[i] = pilot[i].statistic;
      p.ez = mean(xs);
    } else if (k == "a" && a) {
      if (!setup.cls.sup_bound) throw ValidationError("class has no uniform bound; give 'a'");
      p.a = *setup.cls.sup_bound;
      if (*p.a == 0.0) p.a = std::numeric_limits<double>::min();
    } else if (k == "sigma_sq" && a) {
      if (id == BoundId::kMarkovEmpirical) {
        p.sigma_sq = blocks->sigma_sq_class;
      } else {
        double best = 0.0;
        const auto nd = static_cast<double>(cfg.n);
        for (std::size_t f = 0; f < setup.cls.size(); ++f) {
          std::vector<double> m1(nstat);
          std::vector<double> m2(nstat);
          for (std::size_t i = 0; i < nstat; ++i) {
            m1[i] = pilot[i].summary.total[f] / nd;
            m2[i] = pilot[i].summary.square_sum[f] / nd;
          }
          const double mu = mean(m1);
          best = std::max(best, mean(m2) - mu * mu);
        }
        p.sigma_sq = nd * std::max(0.0, best);
      }
    } else if (k == "v_strong" && a) {
      std::vector<double> xs(nstat);
      for (std::size_t i = 0; i < nstat; ++i) xs[i] = sup_abs(pilot[i].summary.square_sum);
      p.v_strong = mean(xs);
    } else if (k == "max_norm") {
      const OrliczIndex alpha(j.contains("alpha") ? j.at("alpha").get<double>() : 1.0);
      if (a) {
        std::vector<double> xs(nstat);
        for (std::size_t i = 0; i < nstat; ++i) xs[i] = pilot[i].summary.max_sup;
        p.max_norm = max_sup_norm(xs, alpha).value;
      } else {
        if (!setup.env_law) {
          throw ValidationError("max_norm 'exact' needs an i.i.d. source with a finite law");
        }
        p.max_norm = orlicz_norm_exact(max_of_iid(*setup.env_law, cfg.n), alpha).value;
      }
    } else if (k == "tau") {
      if (a) {
        const double n1 = t1s.empty() ? 0.0 : orlicz_norm_empirical(t1s, OrliczIndex(1.0)).value;
        const double n2 = gaps.empty() ? 0.0 : orlicz_norm_empirical(gaps, OrliczIndex(1.0)).value;
        p.tau = std::max({1.0, n1, n2});
      } else {
        const std::optional<double>& src =
            id == BoundId::kBernsteinPsi1 ? setup.exact_summand_norm : setup.exact_tau;
        if (!src) throw ValidationError("no closed form for tau with this source");
        p.tau = std::max(1.0, *src);
      }
    } else if (k == "et2") {
      if (a) {
        p.et2 = blocks->mean_t2;
      } else {
        if (!setup.exact_et2) throw ValidationError("no closed form for et2 with this source");
        p.et2 = *setup.exact_et2;
      }
    } else if (k == "var_z1") {
      if (a) {
        double best = 0.0;
        for (double v2 : blocks->var_z1) best = std::max(best, v2);
        p.var_z1 = best;
      } else {
        if (!setup.reference.contains("var_z1") || setup.cls.size() != 1) {
          throw ValidationError("var_z1 'exact' needs a loop chain with one f_r");
        }
        p.var_z1 = setup.reference.at("var_z1").at(setup.cls.names.front()).template get<double>();
      }
    } else {
      throw ValidationError(std::string("parameter '") + key + "' has no " +
                            (a ? "automatic" : "exact") + " form");
    }
    out.sources[key] = a ? (want_blocks && (k == "et2" || k == "var_z1" || k == "tau" ||
                                            k == "sigma_sq") &&
                                    !(k == "sigma_sq" && id != BoundId::kMarkovEmpirical)
                                ? "block_pilot"
                                : "pilot")
                         : "exact";
  }
  if (j.contains("alpha")) {
    p.alpha = OrliczIndex(j.at("alpha").get<double>());
    out.sources["alpha"] = "config";
  } else {
    p.alpha = OrliczIndex(1.0);
    out.sources["alpha"] = "default";
  }
  if (id == BoundId::kBoundedDifference && !p.lipschitz) {
    p.lipschitz = 1.0;
    out.sources["lipschitz"] = "default";
  }
  // et2 <= tau is an invariant of exact values; estimates may cross it.
  if (p.et2 && p.tau && *p.et2 > *p.tau) p.tau = *p.et2;
  p.validate();
  return out;
}

struct TailRow {
  double t = 0.0;
  double mc_estimate = 0.0;
  double mc_se = 0.0;
  double bound = 0.0;
  bool dominated = true;
  bool vacuous = false;
};

struct TailReport {
  std::string experiment_id;
  std::string bound;
  std::string side;
  std::string statistic;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  std::int64_t pilot_reps = 0;
  ResolvedParams params;
  ConstantLedger ledger;
  std::vector<TailRow> rows;
  std::vector<std::string> warnings;
  bool passed = true;
};

inline std::vector<TailRow> tail_rows(std::span<const double> stats,
                                      std::span<const double> grid,
                                      const EventSpec& ev,
                                      const std::function<double(double)>& bound,
                                      std::vector<std::string>* warnings) {
  std::vector<TailRow> rows;
  const auto reps = static_cast<std::int64_t>(stats.size());
  for (double t : grid) {
    std::int64_t hits = 0;
    for (double s : stats) hits += ev.occurs(s, t) ? 1 : 0;
    TailRow r;
    r.t = t;
    r.mc_estimate = static_cast<double>(hits) / static_cast<double>(reps);
    r.mc_se = binomial_se(r.mc_estimate, reps);
    r.bound = bound(t);
    r.vacuous = 1.0 - r.bound <= r.mc_se;
    r.dominated = r.bound >= r.mc_estimate - kSeSlack * r.mc_se;
    if (warnings && r.bound < 1.0 / static_cast<double>(reps)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "t=%.17g: bound %.3g is below 1/reps; the estimate cannot resolve it",
                    t, r.bound);
      warnings->push_back(buf);
    }
    rows.push_back(r);
  }
  return rows;
}

template <class K>
std::vector<double> statistic_batch(const ExperimentConfig& cfg, const Setup<K>& setup,
                                    Statistic stat, Stream stream) {
  return parallel_map(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t i) {
    return simulate_record(setup, cfg.n, derive_seed(cfg.seed, i, stream), stat,
                           cfg.occupation_state, false)
        .statistic;
  });
}

inline void check_tail_config(const ExperimentConfig& cfg) {
  if (!cfg.bound) throw ValidationError("config needs a 'bound'");
  if (cfg.reps < kMinTailReps) {
    throw ValidationError("tail experiments need reps >= 10000");
  }
}

template <class K>
TailReport run_tail_experiment(const ExperimentConfig& cfg, const Setup<K>& setup) {
  check_tail_config(cfg);
  if (cfg.grid.empty()) throw ValidationError("config needs a non-empty 'grid'");
  const BoundId id = *cfg.bound;
  const Statistic stat =
      cfg.statistic ? statistic_from_name(*cfg.statistic) : default_statistic(id);
  TailReport rep;
  rep.experiment_id = cfg.experiment_id;
  rep.bound = std::string(bound_info(id).name);
  rep.side = cfg.side == Side::kUpper ? "upper" : "lower";
  rep.statistic = statistic_name(stat);
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.pilot_reps = cfg.pilot_reps;
  rep.ledger = cfg.ledger;
  rep.params = resolve_params(cfg, setup, id, stat);
  const EventSpec ev = event_for(id, cfg.side, rep.params.params, rep.ledger);
  const std::vector<double> stats = statistic_batch(cfg, setup, stat, Stream::kMain);
  const BoundParams p = rep.params.params;
  const ConstantLedger ledger = rep.ledger;
  const Side side = cfg.side;
  rep.rows = tail_rows(stats, cfg.grid, ev,
                       [&](double t) { return evaluate_bound(id, p, ledger, t, side); },
                       &rep.warnings);
  for (const TailRow& r : rep.rows) {
    if (!r.vacuous && !r.dominated) rep.passed = false;
  }
  return rep;
}

template <class K>
void pretest_bounded_difference(const ExperimentConfig& cfg, const Setup<K>& setup);

struct CalibrationReport {
  std::string experiment_id;
  std::string bound;
  std::string knob;
  std::string statistic;
  double constant = 0.0;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  ResolvedParams params;
  ConstantLedger ledger;
  std::vector<TailRow> train;
  std::vector<TailRow> validation;
  bool validation_passed = true;
};

// Smallest knob value that dominates the training grid (Stream::kMain),
// then checked on a disjoint validation grid with an independent batch
// (Stream::kValidation).
template <class K>
CalibrationReport run_calibration(const ExperimentConfig& cfg, const Setup<K>& setup) {
  check_tail_config(cfg);
  if (cfg.train_grid.empty() || cfg.validation_grid.empty()) {
    throw ValidationError("calibration needs train_grid and validation_grid");
  }
  for (double t : cfg.train_grid) {
    if (std::find(cfg.validation_grid.begin(), cfg.validation_grid.end(), t) !=
        cfg.validation_grid.end()) {
      throw ValidationError("train_grid and validation_grid must be disjoint");
    }
  }
  const BoundId id = *cfg.bound;
  if (id == BoundId::kBoundedDifference) pretest_bounded_difference(cfg, setup);
  const Statistic stat =
      cfg.statistic ? statistic_from_name(*cfg.statistic) : default_statistic(id);
  CalibrationReport rep;
  rep.experiment_id = cfg.experiment_id;
  rep.bound = std::string(bound_info(id).name);
  rep.knob = std::string(bound_info(id).knob);
  rep.statistic = statistic_name(stat);
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.params = resolve_params(cfg, setup, id, stat);
  const BoundParams p = rep.params.params;
  const EventSpec ev = event_for(id, cfg.side, p, cfg.ledger);
  const Side side = cfg.side;

  const std::vector<double> train = statistic_batch(cfg, setup, stat, Stream::kMain);
  const ConstantLedger base = cfg.ledger;
  auto bound_at = [&](double k, double t) {
    ConstantLedger l = base;
    l.set(rep.knob, k, true);
    return evaluate_bound(id, p, l, t, side);
  };
  const std::vector<TailRow> raw =
      tail_rows(train, cfg.train_grid, ev, [](double) { return 1.0; }, nullptr);
  std::vector<TailPoint> points;
  for (const TailRow& r : raw) points.push_back({r.t, r.mc_estimate, r.mc_se});
  rep.constant = calibrate_constant(bound_at, points);
  rep.ledger = base;
  rep.ledger.set(rep.knob, rep.constant, true);
  const ConstantLedger fitted = rep.ledger;
  auto fitted_bound = [&](double t) { return evaluate_bound(id, p, fitted, t, side); };
  rep.train = tail_rows(train, cfg.train_grid, ev, fitted_bound, nullptr);
  const std::vector<double> val = statistic_batch(cfg, setup, stat, Stream::kValidation);
  rep.validation = tail_rows(val, cfg.validation_grid, ev, fitted_bound, nullptr);
  for (const TailRow& r : rep.validation) {
    if (!r.vacuous && !r.dominated) rep.validation_passed = false;
  }
  return rep;
}

struct EstimateReport {
  std::string experiment_id;
  std::uint64_t seed = 0;
  std::int64_t trajectories = 0;
  std::int64_t n = 0;
  std::int64_t m = 1;
  std::int64_t blocks_per_path = 0;
  BlockStats stats;
  std::vector<double> asymptotic_variance;
  json reference = json::object();
};

template <class K>
EstimateReport finish_estimate(const ExperimentConfig& cfg, const Setup<K>& setup,
                               std::int64_t m, const std::vector<PathSummary>& sums) {
  EstimateReport rep;
  rep.experiment_id = cfg.experiment_id;
  rep.seed = cfg.seed;
  rep.trajectories = static_cast<std::int64_t>(sums.size());
  rep.m = m;
  rep.blocks_per_path = cfg.blocks_per_path;
  rep.stats = block_statistics(sums, setup.cls.names,
                               static_cast<std::size_t>(cfg.blocks_per_path));
  rep.asymptotic_variance = asymptotic_variance(rep.stats, m);
  rep.reference = setup.reference;
  return rep;
}

template <class K>
EstimateReport run_estimate(const ExperimentConfig& cfg, const Setup<K>& setup) {
  if (cfg.n < 1) throw ValidationError("config needs n >= 1");
  const std::vector<PathRecord> recs =
      parallel_map(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t i) {
        return simulate_record(setup, cfg.n, derive_seed(cfg.seed, i, Stream::kMain),
                               Statistic::kSupAbsSum, {}, true);
      });
  std::vector<PathSummary> sums;
  sums.reserve(recs.size());
  for (const PathRecord& r : recs) sums.push_back(r.summary);
  EstimateReport rep = finish_estimate(cfg, setup, setup.m, sums);
  rep.n = cfg.n;
  return rep;
}

struct ExternalTrajectory {
  std::vector<std::uint64_t> states;
  std::vector<std::uint8_t> flags;
};

// Reads step,state_index,flag rows; a row with step 1 starts a new
// trajectory.
inline std::vector<ExternalTrajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory file '" + path + "'");
  std::vector<ExternalTrajectory> out;
  std::string line;
  std::getline(in, line);
  if (line.rfind("step,state_index,flag", 0) != 0) {
    throw ValidationError("trajectory file needs header step,state_index,flag");
  }
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ValidationError("trajectory file line " + std::to_string(line_no) +
                            ": expected three columns");
    }
    try {
      const std::int64_t step = std::stoll(a);
      if (step == 1) out.emplace_back();
      if (out.empty()) throw ValidationError("trajectory must start at step 1");
      if (step != static_cast<std::int64_t>(out.back().states.size()) + 1) {
        throw ValidationError("trajectory file line " + std::to_string(line_no) +
                              ": steps must be consecutive");
      }
      out.back().states.push_back(std::stoull(b));
      const int flag = std::stoi(c);
      if (flag != 0 && flag != 1) throw ValidationError("flag must be 0 or 1");
      out.back().flags.push_back(static_cast<std::uint8_t>(flag));
    } catch (const std::logic_error&) {
      throw ValidationError("trajectory file line " + std::to_string(line_no) +
                            ": malformed number");
    }
  }
  if (out.empty()) throw ValidationError("trajectory file has no rows");
  return out;
}

inline std::size_t state_from_index(const Setup<SplitChain>& s, std::uint64_t idx) {
  if (idx >= s.kernel.chain().size()) throw ValidationError("state index out of range");
  return static_cast<std::size_t>(idx);
}
inline LoopState state_from_index(const Setup<LoopChain>&, std::uint64_t idx) {
  return LoopChain::state_of(idx);
}
inline std::int64_t state_from_index(const Setup<GeometricIid>&, std::uint64_t idx) {
  return static_cast<std::int64_t>(idx);
}

// Block estimates from user-supplied trajectories and flags, any m.
template <class K>
EstimateReport run_estimate_external(const ExperimentConfig& cfg, const Setup<K>& setup,
                                     const std::vector<ExternalTrajectory>& trajs) {
  std::vector<PathSummary> sums;
  std::int64_t total = 0;
  for (const ExternalTrajectory& t : trajs) {
    std::vector<typename K::State> states;
    states.reserve(t.states.size());
    for (std::uint64_t idx : t.states) states.push_back(state_from_index(setup, idx));
    const RegenDecomposition d = decompose(t.flags, cfg.m);
    sums.push_back(summarize_path<typename K::State>(states, d, setup.cls, true));
    total += static_cast<std::int64_t>(t.states.size());
  }
  EstimateReport rep = finish_estimate(cfg, setup, cfg.m, sums);
  rep.n = total;
  return rep;
}

// Truncation diagnostics on the variables of one config's source.
template <class K>
TruncationReport run_truncation(const ExperimentConfig& cfg, const Setup<K>& setup,
                                std::int64_t reps) {
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  OrliczIndex alpha(1.0);
  if (cfg.params.is_object() && cfg.params.contains("alpha")) {
    alpha = OrliczIndex(cfg.params.at("alpha").get<double>());
  }
  auto gen = [&](std::uint64_t seed) {
    return simulate_split(setup.kernel, n, seed).states;
  };
  return truncation_split<typename K::State>(gen, setup.cls, alpha, reps, cfg.seed,
                                             cfg.threads);
}

// Log-factor experiment on X = eps Y with P(Y = r) = e^{-r}, and on the loop
// chain with f_r, at n = round(e^r / r^2).
struct LogNecessityRow {
  int r = 0;
  std::int64_t n = 0;
  double p_sum = 0.0;
  double se_sum = 0.0;
  double levy_lower = 0.0;
  bool levy_ok = false;
  double p_max = 0.0;
  double se_max = 0.0;
  double max_lower = 0.0;
  double max_exact = 0.0;
  bool max_ok = false;
  double loop_p_sum = 0.0;
  double loop_se_sum = 0.0;
  double loop_block_tail = 0.0;
  double loop_block_se = 0.0;
  double loop_block_exact = 0.0;
  bool loop_block_ok = false;
  // Per beta: hypothetical bound at the calibrated K, and whether the
  // estimate exceeds it by more than 3 SE.
  std::vector<double> hypothetical;
  std::vector<bool> violated;
  std::vector<double> loop_hypothetical;
  std::vector<bool> loop_violated;
};

struct LogNecessityReport {
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  std::vector<double> betas;
  double k_calibrated = 0.0;
  double loop_k_calibrated = 0.0;
  std::vector<LogNecessityRow> rows;
  bool levy_all_ok = true;
  bool max_all_ok = true;
  bool loop_blocks_ok = true;
  // Per beta: violated at some r.
  std::vector<bool> violated_somewhere;
  std::vector<bool> loop_violated_somewhere;
};

inline std::int64_t log_necessity_n(int r) {
  return std::llround(std::exp(static_cast<double>(r)) / (static_cast<double>(r) * r));
}

// exp(-(r / log^beta n) / K), capped at 1.
inline double hypothetical_bound(int r, std::int64_t n, double beta, double k) {
  const double l = std::log(static_cast<double>(n));
  return std::min(1.0, std::exp(-(static_cast<double>(r) / std::pow(l, beta)) / k));
}

inline LogNecessityReport run_lognecessity_experiment(const std::vector<int>& rs,
                                                      const std::vector<double>& betas,
                                                      std::int64_t reps,
                                                      std::uint64_t seed,
                                                      unsigned threads = 1) {
  if (rs.empty()) throw ValidationError("log-necessity needs at least one r");
  if (reps < kMinTailReps) throw ValidationError("log-necessity needs reps >= 10000");
  if (std::find(betas.begin(), betas.end(), 1.0) == betas.end()) {
    throw ValidationError("log-necessity calibrates on beta = 1; include it in beta");
  }
  for (int r : rs) {
    if (r < 3 || r > 14) {
      throw ValidationError("log-necessity r must lie in 3..14 (n = e^r / r^2 stays desk-sized)");
    }
  }
  LogNecessityReport rep;
  rep.seed = seed;
  rep.reps = reps;
  rep.betas = betas;
  const auto count = static_cast<std::size_t>(reps);
  for (int r : rs) {
    LogNecessityRow row;
    row.r = r;
    row.n = log_necessity_n(r);
    const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(r), Stream::kAuxiliary);
    const SplitChain chain = counterexample_sequence_chain(static_cast<double>(r));
    struct Hit {
      double sum = 0.0;
      double max = 0.0;
    };
    const std::vector<Hit> hits = parallel_map(count, threads, [&](std::size_t i) {
      const auto idx = simulate_direct(chain, static_cast<std::size_t>(row.n),
                                       derive_seed(base, i, Stream::kMain));
      double sum = 0.0;
      double mx = 0.0;
      for (std::size_t x : idx) {
        const double v = chain.chain().state_values()[x];
        sum += v;
        mx = std::max(mx, std::abs(v));
      }
      return Hit{std::abs(sum) >= r ? 1.0 : 0.0, mx >= r ? 1.0 : 0.0};
    });
    double s1 = 0.0;
    double s2 = 0.0;
    for (const Hit& h : hits) {
      s1 += h.sum;
      s2 += h.max;
    }
    const double dn = static_cast<double>(reps);
    const double tail = std::exp(-static_cast<double>(r));
    row.p_sum = s1 / dn;
    row.se_sum = binomial_se(row.p_sum, reps);
    row.levy_lower = 0.25 * std::min(static_cast<double>(row.n) * tail, 1.0);
    row.levy_ok = row.p_sum + kSeSlack * row.se_sum >= row.levy_lower;
    row.p_max = s2 / dn;
    row.se_max = binomial_se(row.p_max, reps);
    row.max_lower = 0.5 * std::min(static_cast<double>(row.n) * tail, 1.0);
    row.max_exact = -std::expm1(static_cast<double>(row.n) * std::log1p(-tail));
    row.max_ok = row.p_max + kSeSlack * row.se_max >= row.max_lower &&
                 std::abs(row.p_max - row.max_exact) <= kSeSlack * row.se_max + 1e-15;

    // Loop chain: |sum f_r(X_i)| >= r over n steps, and P(|Z_1(f_r)| >= r).
    const LoopChain loop;
    const auto f = loop_indicator_function(r);
    const std::vector<Hit> lh = parallel_map(count, threads, [&](std::size_t i) {
      const auto traj = simulate_split(loop, static_cast<std::size_t>(row.n),
                                       derive_seed(base, i, Stream::kPilot));
      double sum = 0.0;
      for (const LoopState& x : traj.states) sum += f(x);
      Rng rng(derive_seed(base, i, Stream::kValidation));
      const double block = LoopChain::sample_loop_length(rng) >= r ? 1.0 : 0.0;
      return Hit{std::abs(sum) >= r ? 1.0 : 0.0, block};
    });
    s1 = 0.0;
    s2 = 0.0;
    for (const Hit& h : lh) {
      s1 += h.sum;
      s2 += h.max;
    }
    row.loop_p_sum = s1 / dn;
    row.loop_se_sum = binomial_se(row.loop_p_sum, reps);
    row.loop_block_tail = s2 / dn;
    row.loop_block_se = binomial_se(row.loop_block_tail, reps);
    row.loop_block_exact = LoopChain::loop_length_tail(r);
    const double band = kSeSlack * std::sqrt(row.loop_block_exact *
                                             (1.0 - row.loop_block_exact) / dn);
    row.loop_block_ok = std::abs(row.loop_block_tail - row.loop_block_exact) <= band;
    rep.levy_all_ok = rep.levy_all_ok && row.levy_ok;
    rep.max_all_ok = rep.max_all_ok && row.max_ok;
    rep.loop_blocks_ok = rep.loop_blocks_ok && row.loop_block_ok;
    rep.rows.push_back(row);
  }

  auto calibrate_on = [&](bool loop) {
    std::vector<TailPoint> pts;
    for (const LogNecessityRow& row : rep.rows) {
      pts.push_back({static_cast<double>(row.r), loop ? row.loop_p_sum : row.p_sum,
                     loop ? row.loop_se_sum : row.se_sum});
    }
    return calibrate_constant(
        [](double k, double t) {
          const int r = static_cast<int>(t);
          return hypothetical_bound(r, log_necessity_n(r), 1.0, k);
        },
        pts);
  };
  rep.k_calibrated = calibrate_on(false);
  rep.loop_k_calibrated = calibrate_on(true);
  rep.violated_somewhere.assign(betas.size(), false);
  rep.loop_violated_somewhere.assign(betas.size(), false);
  for (LogNecessityRow& row : rep.rows) {
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double h = hypothetical_bound(row.r, row.n, betas[b], rep.k_calibrated);
      const bool v = h < row.p_sum - kSeSlack * row.se_sum;
      row.hypothetical.push_back(h);
      row.violated.push_back(v);
      if (v) rep.violated_somewhere[b] = true;
      const double hl = hypothetical_bound(row.r, row.n, betas[b], rep.loop_k_calibrated);
      const bool vl = hl < row.loop_p_sum - kSeSlack * row.loop_se_sum;
      row.loop_hypothetical.push_back(hl);
      row.loop_violated.push_back(vl);
      if (vl) rep.loop_violated_somewhere[b] = true;
    }
  }
  return rep;
}

struct PropertyCheck {
  bool symmetric = true;
  bool lipschitz = true;
  std::string witness;
};

// Pre-test of a path statistic: invariance under random permutations and
// change by at most L when one coordinate is replaced.
inline PropertyCheck check_statistic_properties(
    const std::function<double(const std::vector<std::uint64_t>&)>& stat,
    const std::vector<std::vector<std::uint64_t>>& paths, double lipschitz,
    std::uint64_t seed, int trials = 100) {
  PropertyCheck out;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const auto& path = paths[static_cast<std::size_t>(k) % paths.size()];
    if (path.empty()) continue;
    const double base = stat(path);
    std::vector<std::uint64_t> perm = path;
    for (std::size_t i = perm.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    if (stat(perm) != base && out.symmetric) {
      out.symmetric = false;
      out.witness = "permutation changed the value on trial " + std::to_string(k);
    }
    std::vector<std::uint64_t> changed = path;
    const auto pos = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(path.size()));
    const auto& donor = paths[static_cast<std::size_t>(k + 1) % paths.size()];
    const auto src =
        static_cast<std::size_t>(uniform01(rng) * static_cast<double>(donor.size()));
    changed[std::min(pos, path.size() - 1)] = donor[std::min(src, donor.size() - 1)];
    if (std::abs(stat(changed) - base) > lipschitz + 1e-12 && out.lipschitz) {
      out.lipschitz = false;
      out.witness = "one-coordinate change exceeded L on trial " + std::to_string(k);
    }
  }
  return out;
}

// Property pre-test of the bounded-difference statistic on 20 auxiliary
// paths; a failure is rejected with its witness.
template <class K>
void pretest_bounded_difference(const ExperimentConfig& cfg, const Setup<K>& setup) {
  const Statistic stat = statistic_from_name(cfg.statistic.value_or("distinct_states"));
  if (!needs_indices(stat)) {
    throw ValidationError("bounded-difference statistic must be distinct_states or occupation");
  }
  if (setup.m != 1) throw UnsupportedError("bounded-difference experiment needs m = 1");
  const std::optional<std::size_t> target = cfg.occupation_state;
  if (stat == Statistic::kOccupation && !target) {
    throw ValidationError("statistic 'occupation' needs occupation_state");
  }
  const double lipschitz = cfg.params.is_object() && cfg.params.contains("lipschitz") &&
                                   cfg.params.at("lipschitz").is_number()
                               ? cfg.params.at("lipschitz").template get<double>()
                               : 1.0;
  std::vector<std::vector<std::uint64_t>> paths;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto traj = simulate_split(setup.kernel, static_cast<std::size_t>(cfg.n),
                                     derive_seed(cfg.seed, i, Stream::kAuxiliary));
    std::vector<std::uint64_t> idx;
    for (const auto& x : traj.states) idx.push_back(setup.kernel.index_of(x));
    paths.push_back(std::move(idx));
  }
  auto f = [stat, target](const std::vector<std::uint64_t>& idx) {
    return stat == Statistic::kDistinctStates ? distinct_count(idx)
                                              : occupation_count(idx, *target);
  };
  const PropertyCheck pc = check_statistic_properties(f, paths, lipschitz, cfg.seed);
  if (!pc.symmetric || !pc.lipschitz) {
    throw ValidationError("statistic failed the property pre-test: " + pc.witness);
  }
}

inline ExperimentConfig bounded_difference_config(ExperimentConfig cfg) {
  cfg.bound = BoundId::kBoundedDifference;
  if (!cfg.statistic) cfg.statistic = "distinct_states";
  if (!cfg.params.is_object()) cfg.params = json::object();
  if (!cfg.params.contains("ez")) cfg.params["ez"] = "auto";
  return cfg;
}

// Tail of a symmetric Hamming-Lipschitz statistic around its pilot mean
// against the bounded-difference bound, with the constant from the ledger
// or, when the config has calibration grids, fitted on them.
template <class K>
TailReport run_bounded_difference_experiment(const ExperimentConfig& raw,
                                             const Setup<K>& setup) {
  const ExperimentConfig cfg = bounded_difference_config(raw);
  pretest_bounded_difference(cfg, setup);
  return run_tail_experiment(cfg, setup);
}

}  // namespace regen::harness

#endif  // REGEN_HARNESS_EXPERIMENT_HPP_
