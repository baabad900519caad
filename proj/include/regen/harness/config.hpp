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

#ifndef REGEN_HARNESS_CONFIG_HPP_
#define REGEN_HARNESS_CONFIG_HPP_

// Experiment configuration: a single JSON file per experiment, and the
// translation of its "source" and "class" blocks into a sampler plus a
// function class. Keys are documented in configs/README.md.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "regen/bounds.hpp"
#include "regen/chain.hpp"
#include "regen/error.hpp"
#include "regen/estimators.hpp"
#include "regen/zoo.hpp"

namespace regen::harness {

using nlohmann::json;

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  json source;
  json function_class;
  std::int64_t n = 0;
  std::optional<std::string> statistic;
  std::optional<std::size_t> occupation_state;
  std::optional<BoundId> bound;
  Side side = Side::kUpper;
  json params = json::object();
  ConstantLedger ledger;
  std::vector<double> grid;
  std::vector<double> train_grid;
  std::vector<double> validation_grid;
  std::int64_t reps = 100000;
  std::int64_t pilot_reps = 20000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // estimate: optional external trajectory (step,state_index,flag) and m.
  std::optional<std::string> trajectory_file;
  std::int64_t m = 1;
  // estimate: use at most this many blocks per path, 0 = all.
  std::int64_t blocks_per_path = 0;
  // log-necessity experiment.
  std::vector<int> r_values = {6, 8, 10};
  std::vector<double> betas = {1.0, 0.5};
};

namespace detail {

inline const std::set<std::string>& known_top_level_keys() {
  static const std::set<std::string> keys = {
      "experiment_id", "description", "source",     "class",
      "n",             "statistic",   "occupation_state", "bound",
      "side",          "params",      "ledger",     "grid",
      "calibration",   "reps",        "pilot_reps", "seed",
      "threads",       "trajectory_file", "m",      "log_necessity",
      "blocks_per_path"};
  return keys;
}

inline std::vector<double> read_grid(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<double> g = j.get<std::vector<double>>();
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) {
      throw ValidationError(std::string(what) + " must be strictly increasing");
    }
  }
  for (double t : g) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ValidationError(std::string(what) + " entries must be finite and >= 0");
    }
  }
  return g;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!detail::known_top_level_keys().count(key)) {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    if (j.contains("experiment_id")) c.experiment_id = j.at("experiment_id").get<std::string>();
    if (j.contains("source")) c.source = j.at("source");
    if (j.contains("class")) c.function_class = j.at("class");
    if (j.contains("n")) c.n = j.at("n").get<std::int64_t>();
    if (j.contains("statistic")) c.statistic = j.at("statistic").get<std::string>();
    if (j.contains("occupation_state")) {
      c.occupation_state = j.at("occupation_state").get<std::size_t>();
    }
    if (j.contains("bound")) c.bound = bound_from_name(j.at("bound").get<std::string>());
    if (j.contains("side")) {
      const std::string s = j.at("side").get<std::string>();
      if (s == "upper") {
        c.side = Side::kUpper;
      } else if (s == "lower") {
        c.side = Side::kLower;
      } else {
        throw ValidationError("side must be 'upper' or 'lower'");
      }
    }
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("ledger")) {
      // A bare number is a default-style override; {"value", "calibrated"}
      // feeds a calibrated constant (possibly below 1) back in.
      for (const auto& [key, val] : j.at("ledger").items()) {
        if (val.is_object()) {
          c.ledger.set(key, val.at("value").get<double>(),
                       val.value("calibrated", false));
        } else {
          c.ledger.set(key, val.get<double>());
        }
      }
    }
    if (j.contains("grid")) c.grid = detail::read_grid(j.at("grid"), "grid");
    if (j.contains("calibration")) {
      const json& cal = j.at("calibration");
      if (cal.contains("train_grid")) {
        c.train_grid = detail::read_grid(cal.at("train_grid"), "train_grid");
      }
      if (cal.contains("validation_grid")) {
        c.validation_grid =
            detail::read_grid(cal.at("validation_grid"), "validation_grid");
      }
    }
    if (j.contains("reps")) c.reps = j.at("reps").get<std::int64_t>();
    if (j.contains("pilot_reps")) c.pilot_reps = j.at("pilot_reps").get<std::int64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("trajectory_file")) {
      c.trajectory_file = j.at("trajectory_file").get<std::string>();
    }
    if (j.contains("m")) c.m = j.at("m").get<std::int64_t>();
    if (j.contains("blocks_per_path")) {
      c.blocks_per_path = j.at("blocks_per_path").get<std::int64_t>();
    }
    if (j.contains("log_necessity")) {
      const json& ln = j.at("log_necessity");
      if (ln.contains("r")) c.r_values = ln.at("r").get<std::vector<int>>();
      if (ln.contains("beta")) c.betas = ln.at("beta").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (c.reps < 1) throw ValidationError("reps must be >= 1");
  if (c.pilot_reps < 2) throw ValidationError("pilot_reps must be >= 2");
  if (c.m < 1) throw ValidationError("m must be >= 1");
  if (c.blocks_per_path < 0) throw ValidationError("blocks_per_path must be >= 0");
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_json_file(path));
}

// A sampler plus the function class evaluated on its states, and whatever
// exact side information the source knows about itself.
template <class K>
struct Setup {
  Setup(K k, FunctionClass<typename K::State> c) : kernel(std::move(k)), cls(std::move(c)) {}

  K kernel;
  FunctionClass<typename K::State> cls;
  std::int64_t m = 1;
  std::string generator;
  // Law of sup_f |f(X)| for one draw when the source is i.i.d. with known law.
  std::optional<DiscreteLaw> env_law;
  // psi_1 norm bound covering T_1 and T_2, and E T_2, when known in closed
  // form.
  std::optional<double> exact_tau;
  std::optional<double> exact_et2;
  // psi_1 norm of one centered draw, for sums of independent variables.
  std::optional<double> exact_summand_norm;
  // Closed-form reference values reported next to estimates.
  json reference = json::object();
};

using AnySetup = std::variant<Setup<SplitChain>, Setup<LoopChain>, Setup<GeometricIid>>;

namespace detail {

inline double get_number(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) {
    throw ValidationError(std::string(where) + ": missing '" + key + "'");
  }
  try {
    return j.at(key).get<double>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(where) + ": '" + key + "' must be a number");
  }
}

inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw ValidationError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

inline bool is_iid(const SplitChain& c) {
  const DiscreteChain& ch = c.chain();
  const MinorizationCert& cert = c.cert();
  if (cert.delta != 1.0 || cert.small_set.size() != ch.size()) return false;
  for (std::size_t x = 0; x < ch.size(); ++x) {
    if (ch.initial()[x] != cert.nu[x]) return false;
  }
  return true;
}

inline double psi1_norm_upper(const TailCertifiedLaw& law) {
  return orlicz_norm_truncated(law, OrliczIndex(1.0)).upper.value;
}

// psi_1 norm of the constant 1: 1 / ln 2.
inline double unit_gap_tau() { return 1.0 / std::numbers::ln2; }

inline MinorizationCert parse_cert(const json& j, std::size_t states) {
  require_keys(j, {"small_set", "delta", "nu", "m"}, "certificate");
  MinorizationCert cert;
  try {
    cert.small_set = j.at("small_set").get<std::vector<std::size_t>>();
    cert.delta = j.at("delta").get<double>();
    cert.nu = j.at("nu").get<std::vector<double>>();
    if (j.contains("m")) cert.m = j.at("m").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("certificate: ") + e.what());
  }
  if (cert.nu.size() != states) throw ValidationError("certificate: nu has wrong length");
  return cert;
}

inline std::vector<DiscreteChain::Entries> parse_rows(const json& j) {
  std::vector<DiscreteChain::Entries> rows;
  try {
    for (const json& r : j) {
      DiscreteChain::Entries e;
      for (const json& pair : r) {
        e.emplace_back(pair.at(0).get<std::size_t>(), pair.at(1).get<double>());
      }
      rows.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("rows: ") + e.what());
  }
  return rows;
}

template <class State>
void add_zero(FunctionClass<State>& cls) {
  cls.add("zero", [](const State&) { return 0.0; });
  cls.sup_bound = 0.0;
}

inline FunctionClass<std::size_t> split_class(const json& desc, const SplitChain& chain) {
  FunctionClass<std::size_t> cls;
  const std::string kind = desc.value("kind", "");
  const std::size_t states = chain.chain().size();
  if (kind == "sign_bits") {
    require_keys(desc, {"kind", "count"}, "class");
    const auto count = static_cast<int>(get_number(desc, "count", "class sign_bits"));
    if (count < 1 || count > 62) throw ValidationError("sign_bits count must be in 1..62");
    for (int b = 0; b < count; ++b) {
      cls.add("bit" + std::to_string(b), [b](const std::size_t& x) {
        return ((x >> b) & 1U) ? 1.0 : -1.0;
      });
    }
    cls.sup_bound = 1.0;
  } else if (kind == "identity") {
    require_keys(desc, {"kind"}, "class");
    std::vector<double> values(states);
    for (std::size_t x = 0; x < states; ++x) {
      values[x] = chain.chain().has_state_values() ? chain.chain().state_values()[x]
                                                   : static_cast<double>(x);
    }
    double a = 0.0;
    for (double v : values) a = std::max(a, std::abs(v));
    cls.add("identity", [values](const std::size_t& x) { return values[x]; });
    cls.sup_bound = a;
  } else if (kind == "table") {
    require_keys(desc, {"kind", "functions", "center"}, "class");
    const bool center = desc.value("center", false);
    std::vector<double> pi;
    if (center) pi = stationary_distribution(chain.chain());
    double a = 0.0;
    for (const auto& [name, vals] : desc.at("functions").items()) {
      std::vector<double> v = vals.get<std::vector<double>>();
      if (v.size() != states) {
        throw ValidationError("class table '" + name + "' has wrong length");
      }
      if (center) {
        double mu = 0.0;
        for (std::size_t x = 0; x < states; ++x) mu += pi[x] * v[x];
        for (double& x : v) x -= mu;
      }
      for (double x : v) a = std::max(a, std::abs(x));
      cls.add(name, [v](const std::size_t& x) { return v[x]; });
    }
    cls.sup_bound = a;
  } else if (kind == "zero") {
    add_zero(cls);
  } else {
    throw ValidationError("class kind '" + kind +
                          "' not available for finite chains; available: sign_bits, "
                          "identity, table, zero");
  }
  cls.require_nonempty();
  return cls;
}

inline FunctionClass<LoopState> loop_class(const json& desc) {
  FunctionClass<LoopState> cls;
  const std::string kind = desc.value("kind", "");
  if (kind == "loop_indicator") {
    require_keys(desc, {"kind", "r"}, "class");
    std::vector<int> rs;
    if (desc.at("r").is_array()) {
      rs = desc.at("r").get<std::vector<int>>();
    } else {
      rs.push_back(desc.at("r").get<int>());
    }
    for (int r : rs) cls.add("f_r" + std::to_string(r), loop_indicator_function(r));
    cls.sup_bound = 1.0;
  } else if (kind == "zero") {
    add_zero(cls);
  } else {
    throw ValidationError("class kind '" + kind +
                          "' not available for loop_chain; available: loop_indicator, zero");
  }
  cls.require_nonempty();
  return cls;
}

inline FunctionClass<std::int64_t> geometric_class(const json& desc, const GeometricIid& g) {
  FunctionClass<std::int64_t> cls;
  const std::string kind = desc.value("kind", "");
  if (kind == "identity") {
    const double mu = g.mean();
    cls.add("centered", [mu](const std::int64_t& x) { return static_cast<double>(x) - mu; });
  } else if (kind == "zero") {
    add_zero(cls);
  } else {
    throw ValidationError("class kind '" + kind +
                          "' not available for geometric_iid; available: identity, zero");
  }
  return cls;
}

// Law of sup_f |f(X)| under nu for an i.i.d. chain.
inline DiscreteLaw envelope_law(const SplitChain& chain,
                                const FunctionClass<std::size_t>& cls) {
  std::vector<double> v(cls.size());
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t x = 0; x < chain.chain().size(); ++x) {
    const double p = chain.cert().nu[x];
    if (p <= 0.0) continue;
    cls.evaluate(x, v);
    atoms.emplace_back(sup_abs(v), p);
  }
  std::sort(atoms.begin(), atoms.end());
  std::vector<Atom> merged;
  for (const auto& [val, p] : atoms) {
    if (!merged.empty() && merged.back().value == val) {
      merged.back().probability += p;
    } else {
      merged.push_back({val, p});
    }
  }
  return DiscreteLaw(std::move(merged));
}

}  // namespace detail

// Law of max of n i.i.d. copies of a finite law on [0, inf).
inline DiscreteLaw max_of_iid(const DiscreteLaw& law, std::int64_t n) {
  std::vector<Atom> atoms(law.atoms().begin(), law.atoms().end());
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> out;
  double cdf = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cdf += atoms[i].probability;
    const double now = i + 1 == atoms.size() ? 1.0 : std::pow(cdf, static_cast<double>(n));
    if (now - prev > 0.0) out.push_back({atoms[i].value, now - prev});
    prev = now;
  }
  return DiscreteLaw(std::move(out));
}

inline AnySetup build_setup(const ExperimentConfig& cfg) {
  const json& src = cfg.source;
  if (!src.is_object() || !src.contains("generator")) {
    throw ValidationError("config needs a source block with a 'generator'");
  }
  const std::string gen = src.at("generator").get<std::string>();
  const json cls_spec = cfg.function_class.is_null() ? json{{"kind", "zero"}}
                                                      : cfg.function_class;
  auto finish_split = [&](SplitChain chain, json reference,
                          std::optional<double> tau, std::optional<double> et2) {
    FunctionClass<std::size_t> cls = detail::split_class(cls_spec, chain);
    Setup<SplitChain> s{std::move(chain), std::move(cls)};
    s.generator = gen;
    s.m = s.kernel.cert().m;
    if (detail::is_iid(s.kernel)) {
      s.env_law = detail::envelope_law(s.kernel, s.cls);
      s.exact_summand_norm = orlicz_norm_exact(*s.env_law, OrliczIndex(1.0)).value;
      s.exact_tau = detail::unit_gap_tau();
      s.exact_et2 = 1.0;
    } else {
      s.exact_tau = tau;
      s.exact_et2 = et2;
    }
    s.reference = std::move(reference);
    return AnySetup(std::move(s));
  };
  if (gen == "iid_uniform") {
    detail::require_keys(src, {"generator", "k"}, "source");
    const auto k = static_cast<std::size_t>(detail::get_number(src, "k", "iid_uniform"));
    return finish_split(iid_uniform_chain(k), json::object(), {}, {});
  }
  if (gen == "sparse_sign") {
    detail::require_keys(src, {"generator", "r"}, "source");
    const double r = detail::get_number(src, "r", "sparse_sign");
    json ref = {{"second_moment", r * r * std::exp(-r)}};
    return finish_split(counterexample_sequence_chain(r), ref, {}, {});
  }
  if (gen == "two_state") {
    detail::require_keys(src, {"generator", "p01", "p10", "initial", "certificate"},
                         "source");
    const double p01 = detail::get_number(src, "p01", "two_state");
    const double p10 = detail::get_number(src, "p10", "two_state");
    std::optional<std::vector<double>> xi;
    if (src.contains("initial")) xi = src.at("initial").get<std::vector<double>>();
    const std::vector<double> pi = two_state_stationary(p01, p10);
    json ref = {{"pi", pi}, {"mean_t2", 1.0 / pi[0]}};
    if (src.contains("certificate")) {
      DiscreteChain ch = two_state_kernel(p01, p10, xi);
      MinorizationCert cert = detail::parse_cert(src.at("certificate"), 2);
      return finish_split(SplitChain(std::move(ch), std::move(cert)), ref, {}, {});
    }
    const double tau = xi ? 0.0
                          : detail::psi1_norm_upper(two_state_return_time_law(p01, p10, 400));
    return finish_split(two_state_chain(p01, p10, xi), ref,
                        xi ? std::nullopt : std::optional<double>(tau), 1.0 / pi[0]);
  }
  if (gen == "explicit") {
    detail::require_keys(src, {"generator", "rows", "initial", "certificate", "values"},
                         "source");
    std::vector<DiscreteChain::Entries> rows = detail::parse_rows(src.at("rows"));
    const std::size_t states = rows.size();
    std::vector<double> xi = src.at("initial").get<std::vector<double>>();
    std::vector<double> values;
    if (src.contains("values")) values = src.at("values").get<std::vector<double>>();
    DiscreteChain ch(std::move(rows), std::move(xi), std::move(values));
    MinorizationCert cert = detail::parse_cert(src.at("certificate"), states);
    if (cert.m != 1) {
      // m > 1: the chain is only used to interpret external trajectories.
      const MinorizationReport rep = validate_minorization(ch, cert);
      if (!rep.passed) throw ValidationError("certificate rejected");
      throw UnsupportedError(
          "explicit chains with m > 1 cannot be simulated; use trajectory_file");
    }
    return finish_split(SplitChain(std::move(ch), std::move(cert)), json::object(), {}, {});
  }
  if (gen == "loop_chain") {
    detail::require_keys(src, {"generator", "max_tail_mass", "start"}, "source");
    LoopChain::Start start = LoopChain::Start::kNu;
    if (src.contains("start")) {
      const std::string st = src.at("start").get<std::string>();
      if (st == "origin") {
        start = LoopChain::Start::kOrigin;
      } else if (st != "nu") {
        throw ValidationError("loop_chain start must be 'nu' or 'origin'");
      }
    }
    Setup<LoopChain> s{LoopChain(start), detail::loop_class(cls_spec)};
    s.generator = gen;
    const double t2_norm = detail::psi1_norm_upper(LoopChain::return_time_law(60));
    s.exact_tau = start == LoopChain::Start::kNu ? t2_norm
                                                 : std::max(t2_norm, detail::unit_gap_tau());
    s.exact_et2 = LoopChain::mean_return_time();
    s.reference = {{"mean_return_time", LoopChain::mean_return_time()},
                   {"mean_loop_length", LoopChain::mean_loop_length()},
                   {"pi_origin", LoopChain::pi_origin()},
                   {"t2_psi1_norm", t2_norm}};
    json vz = json::object();
    for (const std::string& name : s.cls.names) {
      if (name.rfind("f_r", 0) == 0) {
        const int r = std::stoi(name.substr(3));
        vz[name] = LoopChain::var_z1_indicator(r);
      }
    }
    s.reference["var_z1"] = vz;
    return AnySetup(std::move(s));
  }
  if (gen == "geometric_iid") {
    detail::require_keys(src, {"generator", "p"}, "source");
    GeometricIid g(detail::get_number(src, "p", "geometric_iid"));
    Setup<GeometricIid> s{g, detail::geometric_class(cls_spec, g)};
    s.generator = gen;
    s.exact_summand_norm = detail::psi1_norm_upper(g.centered_abs_law(400));
    s.exact_tau = detail::unit_gap_tau();
    s.exact_et2 = 1.0;
    s.reference = {{"centered_psi1_norm", *s.exact_summand_norm}};
    return AnySetup(std::move(s));
  }
  throw ValidationError("unknown generator '" + gen +
                        "'; available: iid_uniform, sparse_sign, two_state, "
                        "explicit, loop_chain, geometric_iid");
}

}  // namespace regen::harness

#endif  // REGEN_HARNESS_CONFIG_HPP_
