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

#ifndef REGEN_BOUNDS_HPP_
#define REGEN_BOUNDS_HPP_

// Closed-form tail bounds for empirical processes of independent variables
// and of regenerating Markov chains. Universal constants whose values are not
// known live in a ConstantLedger; every evaluator caps its value at 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regen/error.hpp"
#include "regen/orlicz.hpp"

namespace regen {

enum class Side { kUpper, kLower };

enum class TalagrandVariant { kBennett, kBernstein };

enum class AuxiliaryBound { kInitialBlock, kLastBlock, kNOvershoot };

// Inputs shared by all evaluators. Each evaluator reads the fields it needs
// and reports a ValidationError naming any that are missing.
struct BoundParams {
  std::optional<std::int64_t> n;
  std::optional<double> a;
  std::optional<double> sigma_sq;
  std::optional<double> v_strong;
  std::optional<double> ez;
  std::optional<double> eta;
  std::optional<double> slack_delta;
  std::optional<OrliczIndex> alpha;
  std::optional<double> max_norm;
  std::optional<double> tau;
  std::optional<std::int64_t> m;
  std::optional<double> et2;
  std::optional<double> var_z1;
  std::optional<double> lipschitz;

  void validate() const {
    auto nonneg = [](const std::optional<double>& v, const char* name) {
      if (v && !(*v >= 0.0 && std::isfinite(*v))) {
        throw ValidationError(std::string("parameter '") + name +
                              "' must be finite and nonnegative");
      }
    };
    if (n && *n < 1) throw ValidationError("parameter 'n' must be >= 1");
    if (a && !(*a > 0.0)) throw ValidationError("parameter 'a' must be > 0");
    nonneg(sigma_sq, "sigma_sq");
    nonneg(v_strong, "v_strong");
    nonneg(ez, "ez");
    nonneg(max_norm, "max_norm");
    nonneg(var_z1, "var_z1");
    if (eta && !(*eta > 0.0 && *eta <= 1.0)) {
      throw ValidationError("parameter 'eta' must lie in (0, 1]");
    }
    if (slack_delta && !(*slack_delta > 0.0)) {
      throw ValidationError("parameter 'slack_delta' must be > 0");
    }
    if (tau && !(*tau >= 1.0)) {
      throw ValidationError("parameter 'tau' must be >= 1");
    }
    if (m && *m < 1) throw ValidationError("parameter 'm' must be >= 1");
    if (et2) {
      if (!(*et2 >= 1.0)) throw ValidationError("parameter 'et2' must be >= 1");
      if (tau && *et2 > *tau) {
        throw ValidationError("parameter 'et2' must not exceed 'tau'");
      }
    }
    if (lipschitz && !(*lipschitz > 0.0)) {
      throw ValidationError("parameter 'lipschitz' must be > 0");
    }
  }

  template <class T>
  static T require(const std::optional<T>& v, const char* name) {
    if (!v) throw ValidationError(std::string("missing parameter '") + name + "'");
    return *v;
  }
};

// Named universal constants. Unknown constants default to 1.0; the record of
// which entries were calibrated travels with every report.
class ConstantLedger {
 public:
  struct Entry {
    double value = 1.0;
    bool calibrated = false;
  };

  // Every key the evaluators read.
  static constexpr std::array<std::string_view, 20> kKnownKeys = {
      "K_talagrand",       "K1_talagrand",        "K_massart_tail",
      "K_klein_rio",       "C_clt",               "C_unbounded",
      "K_montgomery_smith", "K_bernstein",        "K_pisier",
      "K_ledoux_talagrand", "K_markov_sum",       "K_markov_empirical",
      "K_markov_empirical_mean", "K_bounded_difference", "K_initial_block",
      "K_last_block",      "K_n_overshoot",       "K_orlicz_tail",
      "K_hypothetical",    "K_max_norm"};

  static bool is_known(std::string_view key) {
    return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) !=
           kKnownKeys.end();
  }

  // Value of `key`; defaults to 1.0.
  double get(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    return it == entries_.end() ? 1.0 : it->second.value;
  }

  bool has_override(std::string_view key) const {
    return entries_.count(std::string(key)) != 0;
  }

  bool is_calibrated(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    return it != entries_.end() && it->second.calibrated;
  }

  void set(std::string_view key, double value, bool calibrated = false) {
    if (!is_known(key)) {
      throw ValidationError("unknown ledger constant '" + std::string(key) + "'");
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError("ledger constant '" + std::string(key) +
                            "' must be positive and finite");
    }
    if (!calibrated && value < 1.0) {
      throw ValidationError("ledger constant '" + std::string(key) +
                            "' below 1 requires calibration");
    }
    entries_[std::string(key)] = Entry{value, calibrated};
  }

  // Constant of the CLT-type bound: overridden value or the
  // explicit (1 + 1/delta)(3 + 2/eta).
  double c_clt(double eta, double slack_delta) const {
    if (has_override("C_clt")) return get("C_clt");
    return (1.0 + 1.0 / slack_delta) * (3.0 + 2.0 / eta);
  }

  // All keys with their effective values, defaults included.
  std::map<std::string, Entry> snapshot() const {
    std::map<std::string, Entry> out;
    for (std::string_view k : kKnownKeys) {
      if (k == "C_clt" && !has_override(k)) continue;
      out[std::string(k)] = Entry{get(k), is_calibrated(k)};
    }
    return out;
  }

  const std::map<std::string, Entry>& overrides() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

namespace detail {

inline double cap(double p) {
  if (std::isnan(p)) return 1.0;
  return std::clamp(p, 0.0, 1.0);
}

inline void require_nonnegative_t(double t) {
  if (!(t >= 0.0)) throw DomainError("bound evaluated at negative t");
}

inline double ratio_or_inf(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace detail

// Talagrand's inequality for P(Z >= EZ + t), Bennett or Bernstein form.
inline double talagrand_bound(const BoundParams& p, const ConstantLedger& ledger,
                              double t, TalagrandVariant variant) {
  detail::require_nonnegative_t(t);
  if (variant == TalagrandVariant::kBennett) {
    const double k = ledger.get("K_talagrand");
    if (t == 0.0) return detail::cap(k);
    const double v = BoundParams::require(p.v_strong, "v_strong");
    const double a = BoundParams::require(p.a, "a");
    if (!(v > 0.0)) throw ValidationError("talagrand bound needs v_strong > 0");
    const double exponent = (t / a) * std::log1p(t * a / v) / k;
    return detail::cap(k * std::exp(-exponent));
  }
  const double k1 = ledger.get("K1_talagrand");
  if (t == 0.0) return detail::cap(k1);
  const double v = BoundParams::require(p.v_strong, "v_strong");
  const double a = BoundParams::require(p.a, "a");
  if (!(v > 0.0)) throw ValidationError("talagrand bound needs v_strong > 0");
  return detail::cap(k1 * std::exp(-(t * t / (v + a * t)) / k1));
}

struct MassartConstants {
  double k1;
  double k2;
  double k3;
  double k4;
};

inline MassartConstants massart_constants(double eta) {
  if (!(eta > 0.0)) throw ValidationError("Massart constants need eta > 0");
  return {4.0, 2.5 + 32.0 / eta, 5.4, 2.5 + 43.2 / eta};
}

// Level that Z exceeds (upper) or undershoots (lower) with probability at
// most e^{-t}, with Massart's explicit constants.
inline double massart_threshold(const BoundParams& p, double t, Side side) {
  detail::require_nonnegative_t(t);
  const double eta = BoundParams::require(p.eta, "eta");
  const double ez = BoundParams::require(p.ez, "ez");
  const double sigma = std::sqrt(BoundParams::require(p.sigma_sq, "sigma_sq"));
  const double a = BoundParams::require(p.a, "a");
  const MassartConstants k = massart_constants(eta);
  if (side == Side::kUpper) {
    return (1.0 + eta) * ez + sigma * std::sqrt(2.0 * k.k1 * t) + k.k2 * a * t;
  }
  return (1.0 - eta) * ez - sigma * std::sqrt(2.0 * k.k3 * t) - k.k4 * a * t;
}

// Probability side of Massart's inequality, e^{-t / K} with K = 1 as proved.
inline double massart_tail(const ConstantLedger& ledger, double t) {
  detail::require_nonnegative_t(t);
  return detail::cap(std::exp(-t / ledger.get("K_massart_tail")));
}

// Klein-Rio bound, same expression for both tails.
inline double klein_rio_bound(const BoundParams& p, double t,
                              const ConstantLedger& ledger = {}) {
  detail::require_nonnegative_t(t);
  if (t == 0.0) return 1.0;
  const double sigma_sq = BoundParams::require(p.sigma_sq, "sigma_sq");
  const double a = BoundParams::require(p.a, "a");
  const double ez = BoundParams::require(p.ez, "ez");
  const double den = 2.0 * (sigma_sq + 2.0 * a * ez) + 3.0 * a * t;
  const double exponent = detail::ratio_or_inf(t * t, den);
  return detail::cap(std::exp(-exponent / ledger.get("K_klein_rio")));
}

// Sub-gaussian plus exponential consequence of Klein-Rio with explicit C.
inline double clt_type_bound(const BoundParams& p, double t,
                             const ConstantLedger& ledger = {}) {
  detail::require_nonnegative_t(t);
  if (t == 0.0) return 1.0;
  const double sigma_sq = BoundParams::require(p.sigma_sq, "sigma_sq");
  const double slack = BoundParams::require(p.slack_delta, "slack_delta");
  const double eta = BoundParams::require(p.eta, "eta");
  const double a = BoundParams::require(p.a, "a");
  const double c = ledger.c_clt(eta, slack);
  const double gauss =
      std::exp(-detail::ratio_or_inf(t * t, 2.0 * (1.0 + slack) * sigma_sq));
  return detail::cap(gauss + std::exp(-t / (c * a)));
}

// Tail of sup_f |sum f(X_i)| for centered classes with psi_alpha-integrable
// envelope; identical expression for both sides.
inline double unbounded_class_bound(const BoundParams& p,
                                    const ConstantLedger& ledger, double t,
                                    Side /*side*/ = Side::kUpper) {
  detail::require_nonnegative_t(t);
  if (t == 0.0) return 1.0;
  const double sigma_sq = BoundParams::require(p.sigma_sq, "sigma_sq");
  const double slack = BoundParams::require(p.slack_delta, "slack_delta");
  const double max_norm = BoundParams::require(p.max_norm, "max_norm");
  const OrliczIndex alpha = BoundParams::require(p.alpha, "alpha");
  if (!(max_norm > 0.0)) {
    throw ValidationError("unbounded-class bound needs max_norm > 0");
  }
  const double c = ledger.get("C_unbounded");
  const double gauss =
      std::exp(-detail::ratio_or_inf(t * t, 2.0 * (1.0 + slack) * sigma_sq));
  const double heavy =
      3.0 * std::exp(-std::pow(t / (c * max_norm), alpha.value()));
  return detail::cap(gauss + heavy);
}

// psi_alpha-norm bound K_alpha (E Z + ||max_i sup_f |f(X_i)|||).
inline OrliczNorm ledoux_talagrand_bound(double z_mean, double max_norm,
                                         OrliczIndex alpha,
                                         const ConstantLedger& ledger) {
  if (!(z_mean >= 0.0) || !(max_norm >= 0.0)) {
    throw ValidationError("Ledoux-Talagrand bound needs nonnegative inputs");
  }
  return {ledger.get("K_ledoux_talagrand") * (z_mean + max_norm), alpha};
}

// Maximal inequality for independent variables: K max_i ||Y_i|| log^{1/a} n.
inline OrliczNorm pisier_bound(std::span<const OrliczNorm> norms,
                               OrliczIndex alpha,
                               const ConstantLedger& ledger) {
  if (norms.size() <= 1) {
    throw ValidationError("Pisier bound needs at least two variables");
  }
  double largest = 0.0;
  for (const OrliczNorm& nm : norms) {
    if (!(nm.alpha == alpha)) {
      throw ValidationError("Pisier bound: norms with mixed Orlicz indices");
    }
    largest = std::max(largest, nm.value);
  }
  const double log_n = std::log(static_cast<double>(norms.size()));
  return {ledger.get("K_pisier") * largest * std::pow(log_n, 1.0 / alpha.value()),
          alpha};
}

// Bernstein's inequality for sums of n centered variables with psi_1 norm
// at most tau.
inline double bernstein_psi1_bound(std::int64_t n, double tau, double t,
                                   const ConstantLedger& ledger) {
  detail::require_nonnegative_t(t);
  if (n < 1) throw ValidationError("Bernstein bound needs n >= 1");
  if (!(tau > 0.0)) throw ValidationError("Bernstein bound needs tau > 0");
  const double k = ledger.get("K_bernstein");
  const double nd = static_cast<double>(n);
  const double e = std::min(t * t / (nd * tau * tau), t / tau);
  return detail::cap(2.0 * std::exp(-e / k));
}

// Right-hand side of the Montgomery-Smith maximal inequality,
// K P(|S_n| > t / K), given the tail of |S_n|.
template <class Tail>
double montgomery_smith_bound(Tail&& tail_of_sum, double t,
                              const ConstantLedger& ledger) {
  detail::require_nonnegative_t(t);
  const double k = ledger.get("K_montgomery_smith");
  return detail::cap(k * tail_of_sum(t / k));
}

// P(|f(X_1) + ... + f(X_n)| > t) for a regenerating chain, singleton class,
// any skeleton step m.
inline double markov_sum_bound(const BoundParams& p,
                               const ConstantLedger& ledger, double t) {
  detail::require_nonnegative_t(t);
  const double k = ledger.get("K_markov_sum");
  if (t == 0.0) return detail::cap(k);
  const std::int64_t n = BoundParams::require(p.n, "n");
  if (n < 2) throw ValidationError("Markov sum bound needs n >= 2");
  const double m = static_cast<double>(BoundParams::require(p.m, "m"));
  const double et2 = BoundParams::require(p.et2, "et2");
  const double var_z1 = BoundParams::require(p.var_z1, "var_z1");
  const double tau = BoundParams::require(p.tau, "tau");
  const double a = BoundParams::require(p.a, "a");
  const double nd = static_cast<double>(n);
  const double gauss = detail::ratio_or_inf(t * t, nd * var_z1 / (m * et2));
  const double heavy = t / (tau * tau * a * m * std::log(nd));
  return detail::cap(k * std::exp(-std::min(gauss, heavy) / k));
}

// P(Z >= K' EZ + t) for sup_f |sum f(X_i)| over a chain with m = 1, where
// sigma_sq is the asymptotic weak variance sup_f Var Z_1(f) / E T_2.
inline double markov_empirical_bound(const BoundParams& p,
                                     const ConstantLedger& ledger, double t) {
  if (!(t >= 1.0)) {
    throw ValidationError("Markov empirical-process bound is stated for t >= 1");
  }
  const std::int64_t m = BoundParams::require(p.m, "m");
  if (m != 1) {
    throw UnsupportedError("Markov empirical-process bound requires m = 1");
  }
  const std::int64_t n = BoundParams::require(p.n, "n");
  if (n < 2) throw ValidationError("Markov empirical-process bound needs n >= 2");
  const double sigma_sq = BoundParams::require(p.sigma_sq, "sigma_sq");
  const double tau = BoundParams::require(p.tau, "tau");
  const double et2 = BoundParams::require(p.et2, "et2");
  const double a = BoundParams::require(p.a, "a");
  const double k = ledger.get("K_markov_empirical");
  const double nd = static_cast<double>(n);
  const double gauss = detail::ratio_or_inf(t * t, nd * sigma_sq);
  const double heavy = t / (tau * tau * tau / et2 * a * std::log(nd));
  return detail::cap(k * std::exp(-std::min(gauss, heavy) / k));
}

// P(|F - EF| >= t) for symmetric, L-Lipschitz (Hamming) statistics of a
// chain with m = 1.
inline double markov_bounded_difference_bound(const BoundParams& p,
                                              const ConstantLedger& ledger,
                                              double t) {
  detail::require_nonnegative_t(t);
  const std::int64_t m = BoundParams::require(p.m, "m");
  if (m != 1) {
    throw UnsupportedError("bounded-difference bound requires m = 1");
  }
  if (t == 0.0) return 1.0;
  const double nd = static_cast<double>(BoundParams::require(p.n, "n"));
  const double l = BoundParams::require(p.lipschitz, "lipschitz");
  const double tau = BoundParams::require(p.tau, "tau");
  const double k = ledger.get("K_bounded_difference");
  return detail::cap(2.0 * std::exp(-(t * t / (nd * l * l * tau * tau)) / k));
}

// Bounds for the pieces outside the complete regeneration blocks: the
// initial block, the incomplete last block, and the overshoot of the block
// count N past floor(3n / (m E T_2)). For the overshoot t is ignored.
inline double auxiliary_bound(const BoundParams& p, const ConstantLedger& ledger,
                              double t, AuxiliaryBound which) {
  detail::require_nonnegative_t(t);
  const double m = static_cast<double>(BoundParams::require(p.m, "m"));
  const double tau = BoundParams::require(p.tau, "tau");
  switch (which) {
    case AuxiliaryBound::kInitialBlock: {
      const double a = BoundParams::require(p.a, "a");
      const double k = ledger.get("K_initial_block");
      return detail::cap(2.0 * std::exp(-t / (k * 2.0 * a * m * tau)));
    }
    case AuxiliaryBound::kLastBlock: {
      const double a = BoundParams::require(p.a, "a");
      const double k = ledger.get("K_last_block");
      // log(tau) is floored at 1 so the bound stays defined for tau < e.
      const double log_tau = std::max(1.0, std::log(tau));
      return detail::cap(k * std::exp(-t / (k * a * m * tau * log_tau)));
    }
    case AuxiliaryBound::kNOvershoot: {
      const double nd = static_cast<double>(BoundParams::require(p.n, "n"));
      const double et2 = BoundParams::require(p.et2, "et2");
      const double k = ledger.get("K_n_overshoot");
      return detail::cap(k * std::exp(-(nd * et2 / (m * tau * tau)) / k));
    }
  }
  throw InternalError("unknown auxiliary bound");
}

// Chebyshev tail bound from a psi_alpha norm, with the norm scaled by the
// K_orlicz_tail knob (1 as proved).
inline double orlicz_tail_bound(const BoundParams& p,
                                const ConstantLedger& ledger, double t) {
  detail::require_nonnegative_t(t);
  const double norm = BoundParams::require(p.max_norm, "max_norm");
  const OrliczIndex alpha = BoundParams::require(p.alpha, "alpha");
  return tail_from_norm({norm * ledger.get("K_orlicz_tail"), alpha}, t);
}

// Uniform dispatch used by the harness and by calibration.
enum class BoundId {
  kTalagrandBennett,
  kTalagrandBernstein,
  kMassart,
  kKleinRio,
  kCltType,
  kUnboundedClass,
  kBernsteinPsi1,
  kMarkovSum,
  kMarkovEmpirical,
  kBoundedDifference,
  kInitialBlock,
  kLastBlock,
  kNOvershoot,
  kOrliczTail,
};

struct BoundInfo {
  BoundId id;
  std::string_view name;
  // Ledger key the calibration search varies.
  std::string_view knob;
};

inline constexpr std::array<BoundInfo, 14> kBoundTable = {{
    {BoundId::kTalagrandBennett, "talagrand_bennett", "K_talagrand"},
    {BoundId::kTalagrandBernstein, "talagrand_bernstein", "K1_talagrand"},
    {BoundId::kMassart, "massart", "K_massart_tail"},
    {BoundId::kKleinRio, "klein_rio", "K_klein_rio"},
    {BoundId::kCltType, "clt_type", "C_clt"},
    {BoundId::kUnboundedClass, "unbounded_class", "C_unbounded"},
    {BoundId::kBernsteinPsi1, "bernstein_psi1", "K_bernstein"},
    {BoundId::kMarkovSum, "markov_sum", "K_markov_sum"},
    {BoundId::kMarkovEmpirical, "markov_empirical", "K_markov_empirical"},
    {BoundId::kBoundedDifference, "bounded_difference", "K_bounded_difference"},
    {BoundId::kInitialBlock, "initial_block", "K_initial_block"},
    {BoundId::kLastBlock, "last_block", "K_last_block"},
    {BoundId::kNOvershoot, "n_overshoot", "K_n_overshoot"},
    {BoundId::kOrliczTail, "orlicz_tail", "K_orlicz_tail"},
}};

inline const BoundInfo& bound_info(BoundId id) {
  for (const BoundInfo& b : kBoundTable) {
    if (b.id == id) return b;
  }
  throw InternalError("bound id missing from table");
}

inline BoundId bound_from_name(std::string_view name) {
  for (const BoundInfo& b : kBoundTable) {
    if (b.name == name) return b.id;
  }
  std::string msg = "unknown bound '" + std::string(name) + "'; available:";
  for (const BoundInfo& b : kBoundTable) msg += " " + std::string(b.name);
  throw ValidationError(msg);
}

// Explicit-constant bounds hold as proved with every knob at 1.
inline bool has_explicit_constants(BoundId id) {
  switch (id) {
    case BoundId::kMassart:
    case BoundId::kKleinRio:
    case BoundId::kCltType:
    case BoundId::kInitialBlock:
    case BoundId::kOrliczTail:
      return true;
    default:
      return false;
  }
}

inline double evaluate_bound(BoundId id, const BoundParams& p,
                             const ConstantLedger& ledger, double t,
                             Side side = Side::kUpper) {
  switch (id) {
    case BoundId::kTalagrandBennett:
      return talagrand_bound(p, ledger, t, TalagrandVariant::kBennett);
    case BoundId::kTalagrandBernstein:
      return talagrand_bound(p, ledger, t, TalagrandVariant::kBernstein);
    case BoundId::kMassart:
      return massart_tail(ledger, t);
    case BoundId::kKleinRio:
      return klein_rio_bound(p, t, ledger);
    case BoundId::kCltType:
      return clt_type_bound(p, t, ledger);
    case BoundId::kUnboundedClass:
      return unbounded_class_bound(p, ledger, t, side);
    case BoundId::kBernsteinPsi1:
      return bernstein_psi1_bound(BoundParams::require(p.n, "n"),
                                  BoundParams::require(p.tau, "tau"), t, ledger);
    case BoundId::kMarkovSum:
      return markov_sum_bound(p, ledger, t);
    case BoundId::kMarkovEmpirical:
      return markov_empirical_bound(p, ledger, t);
    case BoundId::kBoundedDifference:
      return markov_bounded_difference_bound(p, ledger, t);
    case BoundId::kInitialBlock:
      return auxiliary_bound(p, ledger, t, AuxiliaryBound::kInitialBlock);
    case BoundId::kLastBlock:
      return auxiliary_bound(p, ledger, t, AuxiliaryBound::kLastBlock);
    case BoundId::kNOvershoot:
      return auxiliary_bound(p, ledger, t, AuxiliaryBound::kNOvershoot);
    case BoundId::kOrliczTail:
      return orlicz_tail_bound(p, ledger, t);
  }
  throw InternalError("unhandled bound id");
}

struct BoundCurve {
  std::string evaluator;
  std::vector<std::pair<double, double>> points;
};

inline BoundCurve bound_curve(BoundId id, const BoundParams& p,
                              const ConstantLedger& ledger,
                              std::span<const double> grid,
                              Side side = Side::kUpper) {
  BoundCurve curve{std::string(bound_info(id).name), {}};
  for (double t : grid) {
    curve.points.emplace_back(t, evaluate_bound(id, p, ledger, t, side));
  }
  return curve;
}

}  // namespace regen

#endif  // REGEN_BOUNDS_HPP_
