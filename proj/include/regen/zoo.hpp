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

#ifndef REGEN_ZOO_HPP_
#define REGEN_ZOO_HPP_

// Concrete chains: the loop chain on a countable state space, the signed
// two-point i.i.d. sequence, a two-state chain, i.i.d. uniform and geometric
// sources, and drift-condition checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "regen/chain.hpp"
#include "regen/error.hpp"
#include "regen/orlicz.hpp"
#include "regen/rng.hpp"

namespace regen {

// Either the origin (n == 0) or position k of the n-th loop with sign s.
struct LoopState {
  std::int32_t n = 0;
  std::int32_t k = 0;
  std::int8_t s = 0;

  bool is_origin() const { return n == 0; }
  static LoopState origin() { return {}; }
  friend bool operator==(const LoopState&, const LoopState&) = default;
};

// From the origin the chain picks loop length n with probability
// e^{-n} / A (A = sum_n e^{-n}) and a fair sign, walks the loop, and returns.
// The regeneration set is {origin} with delta = 1.
class LoopChain {
 public:
  using State = LoopState;
  enum class Start { kNu, kOrigin };

  explicit LoopChain(Start start = Start::kNu) : start_(start) {}

  // A = 1 / (e - 1).
  static double a_const() { return 1.0 / std::expm1(1.0); }
  // sum_n n e^{-n} = q / (1 - q)^2 with q = e^{-1}.
  static double sum_n_exp() {
    const double q = std::exp(-1.0);
    return q / ((1.0 - q) * (1.0 - q));
  }
  static double pi_origin() { return a_const() / (a_const() + sum_n_exp()); }
  static double pi_loop(std::int32_t n) {
    return std::exp(-static_cast<double>(n)) * pi_origin() / (2.0 * a_const());
  }
  static double pi(const LoopState& x) {
    return x.is_origin() ? pi_origin() : pi_loop(x.n);
  }
  // P(loop length = n) = e^{-n} / A.
  static double loop_length_probability(std::int32_t n) {
    return std::exp(-static_cast<double>(n)) / a_const();
  }
  // P(loop length >= r) = e^{-(r - 1)}.
  static double loop_length_tail(std::int32_t r) {
    return std::exp(-static_cast<double>(r - 1));
  }
  static double mean_loop_length() { return 1.0 / (1.0 - std::exp(-1.0)); }
  // Gap between consecutive visits to the origin: loop length + 1.
  static double mean_return_time() { return 1.0 + mean_loop_length(); }

  // Var Z_1(f_r) = sum_{n >= r} n^2 e^{-n} / A.
  static double var_z1_indicator(std::int32_t r) {
    if (r < 1) throw ValidationError("f_r needs r >= 1");
    double sum = 0.0;
    for (std::int32_t n = r;; ++n) {
      const double term = static_cast<double>(n) * n * std::exp(-static_cast<double>(n));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum / a_const();
  }

  // Law of the return time T_2 (= loop length + 1) with atoms up to loop
  // length n_max and a certified tail.
  static TailCertifiedLaw return_time_law(std::int32_t n_max) {
    if (n_max < 1) throw ValidationError("return_time_law needs n_max >= 1");
    TailCertifiedLaw law;
    for (std::int32_t n = 1; n <= n_max; ++n) {
      law.head.push_back({static_cast<double>(n + 1), loop_length_probability(n)});
    }
    law.tail_mass = std::exp(-static_cast<double>(n_max));
    const double a = a_const();
    const double tail = law.tail_mass;
    law.tail_psi_bound = [n_max, a, tail](double lambda) {
      // sum_{n > n_max} (e^{(n+1)/lambda} - 1) e^{-n} / A, finite for lambda > 1.
      if (!(lambda > 1.0)) return std::numeric_limits<double>::infinity();
      const double rho = std::exp(-(1.0 - 1.0 / lambda));
      const double geo = std::pow(rho, n_max + 1) / (1.0 - rho);
      return std::exp(1.0 / lambda) * geo / a - tail;
    };
    return law;
  }

  static std::int32_t sample_loop_length(Rng& rng) {
    // floor(Exp(1)) + 1 has exactly the law e^{-n} / A on n >= 1.
    return static_cast<std::int32_t>(std::floor(standard_exponential(rng))) + 1;
  }

  State sample_initial(Rng& rng) const {
    return start_ == Start::kOrigin ? State::origin() : sample_nu(rng);
  }
  State sample_transition(const State& x, Rng& rng) const {
    if (x.is_origin()) return sample_nu(rng);
    if (x.k < x.n) return {x.n, static_cast<std::int32_t>(x.k + 1), x.s};
    return State::origin();
  }
  bool in_small_set(const State& x) const { return x.is_origin(); }
  double delta() const { return 1.0; }
  State sample_nu(Rng& rng) const {
    const std::int32_t n = sample_loop_length(rng);
    const auto s = static_cast<std::int8_t>(rademacher(rng));
    return {n, 1, s};
  }
  State sample_residual(const State&, Rng&) const {
    throw InternalError("loop chain has delta = 1; residual is never sampled");
  }

  // origin -> 0, (n, k, s) -> 1 + n(n-1) + 2(k-1) + [s = -1].
  static std::uint64_t index_of(const State& x) {
    if (x.is_origin()) return 0;
    const auto n = static_cast<std::uint64_t>(x.n);
    return 1 + n * (n - 1) + 2 * static_cast<std::uint64_t>(x.k - 1) +
           (x.s < 0 ? 1 : 0);
  }
  static State state_of(std::uint64_t index) {
    if (index == 0) return State::origin();
    std::uint64_t n = 1;
    while (1 + (n + 1) * n <= index) ++n;
    const std::uint64_t off = index - 1 - n * (n - 1);
    return {static_cast<std::int32_t>(n), static_cast<std::int32_t>(off / 2 + 1),
            static_cast<std::int8_t>(off % 2 == 0 ? 1 : -1)};
  }

  Start start() const { return start_; }

 private:
  Start start_;
};

// f_r(origin) = 0, f_r((n, k, s)) = s 1{n >= r}.
inline std::function<double(const LoopState&)> loop_indicator_function(
    std::int32_t r) {
  if (r < 1) throw ValidationError("f_r needs r >= 1");
  return [r](const LoopState& x) {
    if (x.is_origin() || x.n < r) return 0.0;
    return static_cast<double>(x.s);
  };
}

// Finite truncation of the loop chain for linear algebra.
struct TruncatedLoopChain {
  DiscreteChain chain;
  MinorizationCert cert;
  std::int32_t n_max = 0;
  // Mass of the loop lengths dropped, e^{-n_max}.
  double tail_mass = 0.0;
};

// Keeps loop lengths 1..n_max with e^{-n_max} < max_tail_mass and
// renormalizes the origin row over them.
inline TruncatedLoopChain truncate_loop_chain(double max_tail_mass) {
  if (!(max_tail_mass > 0.0 && max_tail_mass <= 1e-6)) {
    throw ValidationError("max_tail_mass must lie in (0, 1e-6]");
  }
  const auto n_max =
      static_cast<std::int32_t>(std::floor(-std::log(max_tail_mass))) + 1;
  const std::size_t states = 1 + static_cast<std::size_t>(n_max) * (n_max + 1);
  if (states > kDenseStateCap) {
    throw ValidationError("max_tail_mass too small: truncated loop chain exceeds " +
                          std::to_string(kDenseStateCap) + " states");
  }
  std::vector<DiscreteChain::Entries> rows(states);
  double a_n = 0.0;
  for (std::int32_t n = 1; n <= n_max; ++n) a_n += std::exp(-static_cast<double>(n));
  for (std::int32_t n = 1; n <= n_max; ++n) {
    const double p = std::exp(-static_cast<double>(n)) / (2.0 * a_n);
    for (std::int8_t s : {std::int8_t{1}, std::int8_t{-1}}) {
      rows[0].emplace_back(LoopChain::index_of({n, 1, s}), p);
      for (std::int32_t k = 1; k <= n; ++k) {
        const std::size_t from = LoopChain::index_of({n, k, s});
        const std::size_t to =
            k < n ? LoopChain::index_of({n, static_cast<std::int32_t>(k + 1), s}) : 0;
        rows[from].emplace_back(to, 1.0);
      }
    }
  }
  std::vector<double> nu(states, 0.0);
  for (const auto& [col, p] : rows[0]) nu[col] = p;
  DiscreteChain chain(std::move(rows), nu);
  MinorizationCert cert{{0}, 1.0, std::move(nu), 1};
  return {std::move(chain), std::move(cert), n_max,
          std::exp(-static_cast<double>(n_max))};
}

// Closed-form stationary vector of the untruncated chain, restricted to the
// states of a truncation with loops up to n_max.
inline std::vector<double> loop_pi_closed_form(std::int32_t n_max) {
  const std::size_t states = 1 + static_cast<std::size_t>(n_max) * (n_max + 1);
  std::vector<double> pi(states);
  for (std::size_t i = 0; i < states; ++i) pi[i] = LoopChain::pi(LoopChain::state_of(i));
  return pi;
}

// Chain whose rows all equal `probs`: an i.i.d. sequence, with C = all
// states, delta = 1, nu = probs.
inline SplitChain iid_chain(const std::vector<double>& probs,
                            std::vector<double> values = {}) {
  DiscreteChain::Entries row;
  for (std::size_t j = 0; j < probs.size(); ++j) row.emplace_back(j, probs[j]);
  std::vector<DiscreteChain::Entries> rows(probs.size(), row);
  DiscreteChain chain(std::move(rows), probs, std::move(values));
  std::vector<std::size_t> all(probs.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return SplitChain(std::move(chain), MinorizationCert{all, 1.0, probs, 1});
}

// X = eps Y with P(Y = r) = e^{-r} = 1 - P(Y = 0) and a fair sign eps, as an
// i.i.d. chain on the values {-r, 0, r}.
inline SplitChain counterexample_sequence_chain(double r) {
  if (!(r >= 1.0)) throw ValidationError("counterexample sequence needs r >= 1");
  const double p = std::exp(-r);
  return iid_chain({p / 2.0, 1.0 - p, p / 2.0}, {-r, 0.0, r});
}

inline DiscreteLaw counterexample_abs_law(double r) {
  if (!(r >= 1.0)) throw ValidationError("counterexample sequence needs r >= 1");
  return DiscreteLaw({{0.0, -std::expm1(-r)}, {r, std::exp(-r)}});
}

inline std::vector<double> sample_counterexample_sequence(double r, std::size_t n,
                                                          std::uint64_t seed) {
  const SplitChain chain = counterexample_sequence_chain(r);
  const auto idx = simulate_direct(chain, n, seed);
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[i] = chain.chain().state_values()[idx[i]];
  }
  return out;
}

// Rows (1 - p01, p01), (p10, 1 - p10). Default certificate C = {0},
// nu = row of 0, delta = 1; the chain starts from nu so that T_1 and T_2
// share a law.
inline DiscreteChain two_state_kernel(double p01, double p10,
                                      std::optional<std::vector<double>> initial = {}) {
  if (!(p01 > 0.0 && p01 < 1.0 && p10 > 0.0 && p10 < 1.0)) {
    throw ValidationError("two-state chain needs p01, p10 in (0, 1)");
  }
  std::vector<DiscreteChain::Entries> rows = {{{0, 1.0 - p01}, {1, p01}},
                                              {{0, p10}, {1, 1.0 - p10}}};
  std::vector<double> xi = initial.value_or(std::vector<double>{1.0 - p01, p01});
  return DiscreteChain(std::move(rows), std::move(xi), {0.0, 1.0});
}

inline SplitChain two_state_chain(double p01, double p10,
                                  std::optional<std::vector<double>> initial = {}) {
  DiscreteChain chain = two_state_kernel(p01, p10, std::move(initial));
  MinorizationCert cert{{0}, 1.0, {1.0 - p01, p01}, 1};
  return SplitChain(std::move(chain), std::move(cert));
}

inline std::vector<double> two_state_stationary(double p01, double p10) {
  return {p10 / (p01 + p10), p01 / (p01 + p10)};
}

// Law of the gap between visits to 0 (also the law of T_1 when started from
// nu): P(T = 1) = 1 - p01, P(T = k) = p01 p10 (1 - p10)^{k-2} for k >= 2.
inline TailCertifiedLaw two_state_return_time_law(double p01, double p10,
                                                  std::int64_t k_max) {
  if (k_max < 2) throw ValidationError("two_state_return_time_law needs k_max >= 2");
  TailCertifiedLaw law;
  law.head.push_back({1.0, 1.0 - p01});
  for (std::int64_t k = 2; k <= k_max; ++k) {
    law.head.push_back({static_cast<double>(k),
                        p01 * p10 * std::pow(1.0 - p10, static_cast<double>(k - 2))});
  }
  law.tail_mass = p01 * std::pow(1.0 - p10, static_cast<double>(k_max - 1));
  const double tail = law.tail_mass;
  law.tail_psi_bound = [p01, p10, k_max, tail](double lambda) {
    const double rho = std::exp(1.0 / lambda) * (1.0 - p10);
    if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
    // sum_{k > k_max} e^{k / lambda} p01 p10 (1 - p10)^{k-2}
    const double geo = std::pow(rho, static_cast<double>(k_max + 1)) / (1.0 - rho);
    return p01 * p10 / ((1.0 - p10) * (1.0 - p10)) * geo - tail;
  };
  return law;
}

// Uniform i.i.d. draws from {0, ..., k-1}; the state value is its index.
inline SplitChain iid_uniform_chain(std::size_t k) {
  if (k < 1) throw ValidationError("iid_uniform needs k >= 1");
  std::vector<double> values(k);
  for (std::size_t j = 0; j < k; ++j) values[j] = static_cast<double>(j);
  return iid_chain(std::vector<double>(k, 1.0 / static_cast<double>(k)),
                   std::move(values));
}

// I.i.d. Geometric(p) variables on {1, 2, ...}; the state is the draw.
class GeometricIid {
 public:
  using State = std::int64_t;

  explicit GeometricIid(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("geometric source needs p in (0, 1)");
    rate_ = -std::log1p(-p);
  }

  double p() const { return p_; }
  double mean() const { return 1.0 / p_; }

  State sample_nu(Rng& rng) const {
    return static_cast<State>(std::floor(standard_exponential(rng) / rate_)) + 1;
  }
  State sample_initial(Rng& rng) const { return sample_nu(rng); }
  State sample_transition(const State&, Rng& rng) const { return sample_nu(rng); }
  bool in_small_set(const State&) const { return true; }
  double delta() const { return 1.0; }
  State sample_residual(const State&, Rng&) const {
    throw InternalError("geometric source has delta = 1");
  }
  std::uint64_t index_of(const State& x) const { return static_cast<std::uint64_t>(x); }

  // Law of |G - 1/p| with atoms up to g_max and a certified tail.
  TailCertifiedLaw centered_abs_law(std::int64_t g_max) const {
    TailCertifiedLaw law;
    const double mu = mean();
    for (std::int64_t g = 1; g <= g_max; ++g) {
      law.head.push_back({std::abs(static_cast<double>(g) - mu),
                          p_ * std::pow(1.0 - p_, static_cast<double>(g - 1))});
    }
    law.tail_mass = std::pow(1.0 - p_, static_cast<double>(g_max));
    const double p = p_;
    const double tail = law.tail_mass;
    law.tail_psi_bound = [p, mu, g_max, tail](double lambda) {
      // For g > g_max >= mu the atom is g - mu.
      const double rho = std::exp(1.0 / lambda) * (1.0 - p);
      if (!(rho < 1.0) || static_cast<double>(g_max) < mu) {
        return std::numeric_limits<double>::infinity();
      }
      const double geo = std::pow(rho, static_cast<double>(g_max + 1)) / (1.0 - rho);
      return p / (1.0 - p) * std::exp(-mu / lambda) * geo - tail;
    };
    return law;
  }

 private:
  double p_;
  double rate_;
};

// Drift condition PV <= lambda V off C and PV <= K on C.
struct DriftSpec {
  std::vector<double> v;
  double lambda = 0.5;
  double k_bound = 1.0;
  std::vector<std::size_t> small_set;
};

struct DriftReport {
  bool passed = false;
  // Per-state slack: lambda V(x) - PV(x) off C, K - PV(x) on C.
  std::vector<double> slack;
  std::optional<std::size_t> witness;
};

inline constexpr double kDriftTolerance = 1e-12;

inline void check_drift_parameters(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ValidationError("drift lambda must lie in (0, 1)");
  }
}

inline DriftReport check_drift(const DiscreteChain& chain, const DriftSpec& drift) {
  check_drift_parameters(drift.lambda);
  if (drift.v.size() != chain.size()) {
    throw ValidationError("drift function length differs from state count");
  }
  for (double v : drift.v) {
    if (!(v >= 1.0) || !std::isfinite(v)) {
      throw ValidationError("drift function must be finite and >= 1");
    }
  }
  std::vector<char> in_c(chain.size(), 0);
  for (std::size_t c : drift.small_set) {
    if (c >= chain.size()) throw ValidationError("drift small set out of range");
    in_c[c] = 1;
  }
  DriftReport rep;
  rep.passed = true;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const SparseRow& r = chain.row(x);
    double pv = 0.0;
    for (std::size_t k = 0; k < r.index.size(); ++k) pv += r.prob[k] * drift.v[r.index[k]];
    const double cap = in_c[x] ? drift.k_bound : drift.lambda * drift.v[x];
    rep.slack.push_back(cap - pv);
    if (cap - pv < -kDriftTolerance && !rep.witness) {
      rep.witness = x;
      rep.passed = false;
    }
  }
  return rep;
}

struct LoopDriftSpec {
  std::function<double(const LoopState&)> v;
  double lambda = 0.5;
  double k_bound = 1.0;
  // Membership in C; defaults to the origin only.
  std::function<bool(const LoopState&)> in_small_set;
  // Loop states are checked for loop lengths 1..max_loop_checked.
  std::int32_t max_loop_checked = 60;
};

struct LoopDriftReport {
  bool passed = false;
  double origin_pv = 0.0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::optional<LoopState> witness;
};

// PV at the origin is the series sum_n e^{-n} / (2A) (V(n,1,+) + V(n,1,-)).
// It is declared non-summable when it has not settled after 10^5 terms.
inline double loop_origin_pv(const std::function<double(const LoopState&)>& v) {
  constexpr std::int32_t kMaxTerms = 100000;
  const double a = LoopChain::a_const();
  double sum = 0.0;
  int quiet = 0;
  for (std::int32_t n = 1; n <= kMaxTerms; ++n) {
    const double w = std::exp(-static_cast<double>(n)) / (2.0 * a);
    double term = 0.0;
    if (w > 0.0) {
      term = w * (v({n, 1, 1}) + v({n, 1, -1}));
    } else {
      // e^{-n} underflowed; compare in logs so V growing like e^n is caught.
      const double lv = std::log(v({n, 1, 1}) + v({n, 1, -1}));
      term = std::exp(lv - static_cast<double>(n) - std::log(2.0 * a));
    }
    if (!std::isfinite(term)) break;
    sum += term;
    quiet = (term <= 1e-17 * sum) ? quiet + 1 : 0;
    if (quiet >= 20) return sum;
  }
  throw NumericalError("drift function is not summable against the origin row");
}

inline LoopDriftReport check_drift(const LoopChain&, const LoopDriftSpec& drift) {
  check_drift_parameters(drift.lambda);
  if (!drift.v) throw ValidationError("drift function missing");
  auto in_c = drift.in_small_set
                  ? drift.in_small_set
                  : std::function<bool(const LoopState&)>(
                        [](const LoopState& x) { return x.is_origin(); });
  LoopDriftReport rep;
  rep.passed = true;
  auto record = [&](const LoopState& x, double pv) {
    const double vx = drift.v(x);
    if (!(vx >= 1.0) || !std::isfinite(vx)) {
      throw ValidationError("drift function must be finite and >= 1");
    }
    const double slack = (in_c(x) ? drift.k_bound : drift.lambda * vx) - pv;
    if (slack < rep.worst_slack) rep.worst_slack = slack;
    if (slack < -kDriftTolerance && !rep.witness) {
      rep.witness = x;
      rep.passed = false;
    }
  };
  rep.origin_pv = loop_origin_pv(drift.v);
  record(LoopState::origin(), rep.origin_pv);
  for (std::int32_t n = 1; n <= drift.max_loop_checked; ++n) {
    for (std::int8_t s : {std::int8_t{1}, std::int8_t{-1}}) {
      for (std::int32_t k = 1; k <= n; ++k) {
        const LoopState x{n, k, s};
        const LoopState next =
            k < n ? LoopState{n, static_cast<std::int32_t>(k + 1), s} : LoopState::origin();
        record(x, drift.v(next));
      }
    }
  }
  return rep;
}

}  // namespace regen

#endif  // REGEN_ZOO_HPP_
