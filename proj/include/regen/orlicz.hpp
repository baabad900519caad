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

#ifndef REGEN_ORLICZ_HPP_
#define REGEN_ORLICZ_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "regen/error.hpp"

namespace regen {

// Exponent of the exponential Orlicz function, restricted to (0, 1].
class OrliczIndex {
 public:
  explicit OrliczIndex(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw ValidationError("Orlicz index must lie in (0, 1], got " +
                            std::to_string(alpha));
    }
  }
  double value() const { return alpha_; }
  friend bool operator==(OrliczIndex, OrliczIndex) = default;

 private:
  double alpha_;
};

struct Atom {
  double value;
  double probability;
};

namespace detail {

// Neumaier-compensated sum; normalization checks run at 1e-12.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

// Finitely supported probability law, typically the law of |X|.
class DiscreteLaw {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;

  explicit DiscreteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("discrete law has no atoms");
    std::vector<double> probs;
    probs.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
      if (!std::isfinite(a.value)) {
        throw ValidationError("discrete law has a non-finite atom value");
      }
      if (!(a.probability > 0.0)) {
        throw ValidationError("discrete law has a non-positive probability");
      }
      probs.push_back(a.probability);
    }
    const double total = detail::compensated_sum(probs);
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "discrete law is not normalized: total mass " << total;
      throw ValidationError(msg.str());
    }
  }

  std::span<const Atom> atoms() const { return atoms_; }

  // Law of c * X.
  DiscreteLaw scaled(double c) const {
    std::vector<Atom> out = atoms_;
    for (Atom& a : out) a.value *= c;
    return DiscreteLaw(std::move(out));
  }

  // Law of |X|.
  DiscreteLaw absolute() const {
    std::vector<Atom> out = atoms_;
    for (Atom& a : out) a.value = std::abs(a.value);
    return DiscreteLaw(std::move(out));
  }

  double max_abs_value() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m = std::max(m, std::abs(a.value));
    return m;
  }

  // P(|X| >= t).
  double tail_probability(double t) const {
    std::vector<double> probs;
    for (const Atom& a : atoms_) {
      if (std::abs(a.value) >= t) probs.push_back(a.probability);
    }
    return detail::compensated_sum(probs);
  }

 private:
  std::vector<Atom> atoms_;
};

// Law of independent X + Y, computed exactly on the product of supports.
inline DiscreteLaw convolve(const DiscreteLaw& x, const DiscreteLaw& y) {
  std::vector<Atom> out;
  out.reserve(x.atoms().size() * y.atoms().size());
  for (const Atom& a : x.atoms()) {
    for (const Atom& b : y.atoms()) {
      out.push_back({a.value + b.value, a.probability * b.probability});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Atom& l, const Atom& r) { return l.value < r.value; });
  std::vector<Atom> merged;
  for (const Atom& a : out) {
    if (!merged.empty() && merged.back().value == a.value) {
      merged.back().probability += a.probability;
    } else {
      merged.push_back(a);
    }
  }
  return DiscreteLaw(std::move(merged));
}

struct OrliczNorm {
  double value;
  OrliczIndex alpha;
};

inline double psi_alpha(double x, OrliczIndex alpha) {
  if (!(x >= 0.0)) throw DomainError("psi_alpha requires x >= 0");
  return std::expm1(std::pow(x, alpha.value()));
}

namespace detail {

inline constexpr int kBracketCap = 200;
inline constexpr int kBisectionCap = 200;

// E psi_alpha(|X| / lambda) for atoms (values, probs), possibly
// sub-normalized. Saturates at +inf.
inline double expected_psi(std::span<const double> values,
                           std::span<const double> probs, double lambda,
                           double alpha) {
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = std::abs(values[i]);
    if (x == 0.0) continue;
    const double ratio = x / lambda;
    const double e = std::expm1(alpha == 1.0 ? ratio : std::pow(ratio, alpha));
    sum += probs[i] * e;
    if (!std::isfinite(sum)) return std::numeric_limits<double>::infinity();
  }
  return sum;
}

// Smallest lambda with g(lambda) <= 1 for a continuous, strictly
// decreasing g with g(0+) > 1 >= g(inf). Returns the right end of the final
// bracket, so g(result) <= 1 always holds.
inline double solve_decreasing(const std::function<double(double)>& g,
                               double start, double tol) {
  if (!(start > 0.0) || !std::isfinite(start)) start = 1.0;
  double lo = start;
  double hi = start;
  int steps = 0;
  if (g(start) > 1.0) {
    while (g(hi) > 1.0) {
      lo = hi;
      hi *= 2.0;
      if (++steps > kBracketCap) {
        std::ostringstream msg;
        msg << "Orlicz norm: failed to bracket root, last bracket [" << lo
            << ", " << hi << "]";
        throw NumericalError(msg.str());
      }
    }
  } else {
    while (g(lo) <= 1.0) {
      hi = lo;
      lo *= 0.5;
      if (++steps > kBracketCap) {
        std::ostringstream msg;
        msg << "Orlicz norm: failed to bracket root, last bracket [" << lo
            << ", " << hi << "]";
        throw NumericalError(msg.str());
      }
    }
  }
  for (int it = 0; it < kBisectionCap; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double at_hi = g(hi);
  if (!(at_hi <= 1.0 && at_hi >= 1.0 - tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Orlicz norm: bisection stalled in [" << lo << ", " << hi
        << "] with E psi = " << at_hi;
    throw NumericalError(msg.str());
  }
  return hi;
}

inline double norm_of_atoms(std::span<const double> values,
                            std::span<const double> probs, OrliczIndex alpha,
                            double tol) {
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) return 0.0;
  const double a = alpha.value();
  auto g = [&](double lambda) {
    return expected_psi(values, probs, lambda, a);
  };
  return solve_decreasing(g, max_abs / std::numbers::ln2, tol);
}

}  // namespace detail

inline constexpr double kDefaultOrliczTolerance = 1e-10;

// inf{lambda > 0 : E psi_alpha(|X| / lambda) <= 1} for a finite law.
// The returned value satisfies 1 - tol <= E psi(|X| / value) <= 1.
inline OrliczNorm orlicz_norm_exact(const DiscreteLaw& law, OrliczIndex alpha,
                                    double tol = kDefaultOrliczTolerance) {
  std::vector<double> values;
  std::vector<double> probs;
  for (const Atom& a : law.atoms()) {
    values.push_back(a.value);
    probs.push_back(a.probability);
  }
  return {detail::norm_of_atoms(values, probs, alpha, tol), alpha};
}

// Exact test of ||X||_psi <= lambda, i.e. E psi(|X| / lambda) <= 1.
inline bool orlicz_norm_at_most(const DiscreteLaw& law, OrliczIndex alpha,
                                double lambda) {
  if (law.max_abs_value() == 0.0) return lambda >= 0.0;
  if (!(lambda > 0.0)) return false;
  double sum = 0.0;
  for (const Atom& a : law.atoms()) {
    if (a.value == 0.0) continue;
    sum += a.probability * psi_alpha(std::abs(a.value) / lambda, alpha);
  }
  return sum <= 1.0;
}

// Plug-in estimator: the exact norm of the empirical measure of |samples|.
// No bias correction; for heavy tails it underestimates.
inline OrliczNorm orlicz_norm_empirical(std::span<const double> samples,
                                        OrliczIndex alpha,
                                        double tol = kDefaultOrliczTolerance) {
  if (samples.empty()) {
    throw ValidationError("empirical Orlicz norm of an empty sample");
  }
  const std::vector<double> probs(samples.size(),
                                  1.0 / static_cast<double>(samples.size()));
  return {detail::norm_of_atoms(samples, probs, alpha, tol), alpha};
}

// A law with infinite support, given by finitely many head atoms plus a
// certified description of the rest: total tail mass and an upper bound on
// the tail's contribution to E psi_alpha(|X| / lambda).
struct TailCertifiedLaw {
  std::vector<Atom> head;
  double tail_mass = 0.0;
  std::function<double(double lambda)> tail_psi_bound;
};

struct NormBracket {
  OrliczNorm lower;
  OrliczNorm upper;
};

// Encloses the norm of a tail-certified law: `lower` ignores the tail,
// `upper` charges it with tail_psi_bound.
inline NormBracket orlicz_norm_truncated(const TailCertifiedLaw& law,
                                         OrliczIndex alpha,
                                         double tol = kDefaultOrliczTolerance) {
  if (law.head.empty()) throw ValidationError("truncated law has no atoms");
  if (!law.tail_psi_bound) {
    throw ValidationError("truncated law needs a tail bound");
  }
  std::vector<double> values;
  std::vector<double> probs;
  for (const Atom& a : law.head) {
    if (!(a.probability > 0.0) || !std::isfinite(a.value)) {
      throw ValidationError("truncated law has an invalid atom");
    }
    values.push_back(a.value);
    probs.push_back(a.probability);
  }
  const double mass = detail::compensated_sum(probs) + law.tail_mass;
  if (law.tail_mass < 0.0 ||
      std::abs(mass - 1.0) > DiscreteLaw::kNormalizationTolerance) {
    throw ValidationError("truncated law: head mass + tail mass != 1");
  }
  const double lower = detail::norm_of_atoms(values, probs, alpha, tol);
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  auto g = [&](double lambda) {
    const double tail = law.tail_psi_bound(lambda);
    if (!(tail >= 0.0)) return std::numeric_limits<double>::infinity();
    return detail::expected_psi(values, probs, lambda, alpha.value()) + tail;
  };
  const double start = std::max(lower, max_abs / std::numbers::ln2);
  const double upper = detail::solve_decreasing(g, start, tol);
  return {{lower, alpha}, {upper, alpha}};
}

// Chebyshev-type tail bound min(1, 2 exp(-(t / ||X||)^alpha)).
inline double tail_from_norm(const OrliczNorm& norm, double t) {
  if (!(t >= 0.0)) throw DomainError("tail_from_norm requires t >= 0");
  if (norm.value == 0.0) return t > 0.0 ? 0.0 : 1.0;
  return std::min(
      1.0, 2.0 * std::exp(-std::pow(t / norm.value, norm.alpha.value())));
}

}  // namespace regen

#endif  // REGEN_ORLICZ_HPP_
