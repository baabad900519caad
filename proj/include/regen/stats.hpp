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

#ifndef REGEN_STATS_HPP_
#define REGEN_STATS_HPP_

// Small statistical helpers: binomial standard errors, moments, and a
// two-sample chi-square homogeneity test.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "regen/error.hpp"
#include "regen/orlicz.hpp"

namespace regen {

inline constexpr double kSeSlack = 3.0;

inline double binomial_se(double p_hat, std::int64_t reps) {
  if (reps <= 0) throw ValidationError("standard error needs reps > 0");
  return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) /
                   static_cast<double>(reps));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientDataError("mean of empty sample");
  return detail::compensated_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientDataError("variance needs two samples");
  const double mu = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - mu;
    sq[i] = d * d;
  }
  return detail::compensated_sum(sq) / static_cast<double>(xs.size() - 1);
}

inline double standard_error_of_mean(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Delta-method standard error of the sample variance,
// sqrt((mu4 - s^4) / n).
inline double standard_error_of_variance(std::span<const double> xs) {
  const double mu = mean(xs);
  std::vector<double> q(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - mu;
    q[i] = d * d * d * d;
  }
  const double mu4 = detail::compensated_sum(q) / static_cast<double>(xs.size());
  const double s2 = sample_variance(xs);
  return std::sqrt(std::max(0.0, mu4 - s2 * s2) /
                   static_cast<double>(xs.size()));
}

// Counts of consecutive pairs (x_i, x_{i+1}) over `categories` classes;
// indices at or past the last class are lumped into it.
inline std::vector<std::int64_t> transition_counts(std::span<const std::uint64_t> idx,
                                                   std::size_t categories) {
  if (categories == 0) throw ValidationError("transition_counts needs categories > 0");
  std::vector<std::int64_t> out(categories * categories, 0);
  auto cat = [&](std::uint64_t x) {
    return static_cast<std::size_t>(std::min<std::uint64_t>(x, categories - 1));
  };
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    ++out[cat(idx[i]) * categories + cat(idx[i + 1])];
  }
  return out;
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Homogeneity test of two count vectors over the same categories.
// Categories empty in both samples are dropped.
inline ChiSquareResult chi_square_two_sample(std::span<const std::int64_t> a,
                                             std::span<const std::int64_t> b) {
  if (a.size() != b.size()) {
    throw ValidationError("chi-square: count vectors differ in length");
  }
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) throw ValidationError("chi-square: negative count");
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) {
    throw InsufficientDataError("chi-square: empty sample");
  }
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  ChiSquareResult res;
  int used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = static_cast<double>(a[i] + b[i]);
    if (s == 0.0) continue;
    const double d = ka * static_cast<double>(a[i]) - kb * static_cast<double>(b[i]);
    res.statistic += d * d / s;
    ++used;
  }
  res.dof = used - 1;
  if (res.dof <= 0) {
    res.p_value = 1.0;
    return res;
  }
  boost::math::chi_squared dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

}  // namespace regen

#endif  // REGEN_STATS_HPP_
