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

#ifndef REGEN_CALIBRATION_HPP_
#define REGEN_CALIBRATION_HPP_

// Multiplicative grid search for the smallest universal constant that makes
// a bound dominate Monte Carlo tail estimates.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>

#include "regen/error.hpp"
#include "regen/stats.hpp"

namespace regen {

// One grid point of a Monte Carlo tail estimate.
struct TailPoint {
  double t = 0.0;
  double estimate = 0.0;
  double se = 0.0;
};

inline constexpr double kCalibrationStart = 0.01;
inline constexpr double kCalibrationFactor = 1.05;
inline constexpr double kCalibrationLimit = 1000.0;

// K-th candidate of the search grid, 0.01 * 1.05^j computed without drift.
inline double calibration_candidate(int j) {
  return kCalibrationStart * std::pow(kCalibrationFactor, j);
}

// True when bound(t) clears min(1, p + 3 se) at every point.
inline bool dominates_with_slack(const std::function<double(double)>& bound,
                                 std::span<const TailPoint> points) {
  for (const TailPoint& p : points) {
    const double target = std::min(1.0, p.estimate + kSeSlack * p.se);
    if (bound(p.t) < target) return false;
  }
  return true;
}

// Smallest candidate K with bound(K, t) >= min(1, p(t) + 3 se(t)) on every
// grid point. The target is capped at 1 because every bound is.
inline double calibrate_constant(
    const std::function<double(double k, double t)>& bound,
    std::span<const TailPoint> points) {
  if (points.empty()) throw ValidationError("calibration grid is empty");
  for (int j = 0;; ++j) {
    const double k = calibration_candidate(j);
    if (k > kCalibrationLimit) break;
    auto at_k = [&](double t) { return bound(k, t); };
    if (dominates_with_slack(at_k, points)) return k;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "no constant up to %g makes the bound dominate the estimates",
                kCalibrationLimit);
  throw CalibrationError(buf);
}

}  // namespace regen

#endif  // REGEN_CALIBRATION_HPP_
