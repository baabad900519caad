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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "regen/chain.hpp"
#include "regen/error.hpp"
#include "regen/orlicz.hpp"
#include "regen/regeneration.hpp"
#include "regen/stats.hpp"
#include "regen/zoo.hpp"

namespace regen {
namespace {

// Oracles summed term by term, independent of the closed forms in the chain.
double a_series() {
  double s = 0.0;
  for (int n = 1; n < 200; ++n) s += std::exp(-n);
  return s;
}

double loop_series(int power, int from) {
  double s = 0.0;
  for (int n = from; n < 400; ++n) s += std::pow(n, power) * std::exp(-n);
  return s;
}

TEST(LoopChain, ClosedForms) {
  const double a = a_series();
  EXPECT_NEAR(LoopChain::a_const(), a, 1e-14);
  EXPECT_NEAR(LoopChain::a_const(), 0.5819767068693265, 1e-15);
  EXPECT_NEAR(LoopChain::mean_loop_length(), loop_series(1, 1) / a, 1e-12);
  EXPECT_NEAR(LoopChain::mean_loop_length(), 1.5819767068693265, 1e-14);
  EXPECT_NEAR(LoopChain::mean_return_time(), 1.0 + loop_series(1, 1) / a, 1e-12);
  // Kac: pi(origin) = 1 / E T_2.
  EXPECT_NEAR(LoopChain::pi_origin(), 1.0 / LoopChain::mean_return_time(), 1e-14);
  EXPECT_NEAR(LoopChain::pi_origin(), 0.38730016, 1e-8);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_NEAR(LoopChain::loop_length_probability(n), std::exp(-n) / a, 1e-14);
    double tail = 0.0;
    for (int k = n; k < 200; ++k) tail += std::exp(-k) / a;
    EXPECT_NEAR(LoopChain::loop_length_tail(n), tail, 1e-13);
  }
}

TEST(LoopChain, StationaryMassSumsToOne) {
  double total = LoopChain::pi_origin();
  for (int n = 1; n < 200; ++n) total += 2.0 * n * LoopChain::pi_loop(n);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(LoopChain, VarZ1Series) {
  const double a = a_series();
  for (int r : {1, 2, 3, 5, 8, 12}) {
    EXPECT_NEAR(LoopChain::var_z1_indicator(r), loop_series(2, r) / a,
                1e-12 * loop_series(2, r) / a + 1e-300)
        << r;
  }
  EXPECT_THROW(LoopChain::var_z1_indicator(0), ValidationError);
}

TEST(LoopChain, IndicatorFunction) {
  const auto f3 = loop_indicator_function(3);
  EXPECT_EQ(f3(LoopState::origin()), 0.0);
  EXPECT_EQ(f3({2, 1, 1}), 0.0);
  EXPECT_EQ(f3({3, 2, 1}), 1.0);
  EXPECT_EQ(f3({3, 1, -1}), -1.0);
  EXPECT_EQ(f3({7, 7, -1}), -1.0);
  EXPECT_THROW(loop_indicator_function(0), ValidationError);
}

TEST(LoopChain, IndexRoundTrip) {
  EXPECT_EQ(LoopChain::index_of(LoopState::origin()), 0u);
  std::uint64_t expected = 1;
  for (std::int32_t n = 1; n <= 30; ++n) {
    for (std::int32_t k = 1; k <= n; ++k) {
      for (std::int8_t s : {std::int8_t{1}, std::int8_t{-1}}) {
        const LoopState x{n, k, s};
        EXPECT_EQ(LoopChain::index_of(x), expected);
        EXPECT_EQ(LoopChain::state_of(expected), x);
        ++expected;
      }
    }
  }
}

TEST(LoopChain, WalksTheLoop) {
  const LoopChain chain;
  Rng rng(5);
  LoopState x = chain.sample_initial(rng);
  EXPECT_EQ(x.k, 1);
  for (int step = 0; step < 10000; ++step) {
    const LoopState y = chain.sample_transition(x, rng);
    if (x.is_origin()) {
      EXPECT_EQ(y.k, 1);
      EXPECT_GE(y.n, 1);
    } else if (x.k < x.n) {
      EXPECT_EQ(y, (LoopState{x.n, x.k + 1, x.s}));
    } else {
      EXPECT_TRUE(y.is_origin());
    }
    x = y;
  }
}

TEST(LoopChain, SampledLoopLengths) {
  Rng rng(11);
  const int reps = 200000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < reps; ++i) {
    const int n = LoopChain::sample_loop_length(rng);
    ASSERT_GE(n, 1);
    if (n < 8) ++counts[static_cast<std::size_t>(n)];
  }
  for (int n = 1; n < 8; ++n) {
    const double p = LoopChain::loop_length_probability(n);
    const double p_hat = static_cast<double>(counts[static_cast<std::size_t>(n)]) / reps;
    EXPECT_NEAR(p_hat, p, 4.0 * std::sqrt(p * (1 - p) / reps) + 1e-6) << n;
  }
}

// Started from nu, the first regeneration time and the later gaps have the
// same law.
TEST(LoopChain, FirstGapMatchesLaterGaps) {
  const LoopChain chain(LoopChain::Start::kNu);
  std::vector<std::int64_t> t1(12, 0);
  std::vector<std::int64_t> t2(12, 0);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto traj = simulate_split(chain, 60, derive_seed(3, i));
    const RegenDecomposition d = decompose(traj.flags, 1);
    if (d.t_times.size() < 2) continue;
    ++t1[static_cast<std::size_t>(std::min<std::int64_t>(d.t_times[0], 11))];
    ++t2[static_cast<std::size_t>(std::min<std::int64_t>(d.t_times[1], 11))];
  }
  EXPECT_GT(chi_square_two_sample(t1, t2).p_value, 1e-3);
}

TEST(LoopChain, ReturnTimeLawBracket) {
  const TailCertifiedLaw law = LoopChain::return_time_law(40);
  double mass = law.tail_mass;
  double mean_t = 0.0;
  for (const Atom& at : law.head) {
    mass += at.probability;
    mean_t += at.value * at.probability;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(mean_t, LoopChain::mean_return_time(), 1e-12);
  const NormBracket b = orlicz_norm_truncated(law, OrliczIndex(1.0));
  EXPECT_LE(b.lower.value, b.upper.value);
  EXPECT_NEAR(b.lower.value, 3.932345, 1e-5);
}

TEST(LoopChain, TruncatedStationaryMatchesClosedForm) {
  const TruncatedLoopChain t = truncate_loop_chain(1e-6);
  const std::vector<double> pi = loop_pi_closed_form(t.n_max);
  ASSERT_EQ(pi.size(), t.chain.size());
  EXPECT_NEAR(pi[0], LoopChain::pi_origin(), 1e-15);
}

TEST(SparseSign, SecondMomentAndNorm) {
  for (double r : {1.0, 3.0, 5.0, 8.0}) {
    const SplitChain chain = counterexample_sequence_chain(r);
    const auto& values = chain.chain().state_values();
    const auto& probs = chain.cert().nu;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      m1 += probs[j] * values[j];
      m2 += probs[j] * values[j] * values[j];
    }
    EXPECT_NEAR(m1, 0.0, 1e-15);
    EXPECT_NEAR(m2, r * r * std::exp(-r), 1e-14);
    EXPECT_TRUE(orlicz_norm_at_most(counterexample_abs_law(r), OrliczIndex(1.0), 1.0));
  }
  EXPECT_THROW(counterexample_sequence_chain(0.5), ValidationError);
}

TEST(SparseSign, SampledFrequencies) {
  const double r = 3.0;
  const auto xs = sample_counterexample_sequence(r, 200000, 17);
  ASSERT_EQ(xs.size(), 200000u);
  double hits = 0.0;
  double sum = 0.0;
  for (double x : xs) {
    ASSERT_TRUE(x == 0.0 || std::abs(x) == r);
    hits += x != 0.0;
    sum += x;
  }
  const double p = std::exp(-r);
  EXPECT_NEAR(hits / 200000.0, p, 4.0 * std::sqrt(p * (1 - p) / 200000.0));
  EXPECT_NEAR(sum / 200000.0, 0.0, 4.0 * r * std::sqrt(p / 200000.0));
}

TEST(TwoState, StationaryAndReturnTime) {
  const double p01 = 0.3;
  const double p10 = 0.2;
  const auto pi = two_state_stationary(p01, p10);
  EXPECT_NEAR(pi[0], 0.4, 1e-15);
  EXPECT_NEAR(pi[1], 0.6, 1e-15);
  const auto solved = stationary_distribution(two_state_kernel(p01, p10));
  EXPECT_NEAR(solved[0], pi[0], 1e-12);
  const TailCertifiedLaw law = two_state_return_time_law(p01, p10, 400);
  double mass = law.tail_mass;
  double mean_t = 0.0;
  for (const Atom& at : law.head) {
    mass += at.probability;
    mean_t += at.value * at.probability;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(mean_t, 1.0 / pi[0], 1e-9);
  EXPECT_THROW(two_state_kernel(0.0, 0.5), ValidationError);
  EXPECT_THROW(two_state_kernel(0.5, 1.0), ValidationError);
}

TEST(TwoState, SymmetricChainIsIid) {
  const DiscreteChain c = two_state_kernel(0.5, 0.5);
  EXPECT_EQ(c.row(0).prob, c.row(1).prob);
}

TEST(GeometricSource, SampledMeanAndNorm) {
  const GeometricIid g(0.25);
  Rng rng(23);
  std::vector<double> centered;
  for (int i = 0; i < 400000; ++i) {
    const auto x = g.sample_nu(rng);
    ASSERT_GE(x, 1);
    centered.push_back(std::abs(static_cast<double>(x) - g.mean()));
  }
  double s = 0.0;
  for (double v : centered) s += v;
  const NormBracket b = orlicz_norm_truncated(g.centered_abs_law(400), OrliczIndex(1.0));
  const OrliczNorm emp = orlicz_norm_empirical(centered, OrliczIndex(1.0));
  EXPECT_NEAR(emp.value, b.lower.value, 0.03 * b.lower.value);
  EXPECT_LE(b.lower.value, b.upper.value);
}

TEST(Drift, ConstantFunctionOnWholeSpace) {
  const DiscreteChain c = two_state_kernel(0.3, 0.2);
  DriftSpec drift;
  drift.v = {1.0, 1.0};
  drift.lambda = 0.5;
  drift.k_bound = 1.0;
  drift.small_set = {0, 1};
  EXPECT_TRUE(check_drift(c, drift).passed);
}

// Off C = {0}: PV(1) = p10 + 2 (1 - p10) = 2 - p10 must be <= 2 lambda.
TEST(Drift, TwoStateThreshold) {
  for (double p10 : {0.2, 0.5, 0.8}) {
    const DiscreteChain c = two_state_kernel(0.3, p10);
    for (double lambda : {0.55, 0.75, 0.95}) {
      DriftSpec drift;
      drift.v = {1.0, 2.0};
      drift.lambda = lambda;
      drift.k_bound = 2.0;
      drift.small_set = {0};
      const DriftReport rep = check_drift(c, drift);
      EXPECT_EQ(rep.passed, 2.0 - p10 <= 2.0 * lambda) << p10 << " " << lambda;
      if (!rep.passed) {
        ASSERT_TRUE(rep.witness.has_value());
        EXPECT_EQ(*rep.witness, 1u);
      }
    }
  }
}

TEST(Drift, RejectsBadInput) {
  const DiscreteChain c = two_state_kernel(0.3, 0.2);
  DriftSpec drift;
  drift.v = {1.0, 0.5};
  drift.small_set = {0};
  EXPECT_THROW(check_drift(c, drift), ValidationError);
  drift.v = {1.0, 1.0};
  drift.lambda = 1.0;
  EXPECT_THROW(check_drift(c, drift), ValidationError);
  drift.lambda = 0.5;
  drift.v = {1.0};
  EXPECT_THROW(check_drift(c, drift), ValidationError);
}

// V(n, k, s) = b^{n - k + 1}: PV = V / b inside a loop, PV(origin) is a
// geometric series in b / e.
TEST(Drift, LoopGeometricFunction) {
  const LoopChain chain;
  auto v_of = [](double b) {
    return [b](const LoopState& x) {
      return x.is_origin() ? 1.0 : std::pow(b, x.n - x.k + 1);
    };
  };
  LoopDriftSpec drift;
  drift.v = v_of(2.0);
  drift.lambda = 0.5;
  const double q = 2.0 / std::exp(1.0);
  const double origin = q / (1.0 - q) / LoopChain::a_const();
  drift.k_bound = origin + 1e-9;
  LoopDriftReport rep = check_drift(chain, drift);
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.origin_pv, origin, 1e-10);
  drift.k_bound = origin - 0.1;
  rep = check_drift(chain, drift);
  EXPECT_FALSE(rep.passed);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_TRUE(rep.witness->is_origin());
  // lambda below 1/b fails inside the loops.
  drift.k_bound = 10.0;
  drift.lambda = 0.4;
  rep = check_drift(chain, drift);
  EXPECT_FALSE(rep.passed);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_FALSE(rep.witness->is_origin());
  drift.v = v_of(3.0);
  drift.lambda = 0.5;
  EXPECT_THROW(check_drift(chain, drift), NumericalError);
}

}  // namespace
}  // namespace regen
