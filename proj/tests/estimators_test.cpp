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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "regen/chain.hpp"
#include "regen/error.hpp"
#include "regen/estimators.hpp"
#include "regen/regeneration.hpp"
#include "regen/stats.hpp"
#include "regen/zoo.hpp"

namespace regen {
namespace {

using Idx = std::size_t;

FunctionClass<Idx> table_class(const std::vector<std::vector<double>>& tables) {
  FunctionClass<Idx> cls;
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const std::vector<double> t = tables[j];
    cls.add("f" + std::to_string(j), [t](const Idx& x) { return t[x]; });
  }
  return cls;
}

TEST(EmpiricalProcess, ZeroAndSymmetricClasses) {
  const std::vector<Idx> xs = {0, 1, 1, 2, 0, 2, 2};
  EXPECT_EQ(empirical_process_sup<Idx>(xs, table_class({{0.0, 0.0, 0.0}})), 0.0);
  const std::vector<double> f = {1.0, -2.0, 0.5};
  const std::vector<double> g = {-1.0, 2.0, -0.5};
  // 2 * 1 + 2 * (-2) + 3 * 0.5 = -0.5.
  EXPECT_DOUBLE_EQ(empirical_process_sup<Idx>(xs, table_class({f})), 0.5);
  EXPECT_DOUBLE_EQ(empirical_process_sup<Idx>(xs, table_class({f, g})), 0.5);
  EXPECT_THROW(empirical_process_sup<Idx>(xs, FunctionClass<Idx>{}), ValidationError);
}

TEST(EmpiricalProcess, BruteForce) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> tables(5, std::vector<double>(4));
    for (auto& t : tables) {
      for (double& v : t) v = u(gen);
    }
    std::vector<Idx> xs(30);
    for (Idx& x : xs) x = gen() % 4;
    double best = 0.0;
    for (const auto& t : tables) {
      double s = 0.0;
      for (Idx x : xs) s += t[x];
      best = std::max(best, std::abs(s));
    }
    EXPECT_NEAR(empirical_process_sup<Idx>(xs, table_class(tables)), best, 1e-12);
  }
}

TEST(EmpiricalProcess, ClassBoundIsEnforced) {
  FunctionClass<Idx> cls = table_class({{0.0, 3.0}});
  cls.sup_bound = 1.0;
  const std::vector<Idx> xs = {0, 1};
  EXPECT_THROW(empirical_process_sup<Idx>(xs, cls), ValidationError);
}

std::vector<PathSummary> summarize_many(const SplitChain& chain,
                                        const FunctionClass<Idx>& cls,
                                        std::size_t n, std::size_t paths,
                                        std::uint64_t seed) {
  std::vector<PathSummary> out;
  for (std::size_t i = 0; i < paths; ++i) {
    const auto traj = simulate_split(chain, n, derive_seed(seed, i));
    const RegenDecomposition d = decompose(traj.flags, 1);
    out.push_back(summarize_path<Idx>(traj.states, d, cls, true));
  }
  return out;
}

TEST(BlockStatistics, PathSummaryAddsUp) {
  const SplitChain chain = two_state_chain(0.3, 0.2);
  const FunctionClass<Idx> cls = table_class({{1.0, -1.0}, {0.25, 2.0}});
  const auto paths = summarize_many(chain, cls, 300, 20, 5);
  for (const PathSummary& p : paths) {
    for (std::size_t j = 0; j < cls.size(); ++j) {
      double s = p.initial[j] + p.remainder[j];
      for (double b : p.blocks[j]) s += b;
      EXPECT_NEAR(s, p.total[j], 1e-9);
    }
    EXPECT_EQ(static_cast<std::int64_t>(p.gaps.size()), p.n_blocks);
  }
}

// For an i.i.d. chain every step regenerates, so blocks are single draws.
TEST(BlockStatistics, IidReduction) {
  const SplitChain chain = iid_uniform_chain(6);
  const std::vector<double> t = {0.0, 1.0, 4.0, -2.0, 0.5, 3.0};
  const FunctionClass<Idx> cls = table_class({t});
  const auto traj = simulate_split(chain, 5000, 9);
  const RegenDecomposition d = decompose(traj.flags, 1);
  const std::vector<PathSummary> paths = {summarize_path<Idx>(traj.states, d, cls, true)};
  const std::vector<std::string> names = cls.names;
  const BlockStats st = block_statistics(paths, names);
  EXPECT_EQ(st.mean_t2, 1.0);
  std::vector<double> vals;
  for (const IndexRange& r : d.blocks) {
    ASSERT_EQ(r.size(), 1u);
    vals.push_back(t[traj.states[r.begin]]);
  }
  EXPECT_NEAR(st.var_z1[0], sample_variance(vals), 1e-9);
  EXPECT_NEAR(asymptotic_variance(st, 1)[0], sample_variance(vals), 1e-9);
  EXPECT_NEAR(st.mean_z1[0], mean(vals), 1e-12);
}

TEST(BlockStatistics, ZeroFunctionHasZeroVariance) {
  const SplitChain chain = two_state_chain(0.3, 0.2);
  const FunctionClass<Idx> cls = table_class({{0.0, 0.0}});
  const auto paths = summarize_many(chain, cls, 200, 10, 1);
  const BlockStats st = block_statistics(paths, cls.names);
  EXPECT_EQ(asymptotic_variance(st, 1)[0], 0.0);
  EXPECT_EQ(asymptotic_variance(st, 2)[0], 0.0);
  EXPECT_THROW(asymptotic_variance(st, 0), ValidationError);
}

TEST(BlockStatistics, NeedsBlocks) {
  const SplitChain chain = two_state_chain(0.3, 0.2);
  const FunctionClass<Idx> cls = table_class({{1.0, 0.0}});
  const auto traj = simulate_split(chain, 2, 1);
  const RegenDecomposition d = decompose(traj.flags, 1);
  const std::vector<PathSummary> paths = {summarize_path<Idx>(traj.states, d, cls, false)};
  EXPECT_THROW(block_statistics(paths, cls.names), ValidationError);
}

TEST(BlockStatistics, PathOrderDoesNotMatter) {
  const SplitChain chain = two_state_chain(0.3, 0.2);
  const FunctionClass<Idx> cls = table_class({{1.0, -1.0}});
  auto paths = summarize_many(chain, cls, 200, 30, 2);
  const BlockStats a = block_statistics(paths, cls.names);
  std::reverse(paths.begin(), paths.end());
  const BlockStats b = block_statistics(paths, cls.names);
  EXPECT_EQ(a.block_count, b.block_count);
  EXPECT_NEAR(a.mean_t2, b.mean_t2, 1e-12);
  EXPECT_NEAR(a.var_z1[0], b.var_z1[0], 1e-12);
  EXPECT_NEAR(a.cov_z1z2[0], b.cov_z1z2[0], 1e-12);
}

TEST(BlockStatistics, LoopChainMatchesClosedForms) {
  const LoopChain chain;
  FunctionClass<LoopState> cls;
  cls.add("f3", loop_indicator_function(3));
  std::vector<PathSummary> paths;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto traj = simulate_split(chain, 80, derive_seed(4, i));
    const RegenDecomposition d = decompose(traj.flags, 1);
    paths.push_back(summarize_path<LoopState>(traj.states, d, cls, true));
  }
  const BlockStats st = block_statistics(paths, cls.names, 2);
  EXPECT_NEAR(st.mean_t2, LoopChain::mean_return_time(), 3.0 * st.se_mean_t2);
  EXPECT_NEAR(st.var_z1[0], LoopChain::var_z1_indicator(3), 3.0 * st.se_var_z1[0]);
  EXPECT_NEAR(st.mean_z1[0], 0.0, 3.0 * st.se_mean_z1[0]);
}

TEST(Truncation, BoundedClass) {
  const SplitChain chain = iid_uniform_chain(4);
  const FunctionClass<Idx> cls = table_class({{1.0, -1.0, 1.0, -1.0}});
  auto gen = [&](std::uint64_t s) { return simulate_direct(chain, 50, s); };
  const TruncationReport rep = truncation_split<Idx>(gen, cls, OrliczIndex(1.0), 200, 3);
  EXPECT_EQ(rep.rho, 8.0);
  EXPECT_EQ(rep.exceedance, 0.0);
  EXPECT_EQ(rep.f2_mean, 0.0);
  EXPECT_TRUE(rep.exceedance_ok);
  EXPECT_TRUE(rep.f2_ok);
  EXPECT_FALSE(rep.degenerate);
}

TEST(Truncation, ZeroClassIsDegenerate) {
  const SplitChain chain = iid_uniform_chain(4);
  const FunctionClass<Idx> cls = table_class({{0.0, 0.0, 0.0, 0.0}});
  auto gen = [&](std::uint64_t s) { return simulate_direct(chain, 10, s); };
  const TruncationReport rep = truncation_split<Idx>(gen, cls, OrliczIndex(1.0), 50, 3);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_EQ(rep.rho, 0.0);
  EXPECT_THROW(truncation_split<Idx>(gen, cls, OrliczIndex(1.0), 1, 3), ValidationError);
}

TEST(Truncation, HeavyClassExceedsRarely) {
  const SplitChain chain = counterexample_sequence_chain(4.0);
  FunctionClass<Idx> cls;
  const auto values = chain.chain().state_values();
  const std::vector<double> vals(values.begin(), values.end());
  cls.add("x", [vals](const Idx& i) { return vals[i]; });
  auto gen = [&](std::uint64_t s) { return simulate_direct(chain, 20, s); };
  const TruncationReport rep = truncation_split<Idx>(gen, cls, OrliczIndex(1.0), 20000, 8);
  EXPECT_TRUE(rep.exceedance_ok);
  EXPECT_TRUE(rep.f2_ok);
  EXPECT_GT(rep.rho, 0.0);
}

TEST(MaxSupNorm, SingleObservation) {
  const std::vector<double> xs = {2.0};
  EXPECT_NEAR(max_sup_norm(xs, OrliczIndex(1.0)).value, 2.0 / std::log(2.0), 1e-9);
}

}  // namespace
}  // namespace regen
