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

// Walks through the library on the loop chain: closed forms, a solved
// stationary law, one split trajectory cut into blocks, and block estimates
// from a few hundred paths.

#include <cstdio>
#include <vector>

#include "regen/chain.hpp"
#include "regen/estimators.hpp"
#include "regen/orlicz.hpp"
#include "regen/regeneration.hpp"
#include "regen/zoo.hpp"

int main() {
  using namespace regen;
  std::printf("E T2 = %.6f, pi(origin) = %.9f\n", LoopChain::mean_return_time(),
              LoopChain::pi_origin());

  const TruncatedLoopChain tr = truncate_loop_chain(1e-8);
  const std::vector<double> pi = stationary_distribution(tr.chain);
  std::printf("truncated at %d loops, %zu states, solved pi(origin) = %.9f\n", static_cast<int>(tr.n_max),
              tr.chain.size(), pi[0]);

  const LoopChain loop;
  const auto traj = simulate_split(loop, 40, 2026);
  const RegenDecomposition d = decompose(traj.flags, 1);
  std::printf("40 steps, %lld complete blocks\n", static_cast<long long>(d.n_blocks));
  for (const IndexRange& b : d.blocks) std::printf("  block [%zu, %zu)\n", b.begin, b.end);

  FunctionClass<LoopState> cls;
  cls.add("f_r3", loop_indicator_function(3));
  std::vector<PathSummary> paths;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto t = simulate_split(loop, 2000, derive_seed(7, s, Stream::kMain));
    paths.push_back(summarize_path<LoopState>(t.states, decompose(t.flags, 1), cls, true));
  }
  const BlockStats st = block_statistics(paths, cls.names);
  std::printf("blocks %lld, mean T2 %.4f (se %.4f), Var Z1(f_3) %.4f vs %.4f\n",
              static_cast<long long>(st.block_count), st.mean_t2, st.se_mean_t2,
              st.var_z1[0], LoopChain::var_z1_indicator(3));
  std::printf("psi_1 norm of T2: %.6f\n",
              orlicz_norm_truncated(LoopChain::return_time_law(60), OrliczIndex(1.0)).upper.value);
  return 0;
}
