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

#ifndef REGEN_REGENERATION_HPP_
#define REGEN_REGENERATION_HPP_

// Cutting a flagged trajectory into the initial piece Z_0, the complete
// regeneration blocks Z_1..Z_N and the incomplete remainder.
//
// Positions are 1-based in the comments, matching the usual notation;
// ranges are stored 0-based and half-open.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regen/error.hpp"

namespace regen {

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct RegenDecomposition {
  std::int64_t m = 1;
  std::size_t n = 0;
  // Gaps T_1, T_2, ... between flagged skeleton times, in skeleton units.
  std::vector<std::int64_t> t_times;
  // S_i = T_1 + ... + T_i.
  std::vector<std::int64_t> s_times;
  // N = sup{i : m S_{i+1} + m - 1 <= n}, sup of the empty set = 0.
  std::int64_t n_blocks = 0;
  IndexRange initial;
  std::vector<IndexRange> blocks;
  IndexRange remainder;
};

// flags[i] is R_{i+1}. Only skeleton positions km carry flags; a flag
// anywhere else is rejected.
inline RegenDecomposition decompose(std::span<const std::uint8_t> flags,
                                    std::int64_t m) {
  if (m < 1) throw ValidationError("decompose: m must be >= 1");
  RegenDecomposition d;
  d.m = m;
  d.n = flags.size();
  const auto n = static_cast<std::int64_t>(flags.size());
  std::int64_t prev = 0;
  for (std::int64_t pos = 1; pos <= n; ++pos) {
    if (!flags[static_cast<std::size_t>(pos - 1)]) continue;
    if (pos % m != 0) {
      throw ValidationError("regeneration flag at position " +
                            std::to_string(pos) + " is not a multiple of m");
    }
    const std::int64_t k = pos / m;
    d.t_times.push_back(k - prev);
    d.s_times.push_back(k);
    prev = k;
  }
  // j = number of S_k whose block end m S_k + m - 1 fits in 1..n.
  std::int64_t j = 0;
  for (std::int64_t s : d.s_times) {
    if (m * s + m - 1 <= n) ++j;
  }
  d.n_blocks = j >= 1 ? j - 1 : 0;
  if (j == 0) {
    d.initial = {0, static_cast<std::size_t>(n)};
    d.remainder = {static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    return d;
  }
  const auto end_of = [m](std::int64_t s) {
    return static_cast<std::size_t>(m * s + m - 1);
  };
  d.initial = {0, end_of(d.s_times[0])};
  for (std::int64_t i = 0; i < d.n_blocks; ++i) {
    // Block i+1 covers m(S_{i+1} + 1) .. m S_{i+2} + m - 1.
    d.blocks.push_back({end_of(d.s_times[static_cast<std::size_t>(i)]),
                        end_of(d.s_times[static_cast<std::size_t>(i + 1)])});
  }
  d.remainder = {end_of(d.s_times[static_cast<std::size_t>(d.n_blocks)]),
                 static_cast<std::size_t>(n)};
  return d;
}

struct BlockSums {
  double z0 = 0.0;
  std::vector<double> blocks;
  double remainder = 0.0;

  double total() const {
    double s = z0;
    for (double b : blocks) s += b;
    return s + remainder;
  }
};

inline double range_sum(std::span<const double> values, IndexRange r) {
  double s = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) s += values[i];
  return s;
}

// values[i] = f(X_{i+1}).
inline BlockSums block_sums(const RegenDecomposition& d,
                            std::span<const double> values) {
  if (values.size() != d.n) {
    throw ValidationError("block_sums: trajectory length differs from decomposition");
  }
  BlockSums out;
  out.z0 = range_sum(values, d.initial);
  out.blocks.reserve(d.blocks.size());
  for (const IndexRange& r : d.blocks) out.blocks.push_back(range_sum(values, r));
  out.remainder = range_sum(values, d.remainder);
  return out;
}

// Lengths m T_{i+1} of the complete blocks, i = 1..N.
inline std::vector<std::int64_t> complete_gaps(const RegenDecomposition& d) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 1; i <= d.n_blocks; ++i) {
    out.push_back(d.t_times[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace regen

#endif  // REGEN_REGENERATION_HPP_
