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

#ifndef REGEN_RNG_HPP_
#define REGEN_RNG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace regen {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent random streams carved out of one base seed.
enum class Stream : std::uint64_t {
  kMain = 1,
  kPilot = 2,
  kValidation = 3,
  kAuxiliary = 4,
};

// Seed of replication `index` in `stream`. Pure function of its inputs, so a
// replication sees the same randomness whichever worker thread runs it.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::uint64_t index,
                                           Stream stream = Stream::kMain) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ splitmix64(index));
}

// Uniform on [0, 1) with 53 random bits. Used instead of
// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline int rademacher(Rng& rng) { return (rng() >> 63) != 0 ? 1 : -1; }

inline double standard_exponential(Rng& rng) {
  return -std::log1p(-uniform01(rng));
}

// Index drawn from a cumulative distribution (last entry treated as 1).
inline std::size_t sample_from_cdf(std::span<const double> cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace regen

#endif  // REGEN_RNG_HPP_
