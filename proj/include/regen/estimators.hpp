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

#ifndef REGEN_ESTIMATORS_HPP_
#define REGEN_ESTIMATORS_HPP_

// Regeneration-based estimators: path sums and block sums for a finite
// function class, pooled block statistics, asymptotic variance, and the
// truncation diagnostics used for unbounded classes.
//
// Countable classes enter as finite surrogates; every bound here is
// dimension-free in the class size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regen/error.hpp"
#include "regen/orlicz.hpp"
#include "regen/parallel.hpp"
#include "regen/regeneration.hpp"
#include "regen/rng.hpp"
#include "regen/stats.hpp"

namespace regen {

template <class State>
struct FunctionClass {
  std::vector<std::string> names;
  std::vector<std::function<double(const State&)>> functions;
  // Uniform bound a on |f|, when the class is bounded.
  std::optional<double> sup_bound;

  std::size_t size() const { return functions.size(); }

  void add(std::string name, std::function<double(const State&)> f) {
    names.push_back(std::move(name));
    functions.push_back(std::move(f));
  }

  void require_nonempty() const {
    if (functions.empty()) throw ValidationError("function class is empty");
  }

  // Values of all functions at x, with the sup_bound spot check.
  void evaluate(const State& x, std::span<double> out) const {
    for (std::size_t j = 0; j < functions.size(); ++j) {
      const double v = functions[j](x);
      if (sup_bound && std::abs(v) > *sup_bound + 1e-12) {
        throw ValidationError("function '" + names[j] + "' exceeds the class bound");
      }
      out[j] = v;
    }
  }
};

// sup_f |f(X_1) + ... + f(X_n)|.
template <class State>
double empirical_process_sup(std::span<const State> states,
                             const FunctionClass<State>& cls) {
  cls.require_nonempty();
  std::vector<double> sums(cls.size(), 0.0);
  std::vector<double> v(cls.size());
  for (const State& x : states) {
    cls.evaluate(x, v);
    for (std::size_t j = 0; j < v.size(); ++j) sums[j] += v[j];
  }
  double best = 0.0;
  for (double s : sums) best = std::max(best, std::abs(s));
  return best;
}

// Everything the harness and the block estimators read off one trajectory.
struct PathSummary {
  // Per function: the path sum, Z_0, and the remainder sum.
  std::vector<double> total;
  std::vector<double> initial;
  std::vector<double> remainder;
  // Per function, sum over i of f(X_i)^2.
  std::vector<double> square_sum;
  // blocks[j][b] = Z_{b+1}(f_j) for complete blocks; kept on request.
  std::vector<std::vector<double>> blocks;
  // T_2 .. T_{N+1}.
  std::vector<std::int64_t> gaps;
  // T_1, or 0 when the path has no flag.
  std::int64_t t1 = 0;
  std::int64_t n_blocks = 0;
  std::int64_t remainder_length = 0;
  // max_i sup_f |f(X_i)|.
  double max_sup = 0.0;
};

template <class State>
PathSummary summarize_path(std::span<const State> states,
                           const RegenDecomposition& d,
                           const FunctionClass<State>& cls, bool keep_blocks) {
  cls.require_nonempty();
  if (states.size() != d.n) {
    throw ValidationError("trajectory length differs from decomposition");
  }
  const std::size_t k = cls.size();
  PathSummary s;
  s.total.assign(k, 0.0);
  s.initial.assign(k, 0.0);
  s.remainder.assign(k, 0.0);
  s.square_sum.assign(k, 0.0);
  if (keep_blocks) s.blocks.assign(k, std::vector<double>(d.blocks.size(), 0.0));
  s.gaps = complete_gaps(d);
  s.t1 = d.t_times.empty() ? 0 : d.t_times.front();
  s.n_blocks = d.n_blocks;
  s.remainder_length = static_cast<std::int64_t>(d.remainder.size());
  std::vector<double> v(k);
  auto visit = [&](IndexRange r, auto&& sink) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      cls.evaluate(states[i], v);
      double env = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        s.total[j] += v[j];
        s.square_sum[j] += v[j] * v[j];
        env = std::max(env, std::abs(v[j]));
        sink(j, v[j]);
      }
      s.max_sup = std::max(s.max_sup, env);
    }
  };
  visit(d.initial, [&](std::size_t j, double x) { s.initial[j] += x; });
  for (std::size_t b = 0; b < d.blocks.size(); ++b) {
    if (keep_blocks) {
      visit(d.blocks[b], [&](std::size_t j, double x) { s.blocks[j][b] += x; });
    } else {
      visit(d.blocks[b], [](std::size_t, double) {});
    }
  }
  visit(d.remainder, [&](std::size_t j, double x) { s.remainder[j] += x; });
  return s;
}

inline double sup_abs(std::span<const double> xs) {
  double best = 0.0;
  for (double x : xs) best = std::max(best, std::abs(x));
  return best;
}

struct BlockStats {
  std::int64_t block_count = 0;
  double mean_t2 = 0.0;
  double se_mean_t2 = 0.0;
  std::vector<std::string> names;
  std::vector<double> mean_z1;
  std::vector<double> se_mean_z1;
  std::vector<double> var_z1;
  std::vector<double> se_var_z1;
  std::vector<double> cov_z1z2;
  // max_f Var Z_1(f) / E T_2.
  double sigma_sq_class = 0.0;
};

// Pools the complete blocks of many trajectories. Z_0 and the remainder are
// left out. The lag-1 covariance pairs neighbouring blocks of the same
// trajectory only and is normalized by the number of pairs.
// Pooling every block of a finite window is biased by O(1/n): long blocks
// are the ones cut off at the edge. max_per_path > 0 keeps only the first
// blocks of each path, which is unbiased when the window is long.
inline BlockStats block_statistics(std::span<const PathSummary> paths,
                                   std::span<const std::string> names,
                                   std::size_t max_per_path = 0) {
  BlockStats st;
  st.names.assign(names.begin(), names.end());
  const std::size_t k = names.size();
  std::vector<double> gaps;
  for (const PathSummary& p : paths) {
    if (p.blocks.size() != k) {
      throw ValidationError("block_statistics needs paths summarized with blocks");
    }
    const std::size_t take = max_per_path ? std::min(max_per_path, p.gaps.size()) : p.gaps.size();
    for (std::size_t i = 0; i < take; ++i) gaps.push_back(static_cast<double>(p.gaps[i]));
  }
  st.block_count = static_cast<std::int64_t>(gaps.size());
  if (st.block_count < 2) {
    throw InsufficientDataError("fewer than two complete regeneration blocks");
  }
  st.mean_t2 = mean(gaps);
  st.se_mean_t2 = standard_error_of_mean(gaps);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> z;
    z.reserve(gaps.size());
    auto taken = [&](const PathSummary& p) {
      const auto& b = p.blocks[j];
      return max_per_path ? std::min(max_per_path, b.size()) : b.size();
    };
    for (const PathSummary& p : paths) {
      z.insert(z.end(), p.blocks[j].begin(),
               p.blocks[j].begin() + static_cast<std::ptrdiff_t>(taken(p)));
    }
    const double mu = mean(z);
    st.mean_z1.push_back(mu);
    st.se_mean_z1.push_back(standard_error_of_mean(z));
    st.var_z1.push_back(sample_variance(z));
    st.se_var_z1.push_back(standard_error_of_variance(z));
    std::vector<double> prods;
    for (const PathSummary& p : paths) {
      const auto& b = p.blocks[j];
      for (std::size_t i = 0; i + 1 < taken(p); ++i) {
        prods.push_back((b[i] - mu) * (b[i + 1] - mu));
      }
    }
    st.cov_z1z2.push_back(prods.empty() ? 0.0 : mean(prods));
  }
  double best = 0.0;
  for (double v : st.var_z1) best = std::max(best, v);
  st.sigma_sq_class = best / st.mean_t2;
  return st;
}

// m^{-1} (E T_2)^{-1} (Var Z_1 + E Z_1 Z_2) per function; for m = 1 blocks are
// independent and the covariance term is dropped. Clamped at 0.
inline std::vector<double> asymptotic_variance(const BlockStats& st,
                                               std::int64_t m) {
  if (m < 1) throw ValidationError("asymptotic_variance needs m >= 1");
  if (st.block_count < 2) throw InsufficientDataError("empty block statistics");
  std::vector<double> out;
  for (std::size_t j = 0; j < st.var_z1.size(); ++j) {
    const double num = m == 1 ? st.var_z1[j] : st.var_z1[j] + st.cov_z1z2[j];
    out.push_back(std::max(0.0, num / (static_cast<double>(m) * st.mean_t2)));
  }
  return out;
}

// Empirical psi_alpha norm of replicated max_i sup_f |f(X_i)|.
inline OrliczNorm max_sup_norm(std::span<const double> max_sup_samples,
                               OrliczIndex alpha) {
  return orlicz_norm_empirical(max_sup_samples, alpha);
}

struct TruncationReport {
  // rho = 8 E max_i sup_f |f(X_i)|, from the pilot batch.
  double rho = 0.0;
  std::int64_t pilot_reps = 0;
  std::int64_t check_reps = 0;
  // P(max_i sup_f |f(X_i)| > rho) on the check batch; should be <= 1/8.
  double exceedance = 0.0;
  double exceedance_se = 0.0;
  bool exceedance_ok = true;
  // E sup_f |sum_i f(X_i) 1{sup_g |g(X_i)| > rho}|; should be <= rho.
  double f2_mean = 0.0;
  double f2_se = 0.0;
  bool f2_ok = true;
  OrliczNorm max_sup_norm{0.0, OrliczIndex(1.0)};
  bool degenerate = false;
};

// gen(seed) returns the n variables of one replication. The pilot batch
// (Stream::kPilot) fixes rho; an independent check batch
// (Stream::kValidation) measures both diagnostics against it.
template <class State, class Gen>
TruncationReport truncation_split(Gen&& gen, const FunctionClass<State>& cls,
                                  OrliczIndex alpha, std::int64_t reps,
                                  std::uint64_t seed, unsigned threads = 1) {
  cls.require_nonempty();
  if (reps < 2) throw ValidationError("truncation_split needs reps >= 2");
  const auto count = static_cast<std::size_t>(reps);
  const std::vector<double> pilot = parallel_map(count, threads, [&](std::size_t i) {
    const std::vector<State> xs = gen(derive_seed(seed, i, Stream::kPilot));
    std::vector<double> v(cls.size());
    double env = 0.0;
    for (const State& x : xs) {
      cls.evaluate(x, v);
      env = std::max(env, sup_abs(v));
    }
    return env;
  });
  TruncationReport rep;
  rep.pilot_reps = reps;
  rep.check_reps = reps;
  rep.rho = 8.0 * mean(pilot);
  rep.max_sup_norm = max_sup_norm(pilot, alpha);
  if (rep.rho == 0.0) {
    rep.degenerate = true;
    return rep;
  }
  struct Check {
    double exceed = 0.0;
    double f2 = 0.0;
  };
  const double rho = rep.rho;
  const std::vector<Check> checks = parallel_map(count, threads, [&](std::size_t i) {
    const std::vector<State> xs = gen(derive_seed(seed, i, Stream::kValidation));
    std::vector<double> v(cls.size());
    std::vector<double> f2(cls.size(), 0.0);
    double env_max = 0.0;
    for (const State& x : xs) {
      cls.evaluate(x, v);
      const double env = sup_abs(v);
      env_max = std::max(env_max, env);
      if (env > rho) {
        for (std::size_t j = 0; j < v.size(); ++j) f2[j] += v[j];
      }
    }
    return Check{env_max > rho ? 1.0 : 0.0, sup_abs(f2)};
  });
  std::vector<double> exceed(count);
  std::vector<double> f2(count);
  for (std::size_t i = 0; i < count; ++i) {
    exceed[i] = checks[i].exceed;
    f2[i] = checks[i].f2;
  }
  rep.exceedance = mean(exceed);
  rep.exceedance_se = binomial_se(rep.exceedance, reps);
  rep.exceedance_ok = rep.exceedance <= 0.125 + kSeSlack * rep.exceedance_se;
  rep.f2_mean = mean(f2);
  rep.f2_se = standard_error_of_mean(f2);
  rep.f2_ok = rep.f2_mean <= rep.rho + kSeSlack * rep.f2_se;
  return rep;
}

}  // namespace regen

#endif  // REGEN_ESTIMATORS_HPP_
