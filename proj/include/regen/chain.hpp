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

#ifndef REGEN_CHAIN_HPP_
#define REGEN_CHAIN_HPP_

// Finite Markov chains with sparse kernels, minorization certificates, the
// m = 1 split-chain sampler and stationary distributions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regen/error.hpp"
#include "regen/orlicz.hpp"
#include "regen/rng.hpp"

namespace regen {

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr std::size_t kDenseStateCap = 2000;

// One kernel row: strictly positive entries sorted by column.
struct SparseRow {
  std::vector<std::size_t> index;
  std::vector<double> prob;
  std::vector<double> cdf;
};

namespace detail {

inline std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  return cdf;
}

inline void check_probability_vector(std::span<const double> p,
                                     const std::string& what) {
  std::vector<double> copy(p.begin(), p.end());
  for (double x : copy) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValidationError(what + ": entries must be finite and >= 0");
    }
  }
  const double s = compensated_sum(copy);
  if (std::abs(s - 1.0) > kRowSumTolerance) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " sums to %.17g", s);
    throw ValidationError(what + buf);
  }
}

}  // namespace detail

// Finite chain. Rows are given as (column, probability) pairs; zero entries
// are dropped. Optional per-state real values let statistics refer to the
// state itself (e.g. X_i = value of state i).
class DiscreteChain {
 public:
  using Entries = std::vector<std::pair<std::size_t, double>>;

  DiscreteChain(std::vector<Entries> rows, std::vector<double> initial,
                std::vector<double> state_values = {})
      : initial_(std::move(initial)), values_(std::move(state_values)) {
    const std::size_t n = rows.size();
    if (n == 0) throw ValidationError("chain needs at least one state");
    if (initial_.size() != n) {
      throw ValidationError("initial distribution length differs from state count");
    }
    detail::check_probability_vector(initial_, "initial distribution");
    if (!values_.empty() && values_.size() != n) {
      throw ValidationError("state_values length differs from state count");
    }
    rows_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      Entries e = std::move(rows[x]);
      std::sort(e.begin(), e.end());
      SparseRow& r = rows_[x];
      std::vector<double> all;
      for (std::size_t k = 0; k < e.size(); ++k) {
        const auto [col, p] = e[k];
        if (col >= n) {
          throw ValidationError("row " + std::to_string(x) +
                                " refers to state out of range");
        }
        if (k > 0 && e[k - 1].first == col) {
          throw ValidationError("row " + std::to_string(x) +
                                " lists a column twice");
        }
        all.push_back(p);
        if (p > 0.0) {
          r.index.push_back(col);
          r.prob.push_back(p);
        }
      }
      detail::check_probability_vector(all, "row " + std::to_string(x));
      r.cdf = detail::cumulative(r.prob);
    }
    initial_cdf_ = detail::cumulative(initial_);
  }

  std::size_t size() const { return rows_.size(); }
  const SparseRow& row(std::size_t x) const { return rows_.at(x); }
  std::span<const double> initial() const { return initial_; }
  std::span<const double> state_values() const { return values_; }
  bool has_state_values() const { return !values_.empty(); }

  double probability(std::size_t x, std::size_t y) const {
    const SparseRow& r = rows_.at(x);
    auto it = std::lower_bound(r.index.begin(), r.index.end(), y);
    if (it == r.index.end() || *it != y) return 0.0;
    return r.prob[static_cast<std::size_t>(it - r.index.begin())];
  }

  std::vector<double> dense_row(std::size_t x) const {
    std::vector<double> out(size(), 0.0);
    const SparseRow& r = rows_.at(x);
    for (std::size_t k = 0; k < r.index.size(); ++k) out[r.index[k]] = r.prob[k];
    return out;
  }

  std::size_t sample_next(std::size_t x, Rng& rng) const {
    const SparseRow& r = rows_[x];
    return r.index[sample_from_cdf(r.cdf, rng)];
  }

  std::size_t sample_initial(Rng& rng) const {
    return sample_from_cdf(initial_cdf_, rng);
  }

  // Distribution after one step from the (dense) vector mu.
  std::vector<double> step(std::span<const double> mu) const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t x = 0; x < size(); ++x) {
      if (mu[x] == 0.0) continue;
      const SparseRow& r = rows_[x];
      for (std::size_t k = 0; k < r.index.size(); ++k) {
        out[r.index[k]] += mu[x] * r.prob[k];
      }
    }
    return out;
  }

  DiscreteChain with_initial(std::vector<double> initial) const {
    DiscreteChain copy = *this;
    detail::check_probability_vector(initial, "initial distribution");
    if (initial.size() != size()) {
      throw ValidationError("initial distribution length differs from state count");
    }
    copy.initial_ = std::move(initial);
    copy.initial_cdf_ = detail::cumulative(copy.initial_);
    return copy;
  }

 private:
  std::vector<SparseRow> rows_;
  std::vector<double> initial_;
  std::vector<double> initial_cdf_;
  std::vector<double> values_;
};

// Certificate that P^m(x, .) >= delta nu(.) for every x in the small set.
struct MinorizationCert {
  std::vector<std::size_t> small_set;
  double delta = 1.0;
  std::vector<double> nu;
  std::int64_t m = 1;

  bool contains(std::size_t x) const {
    return std::find(small_set.begin(), small_set.end(), x) != small_set.end();
  }
};

inline void check_cert_shape(const DiscreteChain& chain,
                             const MinorizationCert& cert) {
  if (cert.small_set.empty()) throw ValidationError("small set is empty");
  for (std::size_t x : cert.small_set) {
    if (x >= chain.size()) throw ValidationError("small set state out of range");
  }
  if (!(cert.delta > 0.0 && cert.delta <= 1.0)) {
    throw ValidationError("minorization delta must lie in (0, 1]");
  }
  if (cert.m < 1) throw ValidationError("skeleton step m must be >= 1");
  if (cert.nu.size() != chain.size()) {
    throw ValidationError("nu length differs from state count");
  }
  detail::check_probability_vector(cert.nu, "nu");
}

struct MinorizationReport {
  bool passed = false;
  // (x, min_y P^m(x,y) - delta nu(y)) for each x in the small set.
  std::vector<std::pair<std::size_t, double>> margins;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  bool accessible = false;
  std::optional<std::size_t> inaccessible_state;
};

namespace detail {

// Rows of P^m for the states in `from`, computed by repeated sparse steps.
inline std::vector<double> power_row(const DiscreteChain& chain, std::size_t x,
                                     std::int64_t m) {
  std::vector<double> mu(chain.size(), 0.0);
  mu[x] = 1.0;
  for (std::int64_t k = 0; k < m; ++k) mu = chain.step(mu);
  return mu;
}

// Support of P^m(x, .) as adjacency lists.
inline std::vector<std::vector<std::size_t>> skeleton_graph(
    const DiscreteChain& chain, std::int64_t m) {
  const std::size_t n = chain.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<char> cur(n, 0);
    cur[x] = 1;
    for (std::int64_t k = 0; k < m; ++k) {
      std::vector<char> next(n, 0);
      for (std::size_t y = 0; y < n; ++y) {
        if (!cur[y]) continue;
        for (std::size_t z : chain.row(y).index) next[z] = 1;
      }
      cur.swap(next);
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (cur[y]) adj[x].push_back(y);
    }
  }
  return adj;
}

}  // namespace detail

// Exact check of the minorization inequality plus accessibility of the
// small set for the m-skeleton.
inline MinorizationReport validate_minorization(const DiscreteChain& chain,
                                                const MinorizationCert& cert) {
  check_cert_shape(chain, cert);
  MinorizationReport rep;
  rep.passed = true;
  for (std::size_t x : cert.small_set) {
    const std::vector<double> row = detail::power_row(chain, x, cert.m);
    double worst = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t y = 0; y < chain.size(); ++y) {
      const double margin = row[y] - cert.delta * cert.nu[y];
      if (margin < worst) {
        worst = margin;
        arg = y;
      }
    }
    rep.margins.emplace_back(x, worst);
    if (worst < -kRowSumTolerance && !rep.witness) {
      rep.witness = std::make_pair(x, arg);
      rep.passed = false;
    }
  }
  // Backward search from C along the skeleton graph.
  const auto adj = detail::skeleton_graph(chain, cert.m);
  std::vector<std::vector<std::size_t>> rev(chain.size());
  for (std::size_t x = 0; x < adj.size(); ++x) {
    for (std::size_t y : adj[x]) rev[y].push_back(x);
  }
  std::vector<char> seen(chain.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t c : cert.small_set) {
    // x in C reaches C in n >= 1 skeleton steps only if some predecessor chain
    // leads back; seed with predecessors, not C itself.
    for (std::size_t p : rev[c]) {
      if (!seen[p]) {
        seen[p] = 1;
        stack.push_back(p);
      }
    }
  }
  while (!stack.empty()) {
    const std::size_t y = stack.back();
    stack.pop_back();
    for (std::size_t p : rev[y]) {
      if (!seen[p]) {
        seen[p] = 1;
        stack.push_back(p);
      }
    }
  }
  rep.accessible = true;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    if (!seen[x]) {
      rep.accessible = false;
      rep.inaccessible_state = x;
      rep.passed = false;
      break;
    }
  }
  return rep;
}

// Normalized residual (P(x, .) - delta nu) / (1 - delta) for x in C, m = 1.
inline std::vector<double> residual_kernel(const DiscreteChain& chain,
                                           const MinorizationCert& cert,
                                           std::size_t x) {
  check_cert_shape(chain, cert);
  if (cert.m != 1) throw UnsupportedError("residual kernel needs m = 1");
  if (cert.delta >= 1.0) {
    throw ValidationError("residual kernel undefined for delta = 1");
  }
  if (!cert.contains(x)) throw ValidationError("residual kernel: x not in C");
  std::vector<double> row = chain.dense_row(x);
  const double scale = 1.0 - cert.delta;
  for (std::size_t y = 0; y < row.size(); ++y) {
    double r = (row[y] - cert.delta * cert.nu[y]) / scale;
    if (r < 0.0) {
      if (r < -kRowSumTolerance) {
        throw ValidationError("certificate violated at (" + std::to_string(x) +
                              ", " + std::to_string(y) + ")");
      }
      r = 0.0;
    }
    row[y] = r;
  }
  return row;
}

// Interface the split sampler needs from a chain with an m = 1 certificate.
template <class K>
concept SplitKernel = requires(const K& k, const typename K::State& s, Rng& rng) {
  { k.sample_initial(rng) } -> std::same_as<typename K::State>;
  { k.sample_transition(s, rng) } -> std::same_as<typename K::State>;
  { k.in_small_set(s) } -> std::same_as<bool>;
  { k.delta() } -> std::convertible_to<double>;
  { k.sample_nu(rng) } -> std::same_as<typename K::State>;
  { k.sample_residual(s, rng) } -> std::same_as<typename K::State>;
  { k.index_of(s) } -> std::convertible_to<std::uint64_t>;
};

// A validated finite chain bundled with its certificate, ready to sample.
class SplitChain {
 public:
  using State = std::size_t;

  SplitChain(DiscreteChain chain, MinorizationCert cert)
      : chain_(std::move(chain)), cert_(std::move(cert)) {
    const MinorizationReport rep = validate_minorization(chain_, cert_);
    if (!rep.passed) {
      std::string msg = "minorization certificate rejected";
      if (rep.witness) {
        msg += ": P(" + std::to_string(rep.witness->first) + ", " +
               std::to_string(rep.witness->second) + ") < delta nu";
      } else if (rep.inaccessible_state) {
        msg += ": small set not accessible from state " +
               std::to_string(*rep.inaccessible_state);
      }
      throw ValidationError(msg);
    }
    if (cert_.m != 1) {
      throw UnsupportedError(
          "native split simulation supports m = 1 only; supply flags for m > 1");
    }
    in_c_.assign(chain_.size(), 0);
    for (std::size_t x : cert_.small_set) in_c_[x] = 1;
    nu_cdf_ = detail::cumulative(cert_.nu);
    residual_cdf_.resize(chain_.size());
    if (cert_.delta < 1.0) {
      for (std::size_t x : cert_.small_set) {
        residual_cdf_[x] = detail::cumulative(residual_kernel(chain_, cert_, x));
      }
    }
  }

  const DiscreteChain& chain() const { return chain_; }
  const MinorizationCert& cert() const { return cert_; }

  State sample_initial(Rng& rng) const { return chain_.sample_initial(rng); }
  State sample_transition(State x, Rng& rng) const {
    return chain_.sample_next(x, rng);
  }
  bool in_small_set(State x) const { return in_c_[x] != 0; }
  double delta() const { return cert_.delta; }
  State sample_nu(Rng& rng) const { return sample_from_cdf(nu_cdf_, rng); }
  State sample_residual(State x, Rng& rng) const {
    if (residual_cdf_[x].empty()) {
      throw InternalError("residual kernel requested where it is undefined");
    }
    return sample_from_cdf(residual_cdf_[x], rng);
  }
  std::uint64_t index_of(State x) const { return x; }

 private:
  DiscreteChain chain_;
  MinorizationCert cert_;
  std::vector<char> in_c_;
  std::vector<double> nu_cdf_;
  std::vector<std::vector<double>> residual_cdf_;
};

// One step of the split chain from x: the next state and the regeneration
// flag attached to x.
template <SplitKernel K>
std::pair<typename K::State, bool> split_step(const K& kernel,
                                              const typename K::State& x,
                                              Rng& rng) {
  if (!kernel.in_small_set(x)) return {kernel.sample_transition(x, rng), false};
  if (kernel.delta() >= 1.0) return {kernel.sample_nu(rng), true};
  if (bernoulli(rng, kernel.delta())) return {kernel.sample_nu(rng), true};
  return {kernel.sample_residual(x, rng), false};
}

template <class State>
struct SplitTrajectory {
  std::vector<State> states;
  std::vector<std::uint8_t> flags;
  std::uint64_t seed = 0;
};

// X_1 ~ xi, then (X_{i+1}, R_i) = split_step(X_i). The last step is drawn
// only to decide R_n.
template <SplitKernel K>
SplitTrajectory<typename K::State> simulate_split(const K& kernel,
                                                  std::size_t n,
                                                  std::uint64_t seed) {
  SplitTrajectory<typename K::State> traj;
  traj.seed = seed;
  if (n == 0) return traj;
  Rng rng(seed);
  traj.states.reserve(n);
  traj.flags.reserve(n);
  auto x = kernel.sample_initial(rng);
  for (std::size_t i = 0; i < n; ++i) {
    traj.states.push_back(x);
    auto [next, flag] = split_step(kernel, x, rng);
    traj.flags.push_back(flag ? 1 : 0);
    x = std::move(next);
  }
  return traj;
}

// Plain kernel sampler, used as the reference for the split sampler.
template <SplitKernel K>
std::vector<typename K::State> simulate_direct(const K& kernel, std::size_t n,
                                               std::uint64_t seed) {
  std::vector<typename K::State> out;
  if (n == 0) return out;
  Rng rng(seed);
  out.reserve(n);
  auto x = kernel.sample_initial(rng);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(x);
    x = kernel.sample_transition(x, rng);
  }
  return out;
}

namespace detail {

// Strongly connected components (iterative Tarjan); returns component ids.
inline std::vector<std::size_t> scc_ids(const DiscreteChain& chain,
                                        std::size_t& count) {
  const std::size_t n = chain.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0;
  count = 0;
  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = chain.row(f.v).index;
      if (f.edge < succ.size()) {
        const std::size_t w = succ[f.edge++];
        if (index[w] == kUnset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      call.pop_back();
      if (!call.empty()) {
        low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return comp;
}

}  // namespace detail

// Solves pi P = pi, sum pi = 1 with a dense LU. Rejects chains with more than
// one closed class, where pi is not unique.
inline std::vector<double> stationary_distribution(const DiscreteChain& chain,
                                                   double tol = 1e-12) {
  const std::size_t n = chain.size();
  if (n > kDenseStateCap) {
    throw ValidationError("dense stationary solve capped at " +
                          std::to_string(kDenseStateCap) + " states");
  }
  std::size_t ncomp = 0;
  const std::vector<std::size_t> comp = detail::scc_ids(chain, ncomp);
  std::vector<char> closed(ncomp, 1);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y : chain.row(x).index) {
      if (comp[y] != comp[x]) closed[comp[x]] = 0;
    }
  }
  const auto closed_count = std::count(closed.begin(), closed.end(), 1);
  if (closed_count != 1) {
    throw NumericalError("stationary distribution not unique: " +
                         std::to_string(closed_count) + " closed classes");
  }
  // (P^T - I) pi = 0 with the last equation replaced by sum pi = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    const SparseRow& r = chain.row(x);
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      a(static_cast<Eigen::Index>(r.index[k]), static_cast<Eigen::Index>(x)) +=
          r.prob[k];
    }
    a(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) -= 1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  b(static_cast<Eigen::Index>(n - 1)) = 1.0;
  const Eigen::VectorXd sol = a.partialPivLu().solve(b);
  std::vector<double> pi(n);
  for (std::size_t x = 0; x < n; ++x) {
    pi[x] = std::max(0.0, sol(static_cast<Eigen::Index>(x)));
  }
  const double total = detail::compensated_sum(pi);
  for (double& p : pi) p /= total;
  const std::vector<double> moved = chain.step(pi);
  double resid = 0.0;
  for (std::size_t x = 0; x < n; ++x) resid += std::abs(moved[x] - pi[x]);
  if (!(resid <= tol)) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "stationary solve residual %.3g exceeds tolerance %.3g", resid,
                  tol);
    throw NumericalError(buf);
  }
  return pi;
}

}  // namespace regen

#endif  // REGEN_CHAIN_HPP_
