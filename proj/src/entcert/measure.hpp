// Copyright 2026 The entcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Finite probability spaces, Markov kernels over them, block weights and
// metrics. Everything here is immutable after construction.
//
// The containers are templated on the scalar so the same code runs in double
// precision and in exact rational arithmetic (see ScalarTraits). Exact spaces
// are limited to kMaxExactStates states.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "entcert/common.hpp"

namespace entcert {

inline constexpr std::size_t kMaxExactStates = 100;

// ---------------------------------------------------------------------------
// FiniteSpace

template <class S>
class BasicFiniteSpace {
 public:
  BasicFiniteSpace(std::vector<std::string> labels, std::vector<S> probs)
      : labels_(std::move(labels)), probs_(std::move(probs)) {
    if (labels_.size() != probs_.size()) {
      throw UsageError("space: " + std::to_string(labels_.size()) +
                       " labels but " + std::to_string(probs_.size()) +
                       " probabilities");
    }
    if (labels_.empty()) throw UsageError("space: no states");
    if constexpr (ScalarTraits<S>::exact) {
      if (labels_.size() > kMaxExactStates) {
        throw UsageError("exact mode supports at most " +
                         std::to_string(kMaxExactStates) + " states, got " +
                         std::to_string(labels_.size()));
      }
    }
    S total(0);
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!(probs_[i] > S(0))) {
        throw ContractViolation("space: P(" + labels_[i] +
                                ") must be strictly positive");
      }
      total += probs_[i];
    }
    if (abs_value(S(total - S(1))) > ScalarTraits<S>::mass_tol()) {
      throw ContractViolation("space: probabilities sum to " +
                              std::to_string(to_double(total)) + ", not 1");
    }
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i).second) {
        throw ContractViolation("space: duplicate state label '" + labels_[i] +
                                "'");
      }
    }
  }

  static BasicFiniteSpace uniform(std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    if (n == 0) throw UsageError("space: no states");
    std::vector<S> p(n, S(1) / S(static_cast<long long>(n)));
    if constexpr (!ScalarTraits<S>::exact) {
      // 1/n summed n times can drift by a few ulps; pin the last entry.
      S rest(0);
      for (std::size_t i = 0; i + 1 < n; ++i) rest += p[i];
      p[n - 1] = S(1) - rest;
    }
    return BasicFiniteSpace(std::move(labels), std::move(p));
  }

  std::size_t size() const { return probs_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<S>& probabilities() const { return probs_; }
  const S& prob(std::size_t i) const { return probs_[i]; }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  template <class T>
  T expectation(std::span<const T> f) const {
    if (f.size() != size()) throw UsageError("expectation: dimension mismatch");
    T acc(0);
    for (std::size_t i = 0; i < f.size(); ++i) acc += T(probs_[i]) * f[i];
    return acc;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<S> probs_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <class S>
using SpacePtr = std::shared_ptr<const BasicFiniteSpace<S>>;

// ---------------------------------------------------------------------------
// Density: a nonnegative function on the states.

class Density {
 public:
  explicit Density(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw UsageError("density: entries must be finite and nonnegative");
      }
    }
  }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// MarkovKernel: row-stochastic sparse matrix.

template <class S>
struct KernelEntry {
  std::size_t col;
  S value;
};

template <class S>
class BasicMarkovKernel {
 public:
  using Entry = KernelEntry<S>;
  using Row = std::span<const Entry>;

  BasicMarkovKernel(SpacePtr<S> space, std::vector<std::vector<Entry>> rows)
      : space_(std::move(space)) {
    if (!space_) throw UsageError("kernel: null space");
    const std::size_t n = space_->size();
    if (rows.size() != n) {
      throw UsageError("kernel: " + std::to_string(rows.size()) +
                       " rows for a space of " + std::to_string(n) + " states");
    }
    offsets_.reserve(n + 1);
    offsets_.push_back(0);
    for (std::size_t x = 0; x < n; ++x) {
      auto& row = rows[x];
      std::sort(row.begin(), row.end(),
                [](const Entry& a, const Entry& b) { return a.col < b.col; });
      S sum(0);
      std::size_t row_begin = entries_.size();
      for (auto& e : row) {
        if (e.col >= n) throw UsageError("kernel: column index out of range");
        if (e.value < S(0)) {
          throw ContractViolation("kernel: negative entry in row " +
                                  space_->label(x));
        }
        sum += e.value;
        if (e.value == S(0)) continue;
        if (entries_.size() > row_begin && entries_.back().col == e.col) {
          entries_.back().value += e.value;
        } else {
          entries_.push_back(std::move(e));
        }
      }
      if (abs_value(S(sum - S(1))) > ScalarTraits<S>::row_sum_tol()) {
        throw ContractViolation("kernel: row " + space_->label(x) +
                                " sums to " + std::to_string(to_double(sum)));
      }
      offsets_.push_back(entries_.size());
    }
    stationary_ = check_stationary();
  }

  static BasicMarkovKernel from_dense(SpacePtr<S> space,
                                      const std::vector<S>& matrix) {
    const std::size_t n = space ? space->size() : 0;
    if (matrix.size() != n * n) {
      throw UsageError("kernel: dense matrix has wrong size");
    }
    std::vector<std::vector<Entry>> rows(n);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const S& v = matrix[x * n + y];
        if (v != S(0)) rows[x].push_back({y, v});
        if (v < S(0)) throw ContractViolation("kernel: negative entry");
      }
    }
    return BasicMarkovKernel(std::move(space), std::move(rows));
  }

  static BasicMarkovKernel identity(SpacePtr<S> space) {
    std::vector<std::vector<Entry>> rows(space->size());
    for (std::size_t x = 0; x < rows.size(); ++x) rows[x].push_back({x, S(1)});
    return BasicMarkovKernel(std::move(space), std::move(rows));
  }

  // Every row equal to P.
  static BasicMarkovKernel one_step_mixing(SpacePtr<S> space) {
    const std::size_t n = space->size();
    std::vector<Entry> row;
    row.reserve(n);
    for (std::size_t y = 0; y < n; ++y) row.push_back({y, space->prob(y)});
    std::vector<std::vector<Entry>> rows(n, row);
    return BasicMarkovKernel(std::move(space), std::move(rows));
  }

  std::size_t size() const { return offsets_.size() - 1; }
  const SpacePtr<S>& space() const { return space_; }
  bool stationary() const { return stationary_; }
  std::size_t nonzeros() const { return entries_.size(); }

  Row row(std::size_t x) const {
    return Row(entries_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]);
  }

  S at(std::size_t x, std::size_t y) const {
    auto r = row(x);
    auto it = std::lower_bound(
        r.begin(), r.end(), y,
        [](const Entry& e, std::size_t c) { return e.col < c; });
    return (it != r.end() && it->col == y) ? it->value : S(0);
  }

  std::vector<S> dense() const {
    const std::size_t n = size();
    std::vector<S> m(n * n, S(0));
    for (std::size_t x = 0; x < n; ++x) {
      for (const auto& e : row(x)) m[x * n + e.col] = e.value;
    }
    return m;
  }

  void require_stationary(const char* what) const {
    if (!stationary_) {
      throw ContractViolation(std::string(what) +
                              ": kernel is not stationary w.r.t. P");
    }
  }

 private:
  bool check_stationary() const {
    const std::size_t n = size();
    std::vector<S> flow(n, S(0));
    for (std::size_t x = 0; x < n; ++x) {
      for (const auto& e : row(x)) flow[e.col] += space_->prob(x) * e.value;
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (abs_value(S(flow[y] - space_->prob(y))) >
          ScalarTraits<S>::stationary_tol()) {
        return false;
      }
    }
    return true;
  }

  SpacePtr<S> space_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
  bool stationary_ = false;
};

// ---------------------------------------------------------------------------
// BlockWeights

template <class S>
class BasicBlockWeights {
 public:
  explicit BasicBlockWeights(std::vector<S> weights)
      : weights_(std::move(weights)) {
    if (weights_.empty()) throw UsageError("block weights: empty");
    S total(0);
    for (const auto& w : weights_) {
      if (w < S(0)) throw ContractViolation("block weights: negative weight");
      total += w;
    }
    if (abs_value(S(total - S(1))) > ScalarTraits<S>::mass_tol()) {
      throw ContractViolation("block weights: sum to " +
                              std::to_string(to_double(total)) + ", not 1");
    }
  }

  // Scales nonnegative raw weights to sum 1.
  static BasicBlockWeights normalized(std::vector<S> raw) {
    S total(0);
    for (const auto& w : raw) {
      if (w < S(0)) throw ContractViolation("block weights: negative weight");
      total += w;
    }
    if (!(total > S(0))) throw UsageError("block weights: all zero");
    for (auto& w : raw) w = w / total;
    if constexpr (!ScalarTraits<S>::exact) {
      S rest(0);
      std::size_t last = raw.size() - 1;
      while (last > 0 && raw[last] == S(0)) --last;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i != last) rest += raw[i];
      }
      raw[last] = std::max(S(0), S(1) - rest);
    }
    return BasicBlockWeights(std::move(raw));
  }

  static BasicBlockWeights uniform(std::size_t m) {
    if (m == 0) throw UsageError("block weights: empty");
    return normalized(std::vector<S>(m, S(1)));
  }

  std::size_t size() const { return weights_.size(); }
  const S& operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<S>& weights() const { return weights_; }

 private:
  std::vector<S> weights_;
};

// ---------------------------------------------------------------------------
// Metric

using Edge = std::pair<std::size_t, std::size_t>;

inline constexpr std::size_t kExhaustiveMetricCheckLimit = 500;

template <class S>
class BasicMetric {
 public:
  using DistanceFn = std::function<S(std::size_t, std::size_t)>;

  static BasicMetric from_matrix(std::size_t n, std::vector<S> matrix,
                                 std::optional<std::vector<Edge>> edges = {}) {
    if (matrix.size() != n * n) {
      throw UsageError("metric: matrix has " + std::to_string(matrix.size()) +
                       " entries, expected " + std::to_string(n * n));
    }
    auto shared = std::make_shared<const std::vector<S>>(std::move(matrix));
    BasicMetric m(n, [shared, n](std::size_t i, std::size_t j) {
      return (*shared)[i * n + j];
    }, std::move(edges));
    m.validate();
    return m;
  }

  // `fn` must be pure and thread-safe.
  static BasicMetric from_function(std::size_t n, DistanceFn fn,
                                   std::optional<std::vector<Edge>> edges = {}) {
    BasicMetric m(n, std::move(fn), std::move(edges));
    m.validate();
    return m;
  }

  // Shortest-path metric of an undirected weighted graph. `lengths` defaults
  // to unit length per edge.
  static BasicMetric from_edges(std::size_t n, std::vector<Edge> edges,
                                std::vector<S> lengths = {}) {
    if (lengths.empty()) lengths.assign(edges.size(), S(1));
    if (lengths.size() != edges.size()) {
      throw UsageError("metric: edge/length count mismatch");
    }
    std::vector<std::vector<std::pair<std::size_t, S>>> adj(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto [u, v] = edges[e];
      if (u >= n || v >= n || u == v) {
        throw UsageError("metric: invalid generator edge");
      }
      if (!(lengths[e] > S(0))) {
        throw ContractViolation("metric: edge lengths must be positive");
      }
      adj[u].push_back({v, lengths[e]});
      adj[v].push_back({u, lengths[e]});
    }
    std::vector<S> matrix(n * n, S(0));
    for (std::size_t s = 0; s < n; ++s) {
      auto d = shortest_paths(adj, s);
      for (std::size_t t = 0; t < n; ++t) {
        if (!d[t]) {
          throw ContractViolation("metric: generator graph is disconnected");
        }
        matrix[s * n + t] = *d[t];
      }
    }
    std::vector<Edge> gens;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto [u, v] = edges[e];
      // Edges longer than the path between their ends do not generate.
      if (matrix[u * n + v] == lengths[e]) gens.push_back(edges[e]);
    }
    return from_matrix(n, std::move(matrix), std::move(gens));
  }

  std::size_t size() const { return n_; }
  S operator()(std::size_t i, std::size_t j) const {
    return i == j ? S(0) : fn_(i, j);
  }
  bool has_generators() const { return edges_.has_value(); }
  const std::vector<Edge>& generators() const {
    if (!edges_) throw UsageError("metric: no generator edges declared");
    return *edges_;
  }

  // Checks the metric axioms. Exhaustive up to kExhaustiveMetricCheckLimit
  // states, random spot checks above.
  void validate() const {
    const std::size_t n = n_;
    auto fail = [](const std::string& msg) {
      throw ContractViolation("metric: " + msg);
    };
    const bool exhaustive = n <= kExhaustiveMetricCheckLimit;
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    auto for_pairs = [&](auto&& body) {
      if (exhaustive) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) body(i, j);
      } else {
        for (int k = 0; k < 20000; ++k) {
          std::size_t i = pick(rng), j = pick(rng);
          if (i != j) body(i, j);
        }
      }
    };
    for_pairs([&](std::size_t i, std::size_t j) {
      S a = fn_(i, j), b = fn_(j, i);
      if (a != b) fail("not symmetric");
      if (!(a > S(0))) fail("distinct states at distance 0");
    });
    for (std::size_t i = 0; i < n && exhaustive; ++i) {
      if (fn_(i, i) != S(0)) fail("dist(x,x) != 0");
    }
    const S slack = ScalarTraits<S>::exact ? S(0) : S(1e-12);
    if (exhaustive) {
      std::vector<S> row_i(n), row_j(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) row_i[k] = (*this)(i, k);
        for (std::size_t j = i + 1; j < n; ++j) {
          const S dij = row_i[j];
          for (std::size_t k = 0; k < n; ++k) {
            if (dij > row_i[k] + (*this)(k, j) + slack) {
              fail("triangle inequality fails");
            }
          }
        }
      }
    } else {
      for (int t = 0; t < 20000; ++t) {
        std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
        if ((*this)(i, j) > (*this)(i, k) + (*this)(k, j) + slack) {
          fail("triangle inequality fails");
        }
      }
    }
    if (edges_) check_generators(exhaustive, rng);
  }

 private:
  BasicMetric(std::size_t n, DistanceFn fn,
              std::optional<std::vector<Edge>> edges)
      : n_(n), fn_(std::move(fn)), edges_(std::move(edges)) {
    if (n_ == 0) throw UsageError("metric: no states");
    if (edges_) {
      for (auto [u, v] : *edges_) {
        if (u >= n_ || v >= n_ || u == v) {
          throw UsageError("metric: invalid generator edge");
        }
      }
    }
  }

  static std::vector<std::optional<S>> shortest_paths(
      const std::vector<std::vector<std::pair<std::size_t, S>>>& adj,
      std::size_t source) {
    const std::size_t n = adj.size();
    std::vector<std::optional<S>> dist(n);
    std::vector<char> done(n, 0);
    using Item = std::pair<S, std::size_t>;
    auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    dist[source] = S(0);
    heap.push({S(0), source});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (const auto& [v, w] : adj[u]) {
        S nd = d + w;
        if (!dist[v] || nd < *dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    return dist;
  }

  void check_generators(bool exhaustive, std::mt19937_64& rng) const {
    const std::size_t n = n_;
    std::vector<std::vector<std::pair<std::size_t, S>>> adj(n);
    for (auto [u, v] : *edges_) {
      S w = fn_(u, v);
      adj[u].push_back({v, w});
      adj[v].push_back({u, w});
    }
    const S slack = ScalarTraits<S>::exact ? S(0) : S(1e-9);
    std::vector<std::size_t> sources;
    if (exhaustive) {
      sources.resize(n);
      std::iota(sources.begin(), sources.end(), 0);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (int k = 0; k < 3; ++k) sources.push_back(pick(rng));
    }
    for (std::size_t s : sources) {
      auto d = shortest_paths(adj, s);
      for (std::size_t t = 0; t < n; ++t) {
        if (!d[t] || abs_value(S(*d[t] - (*this)(s, t))) > slack) {
          throw ContractViolation(
              "metric: distance differs from the path metric of its "
              "generator edges");
        }
      }
    }
  }

  std::size_t n_;
  DistanceFn fn_;
  std::optional<std::vector<Edge>> edges_;
};

// ---------------------------------------------------------------------------
// Operations

// Ent(f) = E[f log f] - E[f] log E[f] with 0 log 0 = 0.
double entropy(const Density& f, const BasicFiniteSpace<double>& space);

// Same functional for a function given as mean + deviation (f = mean + dev).
// Accurate when f is close to constant.
double entropy_from_deviation(double mean, std::span<const double> dev,
                              std::span<const double> probs);

// (Tf)(x) = sum_y T(x,y) f(y).
template <class S, class T>
std::vector<T> apply(const BasicMarkovKernel<S>& kernel, std::span<const T> f) {
  if (f.size() != kernel.size()) {
    throw UsageError("apply: kernel has " + std::to_string(kernel.size()) +
                     " states, function has " + std::to_string(f.size()));
  }
  std::vector<T> out(kernel.size(), T(0));
  for (std::size_t x = 0; x < kernel.size(); ++x) {
    T acc(0);
    for (const auto& e : kernel.row(x)) acc += T(e.value) * f[e.col];
    out[x] = acc;
  }
  return out;
}

inline Density apply(const BasicMarkovKernel<double>& kernel,
                     const Density& f) {
  auto out = apply<double, double>(kernel, f.values());
  for (auto& v : out) v = std::max(0.0, v);
  return Density(std::move(out));
}

// T*(x,y) = P(y) T(y,x) / P(x).
template <class S>
BasicMarkovKernel<S> adjoint(const BasicMarkovKernel<S>& kernel) {
  kernel.require_stationary("adjoint");
  const auto& space = *kernel.space();
  const std::size_t n = kernel.size();
  std::vector<std::vector<KernelEntry<S>>> rows(n);
  for (std::size_t y = 0; y < n; ++y) {
    for (const auto& e : kernel.row(y)) {
      rows[e.col].push_back({y, space.prob(y) * e.value / space.prob(e.col)});
    }
  }
  if constexpr (!ScalarTraits<S>::exact) {
    // Rows are stochastic only up to the stationarity slack; renormalise.
    for (auto& row : rows) {
      double total = 0.0;
      for (const auto& e : row) total += e.value;
      for (auto& e : row) e.value /= total;
    }
  }
  return BasicMarkovKernel<S>(kernel.space(), std::move(rows));
}

template <class S>
BasicMarkovKernel<S> mixture(std::span<const BasicMarkovKernel<S>> kernels,
                             const BasicBlockWeights<S>& theta) {
  if (kernels.empty()) throw UsageError("mixture: no kernels");
  if (kernels.size() != theta.size()) {
    throw UsageError("mixture: " + std::to_string(kernels.size()) +
                     " kernels but " + std::to_string(theta.size()) +
                     " weights");
  }
  const auto& space = kernels.front().space();
  for (const auto& k : kernels) {
    if (k.space() != space) throw UsageError("mixture: kernels on different spaces");
  }
  const std::size_t n = space->size();
  std::vector<std::vector<KernelEntry<S>>> rows(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      if (theta[i] == S(0)) continue;
      for (const auto& e : kernels[i].row(x)) {
        rows[x].push_back({e.col, theta[i] * e.value});
      }
    }
  }
  return BasicMarkovKernel<S>(space, std::move(rows));
}

// Kernel of f -> E[f | cell]. `cells` must partition the states.
template <class S>
BasicMarkovKernel<S> conditional_kernel(
    const SpacePtr<S>& space, const std::vector<std::vector<std::size_t>>& cells) {
  const std::size_t n = space->size();
  std::vector<int> seen(n, -1);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].empty()) throw UsageError("conditional kernel: empty cell");
    for (std::size_t x : cells[c]) {
      if (x >= n) throw UsageError("conditional kernel: state out of range");
      if (seen[x] != -1) {
        throw UsageError("conditional kernel: state " + space->label(x) +
                         " assigned twice");
      }
      seen[x] = static_cast<int>(c);
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (seen[x] == -1) {
      throw UsageError("conditional kernel: state " + space->label(x) +
                       " is unassigned");
    }
  }
  std::vector<std::vector<KernelEntry<S>>> rows(n);
  for (const auto& cell : cells) {
    S mass(0);
    for (std::size_t y : cell) mass += space->prob(y);
    std::vector<KernelEntry<S>> row;
    row.reserve(cell.size());
    for (std::size_t y : cell) row.push_back({y, space->prob(y) / mass});
    if constexpr (!ScalarTraits<S>::exact) {
      double total = 0.0;
      for (const auto& e : row) total += e.value;
      for (auto& e : row) e.value /= total;
    }
    for (std::size_t x : cell) rows[x] = row;
  }
  return BasicMarkovKernel<S>(space, std::move(rows));
}

// Overload taking the cell index of every state.
template <class S>
BasicMarkovKernel<S> conditional_kernel(
    const SpacePtr<S>& space, const std::vector<std::optional<std::size_t>>& cell_of) {
  if (cell_of.size() != space->size()) {
    throw UsageError("conditional kernel: partition has wrong length");
  }
  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t x = 0; x < cell_of.size(); ++x) {
    if (!cell_of[x]) {
      throw UsageError("conditional kernel: state " + space->label(x) +
                       " is unassigned");
    }
    if (*cell_of[x] >= cells.size()) cells.resize(*cell_of[x] + 1);
    cells[*cell_of[x]].push_back(x);
  }
  std::erase_if(cells, [](const auto& c) { return c.empty(); });
  return conditional_kernel(space, cells);
}

// Aliases for the double-precision instantiation.
using FiniteSpace = BasicFiniteSpace<double>;
using MarkovKernel = BasicMarkovKernel<double>;
using BlockWeights = BasicBlockWeights<double>;
using Metric = BasicMetric<double>;

using ExactSpace = BasicFiniteSpace<Rational>;
using ExactKernel = BasicMarkovKernel<Rational>;
using ExactBlockWeights = BasicBlockWeights<Rational>;
using ExactMetric = BasicMetric<Rational>;

// Converts an exact object to double precision.
SpacePtr<double> to_double(const ExactSpace& space);
MarkovKernel to_double(const ExactKernel& kernel, SpacePtr<double> space);
BlockWeights to_double(const ExactBlockWeights& weights);
Metric to_double(const ExactMetric& metric);

}  // namespace entcert
