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

#include "entcert/certifier.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "entcert/parallel.hpp"
#include "entcert/transport.hpp"

namespace entcert {

const char* pair_mode_name(PairMode mode) {
  return mode == PairMode::kExhaustive ? "exhaustive" : "generator-edges";
}

PairMode parse_pair_mode(const std::string& name) {
  if (name == "exhaustive") return PairMode::kExhaustive;
  if (name == "generator-edges" || name == "generator") {
    return PairMode::kGeneratorEdges;
  }
  throw UsageError("unknown pair mode '" + name +
                   "' (expected exhaustive or generator-edges)");
}

template <class S>
PairSet pair_set(const BasicFiniteSpace<S>& space, const BasicMetric<S>& metric,
                 PairMode mode) {
  if (space.size() != metric.size()) {
    throw UsageError("pair set: metric and space sizes differ");
  }
  PairSet out;
  out.mode = mode;
  const std::size_t n = space.size();
  if (mode == PairMode::kExhaustive) {
    out.pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out.pairs.push_back({i, j});
  } else {
    if (!metric.has_generators()) {
      throw UsageError("generator-edges mode needs a metric with generator edges");
    }
    for (auto [u, v] : metric.generators()) {
      out.pairs.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()),
                    out.pairs.end());
  }
  return out;
}

template <class S>
LipschitzResult<S> lipschitz_constant(const BasicMarkovKernel<S>& kernel,
                                      const BasicMetric<S>& metric,
                                      const PairSet& pairs) {
  kernel.require_stationary("lipschitz_constant");
  if (pairs.pairs.empty()) throw UsageError("lipschitz_constant: empty pair set");
  if (kernel.size() != metric.size()) {
    throw UsageError("lipschitz_constant: metric and kernel sizes differ");
  }
  std::vector<S> ratio(pairs.pairs.size());
  parallel_for(pairs.pairs.size(), [&](std::size_t p) {
    auto [x, y] = pairs.pairs[p];
    auto w = winf_sparse<S>(kernel.row(x), kernel.row(y), metric);
    ratio[p] = w.value / metric(x, y);
  });
  LipschitzResult<S> out;
  out.ell = ratio[0];
  out.worst_pair = pairs.pairs[0];
  for (std::size_t p = 1; p < ratio.size(); ++p) {
    if (ratio[p] > out.ell) {
      out.ell = ratio[p];
      out.worst_pair = pairs.pairs[p];
    }
  }
  return out;
}

namespace {

// Shortest path in the generator graph with edge lengths taken from the
// metric.
template <class S>
std::vector<std::size_t> generator_path(const BasicMetric<S>& metric,
                                        const std::vector<std::vector<std::size_t>>& adj,
                                        std::size_t from, std::size_t to) {
  const std::size_t n = adj.size();
  std::vector<std::optional<S>> dist(n);
  std::vector<std::size_t> parent(n, n);
  std::vector<char> done(n, 0);
  dist[from] = S(0);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && dist[v] && (u == n || *dist[v] < *dist[u])) u = v;
    }
    if (u == n || u == to) break;
    done[u] = 1;
    for (std::size_t v : adj[u]) {
      S nd = *dist[u] + metric(u, v);
      if (!dist[v] || nd < *dist[v]) {
        dist[v] = nd;
        parent[v] = u;
      }
    }
  }
  std::vector<std::size_t> path{to};
  while (path.back() != from) {
    std::size_t p = parent[path.back()];
    if (p == n) throw ContractViolation("generator graph is disconnected");
    path.push_back(p);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

template <class S>
void check_generator_paths(const std::vector<BasicMarkovKernel<S>>& adjoints,
                           const std::vector<S>& ell,
                           const BasicMetric<S>& metric,
                           const CertifyOptions<S>& options) {
  const std::size_t n = metric.size();
  if (n < 2) return;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [u, v] : metric.generators()) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const S slack = ScalarTraits<S>::exact ? S(0) : S(1e-9);
  for (std::size_t c = 0; c < options.spot_checks; ++c) {
    std::size_t x = pick(rng), y = pick(rng);
    if (x == y) continue;
    auto path = generator_path(metric, adj, x, y);
    for (std::size_t i = 0; i < adjoints.size(); ++i) {
      const auto& k = adjoints[i];
      S direct = winf_sparse<S>(k.row(x), k.row(y), metric).value;
      S along(0);
      for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        along += winf_sparse<S>(k.row(path[s]), k.row(path[s + 1]), metric).value;
      }
      if (direct > along + slack || direct > ell[i] * metric(x, y) + slack) {
        throw ContractViolation(
            "generator-edges W_inf bound fails between " +
            k.space()->label(x) + " and " + k.space()->label(y) +
            " for kernel " + std::to_string(i));
      }
    }
  }
}

}  // namespace

template <class S>
BasicCertReport<S> certify_kappa(const std::vector<BasicMarkovKernel<S>>& kernels,
                                 const BasicBlockWeights<S>& theta,
                                 const BasicMetric<S>& metric,
                                 const PairSet& pairs,
                                 const CertifyOptions<S>& options) {
  const auto start = std::chrono::steady_clock::now();
  if (kernels.empty()) throw UsageError("certify: no kernels");
  if (kernels.size() != theta.size()) {
    throw UsageError("certify: " + std::to_string(kernels.size()) +
                     " kernels but " + std::to_string(theta.size()) + " weights");
  }
  if (pairs.pairs.empty()) throw UsageError("certify: empty pair set");
  const auto& space = kernels.front().space();
  for (const auto& k : kernels) {
    if (k.space() != space) throw UsageError("certify: kernels on different spaces");
    k.require_stationary("certify");
  }
  if (metric.size() != space->size()) {
    throw UsageError("certify: metric and space sizes differ");
  }

  BasicCertReport<S> report;
  report.pair_mode = pairs.mode;
  report.pair_count = pairs.pairs.size();

  std::vector<BasicMarkovKernel<S>> adjoints;
  adjoints.reserve(kernels.size());
  for (const auto& k : kernels) adjoints.push_back(adjoint(k));
  for (const auto& a : adjoints) {
    auto lip = lipschitz_constant(a, metric, pairs);
    report.ell.push_back(lip.ell);
    report.ell_worst_pairs.push_back(lip.worst_pair);
  }
  if (pairs.mode == PairMode::kGeneratorEdges) {
    check_generator_paths(adjoints, report.ell, metric, options);
    report.spot_checks = options.spot_checks;
  }
  if (options.ell_override) {
    const auto& over = *options.ell_override;
    if (over.size() != kernels.size()) {
      throw UsageError("certify: ell override has wrong length");
    }
    const S slack = ScalarTraits<S>::exact ? S(0) : S(1e-12);
    for (std::size_t i = 0; i < over.size(); ++i) {
      if (report.ell[i] > over[i] + slack) {
        throw ContractViolation("certify: supplied ell[" + std::to_string(i) +
                                "] = " + std::to_string(to_double(over[i])) +
                                " is below the measured " +
                                std::to_string(to_double(report.ell[i])));
      }
    }
    report.ell = over;
  }

  std::vector<S> weight(kernels.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) weight[i] = theta[i] * report.ell[i];

  std::vector<S> ratio(pairs.pairs.size());
  parallel_for(pairs.pairs.size(), [&](std::size_t p) {
    auto [x, y] = pairs.pairs[p];
    S acc(0);
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      if (weight[i] == S(0)) continue;
      acc += weight[i] *
             w1_sparse<S>(kernels[i].row(x), kernels[i].row(y), metric).value;
    }
    ratio[p] = acc / metric(x, y);
  });
  std::size_t worst = 0;
  for (std::size_t p = 1; p < ratio.size(); ++p) {
    if (ratio[p] > ratio[worst]) worst = p;
  }
  report.max_ratio = ratio[worst];
  report.worst_pair = pairs.pairs[worst];
  report.worst_pair_labels = {space->label(report.worst_pair.first),
                              space->label(report.worst_pair.second)};
  S kappa = S(1) - report.max_ratio;
  if (kappa < S(0)) kappa = S(0);
  if (kappa > S(1)) kappa = S(1);
  report.kappa = kappa;
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

#define ENTCERT_INSTANTIATE_CERTIFIER(S)                                       \
  template PairSet pair_set<S>(const BasicFiniteSpace<S>&,                     \
                               const BasicMetric<S>&, PairMode);               \
  template LipschitzResult<S> lipschitz_constant<S>(                           \
      const BasicMarkovKernel<S>&, const BasicMetric<S>&, const PairSet&);     \
  template BasicCertReport<S> certify_kappa<S>(                                \
      const std::vector<BasicMarkovKernel<S>>&, const BasicBlockWeights<S>&,   \
      const BasicMetric<S>&, const PairSet&, const CertifyOptions<S>&);

ENTCERT_INSTANTIATE_CERTIFIER(double)
ENTCERT_INSTANTIATE_CERTIFIER(Rational)

#undef ENTCERT_INSTANTIATE_CERTIFIER

}  // namespace entcert
