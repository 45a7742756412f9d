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

#include "entcert/transport.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace entcert {

namespace {

// Remaining mass below this is treated as exhausted.
template <class S>
S residual_eps() {
  return ScalarTraits<S>::flow_eps();
}

template <class S>
bool positive(const S& v) {
  return v > residual_eps<S>();
}

template <class S>
S max_value(const S& a, const S& b) {
  return a < b ? b : a;
}

template <class S>
S min_value(const S& a, const S& b) {
  return b < a ? b : a;
}

// Transportation problem between `supply` (sources) and `demand` (sinks).
// flow is k x l row-major; arcs i->j have unlimited capacity, reverse arcs
// exist where flow > 0. Shared by the cost and the bottleneck solvers.
template <class S>
struct Bipartite {
  std::vector<S> supply;
  std::vector<S> demand;
  std::vector<S> cost;       // k x l
  std::vector<char> allowed; // k x l, bottleneck solver only
  std::vector<S> flow;       // k x l
  std::size_t k = 0;
  std::size_t l = 0;

  void init(std::vector<S> sup, std::vector<S> dem) {
    supply = std::move(sup);
    demand = std::move(dem);
    k = supply.size();
    l = demand.size();
    flow.assign(k * l, S(0));
  }

  bool has_supply() const {
    return std::any_of(supply.begin(), supply.end(),
                       [](const S& s) { return positive(s); });
  }
  bool has_demand() const {
    return std::any_of(demand.begin(), demand.end(),
                       [](const S& s) { return positive(s); });
  }

  // Pushes along the path ending at sink `target`; parent_src[j] is the
  // source that reached sink j, parent_snk[i] the sink that reached source i
  // through a reverse arc (none for origins).
  void augment(std::size_t target, const std::vector<std::size_t>& parent_src,
               const std::vector<std::optional<std::size_t>>& parent_snk) {
    S amount = demand[target];
    std::size_t j = target;
    std::size_t origin;
    while (true) {
      std::size_t i = parent_src[j];
      if (!parent_snk[i]) {
        origin = i;
        break;
      }
      std::size_t jp = *parent_snk[i];
      amount = min_value(amount, flow[i * l + jp]);
      j = jp;
    }
    amount = min_value(amount, supply[origin]);
    j = target;
    while (true) {
      std::size_t i = parent_src[j];
      flow[i * l + j] += amount;
      if (!parent_snk[i]) break;
      std::size_t jp = *parent_snk[i];
      flow[i * l + jp] -= amount;
      if (!positive(flow[i * l + jp])) flow[i * l + jp] = S(0);
      j = jp;
    }
    supply[origin] -= amount;
    demand[target] -= amount;
    if (!positive(supply[origin])) supply[origin] = S(0);
    if (!positive(demand[target])) demand[target] = S(0);
  }

  // Successive shortest paths with potentials; dense Dijkstra.
  void min_cost_flow() {
    std::vector<S> pot_src(k, S(0)), pot_snk(l, S(0));
    std::vector<S> dist_src(k), dist_snk(l);
    std::vector<char> seen_src(k), seen_snk(l), done_src(k), done_snk(l);
    std::vector<std::size_t> parent_src(l);
    std::vector<std::optional<std::size_t>> parent_snk(k);
    while (has_supply() && has_demand()) {
      std::fill(seen_src.begin(), seen_src.end(), 0);
      std::fill(seen_snk.begin(), seen_snk.end(), 0);
      std::fill(done_src.begin(), done_src.end(), 0);
      std::fill(done_snk.begin(), done_snk.end(), 0);
      for (std::size_t i = 0; i < k; ++i) {
        parent_snk[i].reset();
        if (positive(supply[i])) {
          seen_src[i] = 1;
          dist_src[i] = S(0);
        }
      }
      std::optional<std::size_t> target;
      S target_dist(0);
      while (true) {
        // Pick the closest unfinished node; sources win ties.
        bool found = false, is_src = false;
        std::size_t best = 0;
        S best_d(0);
        for (std::size_t i = 0; i < k; ++i) {
          if (seen_src[i] && !done_src[i] && (!found || dist_src[i] < best_d)) {
            found = true, is_src = true, best = i, best_d = dist_src[i];
          }
        }
        for (std::size_t j = 0; j < l; ++j) {
          if (seen_snk[j] && !done_snk[j] && (!found || dist_snk[j] < best_d)) {
            found = true, is_src = false, best = j, best_d = dist_snk[j];
          }
        }
        if (!found) break;
        if (is_src) {
          const std::size_t i = best;
          done_src[i] = 1;
          for (std::size_t j = 0; j < l; ++j) {
            if (done_snk[j]) continue;
            S rc = max_value(S(0), S(cost[i * l + j] + pot_src[i] - pot_snk[j]));
            S nd = dist_src[i] + rc;
            if (!seen_snk[j] || nd < dist_snk[j]) {
              seen_snk[j] = 1;
              dist_snk[j] = nd;
              parent_src[j] = i;
            }
          }
        } else {
          const std::size_t j = best;
          done_snk[j] = 1;
          if (positive(demand[j])) {
            target = j;
            target_dist = dist_snk[j];
            break;
          }
          for (std::size_t i = 0; i < k; ++i) {
            if (done_src[i] || !positive(flow[i * l + j])) continue;
            S rc = max_value(S(0), S(pot_snk[j] - pot_src[i] - cost[i * l + j]));
            S nd = dist_snk[j] + rc;
            if (!seen_src[i] || nd < dist_src[i]) {
              seen_src[i] = 1;
              dist_src[i] = nd;
              parent_snk[i] = j;
            }
          }
        }
      }
      if (!target) {
        throw NumericalError("w1: no augmenting path with mass remaining");
      }
      for (std::size_t i = 0; i < k; ++i) {
        pot_src[i] += (seen_src[i] && dist_src[i] < target_dist) ? dist_src[i]
                                                                   : target_dist;
      }
      for (std::size_t j = 0; j < l; ++j) {
        pot_snk[j] += (seen_snk[j] && dist_snk[j] < target_dist) ? dist_snk[j]
                                                                 : target_dist;
      }
      augment(*target, parent_src, parent_snk);
    }
  }

  // Max-flow by shortest augmenting paths over allowed arcs. Returns true
  // when all supply is routed.
  bool saturate() {
    std::vector<char> seen_src(k), seen_snk(l);
    std::vector<std::size_t> parent_src(l);
    std::vector<std::optional<std::size_t>> parent_snk(k);
    std::vector<std::pair<bool, std::size_t>> queue;
    queue.reserve(k + l);
    while (has_supply() && has_demand()) {
      std::fill(seen_src.begin(), seen_src.end(), 0);
      std::fill(seen_snk.begin(), seen_snk.end(), 0);
      queue.clear();
      for (std::size_t i = 0; i < k; ++i) {
        parent_snk[i].reset();
        if (positive(supply[i])) {
          seen_src[i] = 1;
          queue.push_back({true, i});
        }
      }
      std::optional<std::size_t> target;
      for (std::size_t head = 0; head < queue.size() && !target; ++head) {
        auto [is_src, v] = queue[head];
        if (is_src) {
          for (std::size_t j = 0; j < l; ++j) {
            if (seen_snk[j] || !allowed[v * l + j]) continue;
            seen_snk[j] = 1;
            parent_src[j] = v;
            if (positive(demand[j])) {
              target = j;
              break;
            }
            queue.push_back({false, j});
          }
        } else {
          for (std::size_t i = 0; i < k; ++i) {
            if (seen_src[i] || !positive(flow[i * l + v])) continue;
            seen_src[i] = 1;
            parent_snk[i] = v;
            queue.push_back({true, i});
          }
        }
      }
      if (!target) break;
      augment(*target, parent_src, parent_snk);
    }
    S left(0);
    for (const auto& s : supply) left += s;
    if constexpr (ScalarTraits<S>::exact) {
      return left == S(0);
    } else {
      return left <= 1e-11;
    }
  }
};

template <class S>
void check_distribution(std::span<const S> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw UsageError(std::string(what) + ": distribution has " +
                     std::to_string(v.size()) + " entries, metric has " +
                     std::to_string(n) + " states");
  }
  S total(0);
  for (const auto& x : v) {
    if (x < S(0)) throw UsageError(std::string(what) + ": negative mass");
    total += x;
  }
  S tol = ScalarTraits<S>::exact ? S(0) : S(1e-10);
  if (abs_value(S(total - S(1))) > tol) {
    throw UsageError(std::string(what) + ": marginal sums to " +
                     std::to_string(to_double(total)) + ", not 1");
  }
}

}  // namespace

template <class S>
std::vector<S> BasicTransportPlan<S>::row_marginal(std::size_t n) const {
  std::vector<S> out(n, S(0));
  for (const auto& e : entries) out.at(e.from) += e.mass;
  return out;
}

template <class S>
std::vector<S> BasicTransportPlan<S>::column_marginal(std::size_t n) const {
  std::vector<S> out(n, S(0));
  for (const auto& e : entries) out.at(e.to) += e.mass;
  return out;
}

template <class S>
std::vector<std::vector<double>> BasicTransportPlan<S>::dense(
    std::size_t n) const {
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (const auto& e : entries) out.at(e.from).at(e.to) += to_double(e.mass);
  return out;
}

template <class S>
std::vector<KernelEntry<S>> to_sparse(std::span<const S> dense) {
  std::vector<KernelEntry<S>> out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != S(0)) out.push_back({i, dense[i]});
  }
  return out;
}

template <class S>
TransportResult<S> w1_sparse(SparseMeasure<S> mu, SparseMeasure<S> nu,
                             const BasicMetric<S>& metric, bool want_plan) {
  // W1 depends only on mu - nu; the common part stays in place.
  std::vector<std::size_t> src_state, snk_state;
  std::vector<S> supply, demand;
  TransportResult<S> result;
  std::size_t a = 0, b = 0;
  while (a < mu.size() || b < nu.size()) {
    std::size_t col;
    S m(0), v(0);
    if (b >= nu.size() || (a < mu.size() && mu[a].col < nu[b].col)) {
      col = mu[a].col, m = mu[a].value, ++a;
    } else if (a >= mu.size() || nu[b].col < mu[a].col) {
      col = nu[b].col, v = nu[b].value, ++b;
    } else {
      col = mu[a].col, m = mu[a].value, v = nu[b].value, ++a, ++b;
    }
    S shared = min_value(m, v);
    if (want_plan && shared > S(0)) result.plan.entries.push_back({col, col, shared});
    S diff = m - v;
    if (positive(diff)) {
      src_state.push_back(col);
      supply.push_back(diff);
    } else if (positive(S(-diff))) {
      snk_state.push_back(col);
      demand.push_back(S(-diff));
    }
  }
  if (!supply.empty() && !demand.empty()) {
    Bipartite<S> g;
    g.init(std::move(supply), std::move(demand));
    g.cost.resize(g.k * g.l);
    for (std::size_t i = 0; i < g.k; ++i)
      for (std::size_t j = 0; j < g.l; ++j)
        g.cost[i * g.l + j] = metric(src_state[i], snk_state[j]);
    g.min_cost_flow();
    for (std::size_t i = 0; i < g.k; ++i) {
      for (std::size_t j = 0; j < g.l; ++j) {
        const S& f = g.flow[i * g.l + j];
        if (f == S(0)) continue;
        result.value += f * g.cost[i * g.l + j];
        if (want_plan) result.plan.entries.push_back({src_state[i], snk_state[j], f});
      }
    }
  }
  result.plan.cost = result.value;
  return result;
}

template <class S>
TransportResult<S> winf_sparse(SparseMeasure<S> mu, SparseMeasure<S> nu,
                               const BasicMetric<S>& metric, bool want_plan) {
  Bipartite<S> g;
  std::vector<S> supply, demand;
  for (const auto& e : mu) supply.push_back(e.value);
  for (const auto& e : nu) demand.push_back(e.value);
  g.init(supply, demand);
  g.cost.resize(g.k * g.l);
  std::vector<S> levels;
  levels.reserve(g.k * g.l);
  for (std::size_t i = 0; i < g.k; ++i) {
    for (std::size_t j = 0; j < g.l; ++j) {
      g.cost[i * g.l + j] = metric(mu[i].col, nu[j].col);
      levels.push_back(g.cost[i * g.l + j]);
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  g.allowed.resize(g.k * g.l);

  auto feasible = [&](const S& t) {
    for (std::size_t e = 0; e < g.cost.size(); ++e) g.allowed[e] = g.cost[e] <= t;
    g.supply = supply;
    g.demand = demand;
    std::fill(g.flow.begin(), g.flow.end(), S(0));
    return g.saturate();
  };

  // The largest level is always feasible: every arc is allowed.
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(levels[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  TransportResult<S> result;
  result.value = levels[lo];
  if (want_plan) {
    if (!feasible(levels[lo])) {
      throw NumericalError("winf: optimal threshold lost feasibility");
    }
    for (std::size_t i = 0; i < g.k; ++i) {
      for (std::size_t j = 0; j < g.l; ++j) {
        const S& f = g.flow[i * g.l + j];
        if (f > S(0)) result.plan.entries.push_back({mu[i].col, nu[j].col, f});
      }
    }
  }
  result.plan.cost = result.value;
  return result;
}

template <class S>
TransportResult<S> w1(std::span<const S> mu, std::span<const S> nu,
                      const BasicMetric<S>& metric) {
  check_distribution(mu, metric.size(), "w1");
  check_distribution(nu, metric.size(), "w1");
  auto a = to_sparse(mu);
  auto b = to_sparse(nu);
  return w1_sparse<S>(a, b, metric, true);
}

template <class S>
TransportResult<S> winf(std::span<const S> mu, std::span<const S> nu,
                        const BasicMetric<S>& metric) {
  check_distribution(mu, metric.size(), "winf");
  check_distribution(nu, metric.size(), "winf");
  auto a = to_sparse(mu);
  auto b = to_sparse(nu);
  return winf_sparse<S>(a, b, metric, true);
}

#define ENTCERT_INSTANTIATE_TRANSPORT(S)                                      \
  template struct BasicTransportPlan<S>;                                      \
  template std::vector<KernelEntry<S>> to_sparse<S>(std::span<const S>);      \
  template TransportResult<S> w1<S>(std::span<const S>, std::span<const S>,   \
                                    const BasicMetric<S>&);                   \
  template TransportResult<S> winf<S>(std::span<const S>, std::span<const S>, \
                                      const BasicMetric<S>&);                 \
  template TransportResult<S> w1_sparse<S>(SparseMeasure<S>, SparseMeasure<S>, \
                                           const BasicMetric<S>&, bool);      \
  template TransportResult<S> winf_sparse<S>(                                 \
      SparseMeasure<S>, SparseMeasure<S>, const BasicMetric<S>&, bool);

ENTCERT_INSTANTIATE_TRANSPORT(double)
ENTCERT_INSTANTIATE_TRANSPORT(Rational)

#undef ENTCERT_INSTANTIATE_TRANSPORT

}  // namespace entcert
