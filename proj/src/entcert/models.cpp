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

#include "entcert/models.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_map>

namespace entcert {

namespace {

Mask full_mask(std::size_t n) {
  return n >= 32 ? ~Mask(0) : static_cast<Mask>((std::uint64_t(1) << n) - 1);
}

template <class S>
S ratio(std::uint64_t num, std::uint64_t den) {
  if constexpr (ScalarTraits<S>::exact) {
    return S(static_cast<long long>(num)) / S(static_cast<long long>(den));
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

template <class S>
std::vector<S> uniform_marginal(std::size_t s) {
  std::vector<S> m(s, S(1) / S(static_cast<long long>(s)));
  return m;
}

}  // namespace

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string mask_to_string(Mask m) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < 32; ++i) {
    if (!(m >> i & 1u)) continue;
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

template <class S>
BasicBlockFamily<S>::BasicBlockFamily(std::size_t n, std::vector<Mask> blocks,
                                      BasicBlockWeights<S> theta)
    : n_(n), blocks_(std::move(blocks)), theta_(std::move(theta)) {
  if (n_ == 0 || n_ > kMaxCoordinates) {
    throw UsageError("block family: coordinate count must be in [1, " +
                     std::to_string(kMaxCoordinates) + "]");
  }
  if (blocks_.size() != theta_.size()) {
    throw UsageError("block family: " + std::to_string(blocks_.size()) +
                     " blocks but " + std::to_string(theta_.size()) + " weights");
  }
  auto sorted = blocks_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("block family: duplicate block");
  }
  for (Mask b : blocks_) {
    if (b & ~full_mask(n_)) {
      throw UsageError("block family: block " + mask_to_string(b) +
                       " exceeds the coordinate range");
    }
  }
}

template <class S>
S theta_star(const BasicBlockFamily<S>& family) {
  std::optional<S> best;
  for (std::size_t i = 0; i < family.coordinates(); ++i) {
    S acc(0);
    for (std::size_t b = 0; b < family.size(); ++b) {
      if (family.blocks()[b] >> i & 1u) acc += family.theta()[b];
    }
    if (!best || acc < *best) best = acc;
  }
  return *best;
}

template <class S>
S theta_star_star(const BasicBlockFamily<S>& family) {
  const std::size_t n = family.coordinates();
  if (n < 2) throw UsageError("theta_star_star needs at least two coordinates");
  std::optional<S> best;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Mask pair = (Mask(1) << i) | (Mask(1) << j);
      S acc(0);
      for (std::size_t b = 0; b < family.size(); ++b) {
        if ((family.blocks()[b] & pair) == pair) acc += family.theta()[b];
      }
      if (!best || acc < *best) best = acc;
    }
  }
  return *best;
}

std::vector<Mask> block_pattern(std::size_t n, const std::string& pattern) {
  if (n == 0 || n > kMaxCoordinates) {
    throw UsageError("block pattern: coordinate count must be in [1, " +
                     std::to_string(kMaxCoordinates) + "]");
  }
  std::vector<Mask> out;
  const Mask full = full_mask(n);
  auto of_size = [&](std::size_t l) {
    if (l == 0 || l > n) {
      throw ParseError("block pattern '" + pattern + "': size must be in [1, " +
                       std::to_string(n) + "]");
    }
    for (Mask m = 1; m <= full && m != 0; ++m) {
      if (static_cast<std::size_t>(std::popcount(m)) == l) out.push_back(m);
      if (m == full) break;
    }
  };
  if (pattern == "singletons") {
    of_size(1);
  } else if (pattern == "pairs") {
    if (n < 2) throw ParseError("block pattern 'pairs' needs n >= 2");
    of_size(2);
  } else if (pattern == "all-but-one") {
    if (n < 2) throw ParseError("block pattern 'all-but-one' needs n >= 2");
    for (std::size_t i = 0; i < n; ++i) out.push_back(full ^ (Mask(1) << i));
  } else if (pattern == "full") {
    out.push_back(full);
  } else if (pattern.rfind("size-", 0) == 0) {
    const std::string digits = pattern.substr(5);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError("block pattern '" + pattern + "': expected size-<L>");
    }
    of_size(static_cast<std::size_t>(std::stoul(digits)));
  } else {
    throw ParseError("unknown block pattern '" + pattern +
                     "' (expected singletons, pairs, all-but-one, full or size-L)");
  }
  return out;
}

template <class S>
BasicBlockFamily<S> pattern_family(std::size_t n, const std::string& pattern) {
  auto blocks = block_pattern(n, pattern);
  auto theta = BasicBlockWeights<S>::uniform(blocks.size());
  return BasicBlockFamily<S>(n, std::move(blocks), std::move(theta));
}

template <class S>
BasicBlockFamily<S> random_family(std::size_t n, std::mt19937_64& rng,
                                  std::size_t min_size, std::size_t max_blocks) {
  std::vector<Mask> pool;
  const Mask full = full_mask(n);
  for (Mask m = 1;; ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) >= min_size) pool.push_back(m);
    if (m == full) break;
  }
  if (pool.empty()) throw UsageError("random family: no admissible blocks");
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_int_distribution<std::size_t> count(1, std::min(max_blocks, pool.size()));
  pool.resize(count(rng));
  std::sort(pool.begin(), pool.end());
  std::uniform_int_distribution<int> weight(1, 10);
  std::vector<S> raw(pool.size());
  for (auto& w : raw) w = S(weight(rng));
  return BasicBlockFamily<S>(n, std::move(pool),
                             BasicBlockWeights<S>::normalized(std::move(raw)));
}

template <class S>
BasicModel<S> build_product(const std::vector<std::size_t>& sizes,
                            const BasicBlockFamily<S>& family,
                            const std::vector<std::vector<S>>& marginals) {
  const std::size_t n = sizes.size();
  if (n == 0) throw UsageError("product: no coordinates");
  if (family.coordinates() != n) {
    throw UsageError("product: block family has " +
                     std::to_string(family.coordinates()) + " coordinates, space has " +
                     std::to_string(n));
  }
  std::size_t states = 1;
  for (std::size_t s : sizes) {
    if (s < 1) throw UsageError("product: coordinate size must be >= 1");
    if (states * s > kMaxProductStates) {
      throw UsageError("product: more than " + std::to_string(kMaxProductStates) +
                       " states");
    }
    states *= s;
  }
  std::vector<std::vector<S>> marg = marginals;
  if (marg.empty()) {
    for (std::size_t s : sizes) marg.push_back(uniform_marginal<S>(s));
  }
  if (marg.size() != n) throw UsageError("product: marginal count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (marg[i].size() != sizes[i]) {
      throw UsageError("product: marginal " + std::to_string(i) + " has wrong length");
    }
    BasicBlockWeights<S> check(marg[i]);  // validates a probability vector
    (void)check;
  }
  // Mixed radix, coordinate 0 most significant.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n - 1; i-- > 0;) stride[i] = stride[i + 1] * sizes[i + 1];
  auto coords = std::make_shared<std::vector<std::uint32_t>>(states * n);
  const bool compact = std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s <= 10; });
  std::vector<std::string> labels(states);
  std::vector<S> probs(states);
  for (std::size_t x = 0; x < states; ++x) {
    S p(1);
    std::string label;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t c = static_cast<std::uint32_t>(x / stride[i] % sizes[i]);
      (*coords)[x * n + i] = c;
      p *= marg[i][c];
      if (!compact && i > 0) label += ",";
      label += std::to_string(c);
    }
    labels[x] = std::move(label);
    probs[x] = p;
  }
  if constexpr (!ScalarTraits<S>::exact) {
    double total = 0.0;
    for (double v : probs) total += v;
    for (double& v : probs) v /= total;
  }
  auto space = std::make_shared<const BasicFiniteSpace<S>>(std::move(labels), std::move(probs));

  std::vector<BasicMarkovKernel<S>> kernels;
  std::size_t nnz = 0;
  for (Mask a : family.blocks()) {
    std::size_t cell_size = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (a >> i & 1u) cell_size *= sizes[i];
    nnz += states * cell_size;
    if (nnz > 50'000'000) throw UsageError("product: kernels too large");
    std::vector<std::optional<std::size_t>> cell_of(states);
    for (std::size_t x = 0; x < states; ++x) {
      std::size_t key = x;
      for (std::size_t i = 0; i < n; ++i) {
        if (a >> i & 1u) key -= (*coords)[x * n + i] * stride[i];
      }
      cell_of[x] = key;
    }
    kernels.push_back(conditional_kernel(space, cell_of));
  }

  std::vector<Edge> edges;
  for (std::size_t x = 0; x < states; ++x) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t c = (*coords)[x * n + i];
      for (std::uint32_t v = c + 1; v < sizes[i]; ++v) {
        edges.push_back({x, x + (v - c) * stride[i]});
      }
    }
  }
  auto hamming = [coords, n](std::size_t x, std::size_t y) {
    long long d = 0;
    for (std::size_t i = 0; i < n; ++i) d += (*coords)[x * n + i] != (*coords)[y * n + i];
    return S(d);
  };
  auto metric = BasicMetric<S>::from_function(states, hamming, std::move(edges));

  BasicModel<S> model{"product", space, std::move(kernels), family.theta(),
                      std::move(metric), family, {}};
  model.theory["theta_star"] = to_double(theta_star(family));
  if (n >= 2) model.theory["theta_star_star"] = to_double(theta_star_star(family));
  return model;
}

namespace {

struct NsetIndex {
  std::vector<Mask> sets;
  std::unordered_map<Mask, std::size_t> index;
};

NsetIndex enumerate_nsets(std::size_t N, std::size_t n) {
  NsetIndex out;
  if (n == 0) {
    out.sets.push_back(0);
  } else {
    Mask m = full_mask(n);
    const Mask limit = full_mask(N);
    while (true) {
      out.sets.push_back(m);
      // Next mask with the same popcount.
      Mask c = m & (~m + 1);
      Mask r = m + c;
      if (r == 0 || (r & ~limit)) break;
      m = (((r ^ m) >> 2) / c) | r;
      if (m & ~limit) break;
    }
  }
  for (std::size_t i = 0; i < out.sets.size(); ++i) out.index.emplace(out.sets[i], i);
  return out;
}

void check_nset_params(std::size_t N, std::size_t n) {
  if (n < 1 || n >= N) throw UsageError("nsets: need 1 <= n < N");
  if (N > 30) throw UsageError("nsets: N must be at most 30");
  if (binomial(N, n) > kMaxNsetStates) {
    throw UsageError("nsets: C(N, n) = " + std::to_string(binomial(N, n)) +
                     " exceeds " + std::to_string(kMaxNsetStates) + " states");
  }
}

template <class S>
BasicMarkovKernel<S> downup_kernel(const SpacePtr<S>& space, const NsetIndex& sets,
                                   std::size_t N, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) throw UsageError("nsets: need 1 <= k <= n");
  const S weight = ratio<S>(1, binomial(n, k) * binomial(N - n + k, k));
  const Mask universe = full_mask(N);
  std::vector<std::vector<KernelEntry<S>>> rows(sets.sets.size());
  for (std::size_t x = 0; x < sets.sets.size(); ++x) {
    const Mask X = sets.sets[x];
    // Down: keep a subset Z of X with n-k elements. Up: add k from outside Z.
    std::unordered_map<std::size_t, std::uint64_t> hits;
    for (Mask z = X;; z = (z - 1) & X) {
      if (static_cast<std::size_t>(std::popcount(z)) == n - k) {
        const Mask outside = universe & ~z;
        for (Mask add = outside;; add = (add - 1) & outside) {
          if (static_cast<std::size_t>(std::popcount(add)) == k) {
            ++hits[sets.index.at(z | add)];
          }
          if (add == 0) break;
        }
      }
      if (z == 0) break;
    }
    for (auto [y, count] : hits) {
      rows[x].push_back({y, S(static_cast<long long>(count)) * weight});
    }
  }
  return BasicMarkovKernel<S>(space, std::move(rows));
}

std::string nset_label(Mask m) { return mask_to_string(m); }

template <class S>
BasicModel<S> nsets_model(std::size_t N, std::size_t n,
                          const std::vector<std::size_t>& ks,
                          BasicBlockWeights<S> theta) {
  check_nset_params(N, n);
  auto sets = std::make_shared<NsetIndex>(enumerate_nsets(N, n));
  std::vector<std::string> labels;
  for (Mask m : sets->sets) labels.push_back(nset_label(m));
  auto space = std::make_shared<const BasicFiniteSpace<S>>(
      BasicFiniteSpace<S>::uniform(std::move(labels)));
  std::vector<BasicMarkovKernel<S>> kernels;
  for (std::size_t k : ks) kernels.push_back(downup_kernel<S>(space, *sets, N, n, k));
  std::vector<Edge> edges;
  for (std::size_t x = 0; x < sets->sets.size(); ++x)
    for (std::size_t y = x + 1; y < sets->sets.size(); ++y)
      if (static_cast<std::size_t>(std::popcount(sets->sets[x] & sets->sets[y])) == n - 1)
        edges.push_back({x, y});
  auto discrepancy = [sets, n](std::size_t x, std::size_t y) {
    return S(static_cast<long long>(
        n - static_cast<std::size_t>(std::popcount(sets->sets[x] & sets->sets[y]))));
  };
  auto metric = BasicMetric<S>::from_function(sets->sets.size(), discrepancy, std::move(edges));
  return BasicModel<S>{"nsets", space, std::move(kernels), std::move(theta),
                       std::move(metric), std::nullopt, {}};
}

}  // namespace

template <class S>
BasicModel<S> build_nsets(std::size_t N, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) throw UsageError("nsets: need 1 <= k <= n");
  auto model = nsets_model<S>(N, n, {k}, BasicBlockWeights<S>({S(1)}));
  std::vector<S> delta(n, S(0));
  delta[k - 1] = S(1);
  model.theory["kappa_theory"] = to_double(downup_theoretical_kappa<S>(N, n, delta));
  return model;
}

template <class S>
BasicModel<S> build_nsets_mixture(std::size_t N, std::size_t n,
                                  const BasicBlockWeights<S>& theta) {
  if (theta.size() != n) {
    throw UsageError("nsets: expected " + std::to_string(n) + " weights (k = 1..n)");
  }
  std::vector<std::size_t> ks(n);
  std::iota(ks.begin(), ks.end(), 1);
  auto model = nsets_model<S>(N, n, ks, theta);
  model.theory["kappa_theory"] = to_double(downup_theoretical_kappa<S>(N, n, theta.weights()));
  return model;
}

template <class S>
S downup_theoretical_kappa(std::size_t N, std::size_t n, const std::vector<S>& theta) {
  if (n < 1 || n >= N) throw UsageError("downup kappa: need 1 <= n < N");
  if (theta.size() != n) throw UsageError("downup kappa: need one weight per k = 1..n");
  BasicBlockWeights<S> check(theta);
  (void)check;
  S kappa(0);
  for (std::size_t k = 1; k <= n; ++k) {
    const S kn = ratio<S>(k, n);
    kappa += theta[k - 1] * (kn + ratio<S>(k, N - (n - k)) * (S(1) - kn));
  }
  return kappa;
}

std::size_t cayley_distance(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw UsageError("cayley distance: size mismatch");
  std::vector<int> inv_b(n);
  for (std::size_t i = 0; i < n; ++i) inv_b[b[i]] = static_cast<int>(i);
  std::vector<char> seen(n, 0);
  std::size_t cycles = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++cycles;
    for (std::size_t i = s; !seen[i]; i = a[inv_b[i]]) seen[i] = 1;
  }
  return n - cycles;
}

namespace {

std::size_t permutation_rank(const std::vector<int>& p) {
  const std::size_t n = p.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller += p[j] < p[i];
    std::size_t f = 1;
    for (std::size_t m = 2; m <= n - 1 - i; ++m) f *= m;
    rank += smaller * f;
  }
  return rank;
}

}  // namespace

template <class S>
BasicModel<S> build_permutations(std::size_t n, const BasicBlockFamily<S>& family) {
  if (n < 1 || n > kMaxPermutationSize) {
    throw UsageError("permutations: n must be in [1, " +
                     std::to_string(kMaxPermutationSize) + "]");
  }
  if (family.coordinates() != n) {
    throw UsageError("permutations: block family has " +
                     std::to_string(family.coordinates()) + " positions, need " +
                     std::to_string(n));
  }
  auto perms = std::make_shared<std::vector<std::vector<int>>>();
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms->push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  const std::size_t states = perms->size();
  std::vector<std::string> labels;
  for (const auto& q : *perms) {
    std::string s;
    for (int v : q) s += std::to_string(v);
    labels.push_back(s);
  }
  auto space = std::make_shared<const BasicFiniteSpace<S>>(
      BasicFiniteSpace<S>::uniform(std::move(labels)));

  std::vector<BasicMarkovKernel<S>> kernels;
  for (Mask a : family.blocks()) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i)
      if (a >> i & 1u) pos.push_back(i);
    std::uint64_t fact = 1;
    for (std::size_t m = 2; m <= pos.size(); ++m) fact *= m;
    const S w = ratio<S>(1, fact);
    std::vector<std::vector<KernelEntry<S>>> rows(states);
    for (std::size_t x = 0; x < states; ++x) {
      const auto& sigma = (*perms)[x];
      std::vector<int> vals;
      for (std::size_t j : pos) vals.push_back(sigma[j]);
      std::sort(vals.begin(), vals.end());
      auto eta = sigma;
      do {
        for (std::size_t t = 0; t < pos.size(); ++t) eta[pos[t]] = vals[t];
        rows[x].push_back({permutation_rank(eta), w});
      } while (std::next_permutation(vals.begin(), vals.end()));
    }
    kernels.push_back(BasicMarkovKernel<S>(space, std::move(rows)));
  }

  std::vector<Edge> edges;
  for (std::size_t x = 0; x < states; ++x) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        auto q = (*perms)[x];
        std::swap(q[i], q[j]);
        std::size_t y = permutation_rank(q);
        if (x < y) edges.push_back({x, y});
      }
    }
  }
  auto cayley = [perms](std::size_t x, std::size_t y) {
    return S(static_cast<long long>(cayley_distance((*perms)[x], (*perms)[y])));
  };
  auto metric = BasicMetric<S>::from_function(states, cayley, std::move(edges));
  BasicModel<S> model{"permutations", space, std::move(kernels), family.theta(),
                      std::move(metric), family, {}};
  model.theory["theta_star"] = to_double(theta_star(family));
  if (n >= 2) model.theory["theta_star_star"] = to_double(theta_star_star(family));
  return model;
}

#define ENTCERT_INSTANTIATE_MODELS(S)                                                \
  template class BasicBlockFamily<S>;                                                \
  template S theta_star<S>(const BasicBlockFamily<S>&);                              \
  template S theta_star_star<S>(const BasicBlockFamily<S>&);                         \
  template BasicBlockFamily<S> pattern_family<S>(std::size_t, const std::string&);   \
  template BasicBlockFamily<S> random_family<S>(std::size_t, std::mt19937_64&,       \
                                                std::size_t, std::size_t);           \
  template BasicModel<S> build_product<S>(const std::vector<std::size_t>&,           \
                                          const BasicBlockFamily<S>&,                \
                                          const std::vector<std::vector<S>>&);       \
  template BasicModel<S> build_nsets<S>(std::size_t, std::size_t, std::size_t);      \
  template BasicModel<S> build_nsets_mixture<S>(std::size_t, std::size_t,            \
                                                const BasicBlockWeights<S>&);        \
  template S downup_theoretical_kappa<S>(std::size_t, std::size_t,                   \
                                         const std::vector<S>&);                     \
  template BasicModel<S> build_permutations<S>(std::size_t, const BasicBlockFamily<S>&);

ENTCERT_INSTANTIATE_MODELS(double)
ENTCERT_INSTANTIATE_MODELS(Rational)

#undef ENTCERT_INSTANTIATE_MODELS

}  // namespace entcert
