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

#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "entcert/measure.hpp"

namespace entcert::testing {

inline std::vector<std::string> numbered_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

inline SpacePtr<double> uniform_space(std::size_t n) {
  return std::make_shared<const FiniteSpace>(
      FiniteSpace::uniform(numbered_labels(n)));
}

inline SpacePtr<double> random_space(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) total += (v = u(rng));
  for (auto& v : p) v /= total;
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) rest += p[i];
  p[n - 1] = 1.0 - rest;
  return std::make_shared<const FiniteSpace>(numbered_labels(n), p);
}

// Metropolis chain for P with a random proposal; reversible, so stationary.
inline MarkovKernel metropolis_kernel(const SpacePtr<double>& space,
                                      std::mt19937_64& rng) {
  const std::size_t n = space->size();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> q(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y) total += (q[x * n + y] = u(rng));
    for (std::size_t y = 0; y < n; ++y) q[x * n + y] /= total;
  }
  std::vector<double> t(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double moved = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      double px = space->prob(x), py = space->prob(y);
      // P(x) Q(x,y) min(1, ratio) written symmetrically.
      double flow = std::min(px * q[x * n + y], py * q[y * n + x]);
      t[x * n + y] = flow / px;
      moved += t[x * n + y];
    }
    t[x * n + x] = 1.0 - moved;
  }
  return MarkovKernel::from_dense(space, t);
}

inline MarkovKernel compose(const MarkovKernel& a, const MarkovKernel& b) {
  const std::size_t n = a.size();
  auto da = a.dense(), db = b.dense();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        out[x * n + z] += da[x * n + y] * db[y * n + z];
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t z = 0; z < n; ++z) total += out[x * n + z];
    for (std::size_t z = 0; z < n; ++z) out[x * n + z] /= total;
  }
  return MarkovKernel::from_dense(a.space(), out);
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng,
                                         double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline Density random_density(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = e(rng);
  return Density(v);
}

inline double inner(const FiniteSpace& space, const std::vector<double>& f,
                    const std::vector<double>& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += space.prob(i) * f[i] * g[i];
  return acc;
}

}  // namespace entcert::testing
