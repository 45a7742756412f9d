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

#include "entcert/measure.hpp"

#include <cmath>

namespace entcert {

namespace {

// phi(1 + t) = (1 + t) log(1 + t) - t, the entropy integrand relative to
// the mean. Uses the power series near t = 0 where the closed form cancels.
double phi_shifted(double t) {
  if (t <= -1.0) return 1.0;
  if (std::abs(t) < 1e-2) {
    double acc = 0.0;
    double power = t * t;
    for (int k = 2; k <= 14; ++k) {
      double term = power / (static_cast<double>(k) * (k - 1));
      acc += (k % 2 == 0) ? term : -term;
      power *= t;
    }
    return acc;
  }
  return (1.0 + t) * std::log1p(t) - t;
}

}  // namespace

double entropy_from_deviation(double mean, std::span<const double> dev,
                              std::span<const double> probs) {
  if (dev.size() != probs.size()) {
    throw UsageError("entropy: dimension mismatch");
  }
  if (!(mean > 0.0)) {
    throw DomainError("entropy of zero function undefined for ratio use");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    acc += probs[i] * phi_shifted(dev[i] / mean);
  }
  return std::max(0.0, mean * acc);
}

double entropy(const Density& f, const FiniteSpace& space) {
  if (f.size() != space.size()) {
    throw UsageError("entropy: density has " + std::to_string(f.size()) +
                     " entries, space has " + std::to_string(space.size()));
  }
  const auto& p = space.probabilities();
  const double mean = space.expectation(f.values());
  if (!(mean > 0.0)) {
    throw DomainError("entropy of zero function undefined for ratio use");
  }
  std::vector<double> dev(f.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = f[i] - mean;
  return entropy_from_deviation(mean, dev, p);
}

SpacePtr<double> to_double(const ExactSpace& space) {
  std::vector<double> p(space.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = to_double(space.prob(i));
  // Rounding each entry can move the sum by a few ulps.
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return std::make_shared<const FiniteSpace>(space.labels(), std::move(p));
}

MarkovKernel to_double(const ExactKernel& kernel, SpacePtr<double> space) {
  if (!space || space->size() != kernel.size()) {
    throw UsageError("to_double: space does not match kernel");
  }
  std::vector<std::vector<KernelEntry<double>>> rows(kernel.size());
  for (std::size_t x = 0; x < kernel.size(); ++x) {
    for (const auto& e : kernel.row(x)) {
      rows[x].push_back({e.col, to_double(e.value)});
    }
  }
  return MarkovKernel(std::move(space), std::move(rows));
}

BlockWeights to_double(const ExactBlockWeights& weights) {
  std::vector<double> w(weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = to_double(weights[i]);
  return BlockWeights::normalized(std::move(w));
}

Metric to_double(const ExactMetric& metric) {
  const std::size_t n = metric.size();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = to_double(metric(i, j));
  std::optional<std::vector<Edge>> edges;
  if (metric.has_generators()) edges = metric.generators();
  return Metric::from_matrix(n, std::move(m), std::move(edges));
}

}  // namespace entcert
