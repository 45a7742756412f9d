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

// Exact W1 and W-infinity distances between finitely supported
// distributions on a metric space.
//
// w1 runs successive shortest augmenting paths with node potentials on the
// bipartite transportation graph. winf binary-searches the sorted distinct
// support distances and decides each threshold by a max-flow.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entcert/measure.hpp"

namespace entcert {

template <class S>
struct PlanEntry {
  std::size_t from;
  std::size_t to;
  S mass;
};

// Sparse coupling between two distributions on the same state space.
template <class S>
struct BasicTransportPlan {
  std::vector<PlanEntry<S>> entries;
  S cost{0};

  std::vector<S> row_marginal(std::size_t n) const;
  std::vector<S> column_marginal(std::size_t n) const;
  std::vector<std::vector<double>> dense(std::size_t n) const;
};

template <class S>
struct TransportResult {
  S value{0};
  BasicTransportPlan<S> plan;
};

// Sparse distribution: entries sorted by column, positive mass.
template <class S>
using SparseMeasure = std::span<const KernelEntry<S>>;

// Validated entry points on dense probability vectors.
template <class S>
TransportResult<S> w1(std::span<const S> mu, std::span<const S> nu,
                      const BasicMetric<S>& metric);
template <class S>
TransportResult<S> winf(std::span<const S> mu, std::span<const S> nu,
                        const BasicMetric<S>& metric);

// Unvalidated sparse entry points for kernel rows. The plan is filled only
// when want_plan is set.
template <class S>
TransportResult<S> w1_sparse(SparseMeasure<S> mu, SparseMeasure<S> nu,
                             const BasicMetric<S>& metric,
                             bool want_plan = false);
template <class S>
TransportResult<S> winf_sparse(SparseMeasure<S> mu, SparseMeasure<S> nu,
                               const BasicMetric<S>& metric,
                               bool want_plan = false);

template <class S>
std::vector<KernelEntry<S>> to_sparse(std::span<const S> dense);

using TransportPlan = BasicTransportPlan<double>;

}  // namespace entcert
