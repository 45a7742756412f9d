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

// Curvature certificate for a family of Markov kernels.
//
// For each kernel the Lipschitz constant of its adjoint in W-infinity is the
// worst ratio W_inf(T*(x,.), T*(y,.)) / dist(x,y) over the pair set. The
// certified constant is
//
//   kappa = 1 - max_{x,y} sum_i theta_i ell_i W1(T_i(x,.), T_i(y,.)) / dist(x,y)
//
// clipped to [0, 1].

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entcert/measure.hpp"

namespace entcert {

enum class PairMode { kExhaustive, kGeneratorEdges };

const char* pair_mode_name(PairMode mode);
PairMode parse_pair_mode(const std::string& name);

struct PairSet {
  PairMode mode = PairMode::kExhaustive;
  std::vector<Edge> pairs;  // i < j, sorted
};

template <class S>
PairSet pair_set(const BasicFiniteSpace<S>& space, const BasicMetric<S>& metric,
                 PairMode mode);

template <class S>
struct LipschitzResult {
  S ell{0};
  Edge worst_pair{0, 0};
};

// Least ell with W_inf(K(x,.), K(y,.)) <= ell dist(x,y) over the pairs.
// Pass the adjoint to get the sectional-curvature constant.
template <class S>
LipschitzResult<S> lipschitz_constant(const BasicMarkovKernel<S>& kernel,
                                      const BasicMetric<S>& metric,
                                      const PairSet& pairs);

template <class S>
struct CertifyOptions {
  // Verified against the computed constants, then used in place of them.
  std::optional<std::vector<S>> ell_override;
  // Random pairs checked along shortest generator paths in generator mode.
  std::size_t spot_checks = 32;
  std::uint64_t seed = 1;
};

template <class S>
struct BasicCertReport {
  std::vector<S> ell;
  std::vector<Edge> ell_worst_pairs;
  S kappa{0};
  S max_ratio{0};
  Edge worst_pair{0, 0};
  std::vector<std::string> worst_pair_labels;
  PairMode pair_mode = PairMode::kExhaustive;
  std::size_t pair_count = 0;
  std::size_t spot_checks = 0;
  double seconds = 0.0;
};

template <class S>
BasicCertReport<S> certify_kappa(const std::vector<BasicMarkovKernel<S>>& kernels,
                                 const BasicBlockWeights<S>& theta,
                                 const BasicMetric<S>& metric,
                                 const PairSet& pairs,
                                 const CertifyOptions<S>& options = {});

using CertReport = BasicCertReport<double>;
using ExactCertReport = BasicCertReport<Rational>;

}  // namespace entcert
