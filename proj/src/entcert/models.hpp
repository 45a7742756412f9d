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

// Model builders: product spaces with block-resampling kernels, uniform
// n-sets with down-up walks, and permutations with position-block shuffles.
// Each comes with its canonical metric and generator edges.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "entcert/measure.hpp"

namespace entcert {

using Mask = std::uint32_t;
inline constexpr std::size_t kMaxCoordinates = 20;

template <class S>
class BasicBlockFamily {
 public:
  BasicBlockFamily(std::size_t n, std::vector<Mask> blocks,
                   BasicBlockWeights<S> theta);

  std::size_t coordinates() const { return n_; }
  const std::vector<Mask>& blocks() const { return blocks_; }
  const BasicBlockWeights<S>& theta() const { return theta_; }
  std::size_t size() const { return blocks_.size(); }

 private:
  std::size_t n_;
  std::vector<Mask> blocks_;
  BasicBlockWeights<S> theta_;
};

using BlockFamily = BasicBlockFamily<double>;
using ExactBlockFamily = BasicBlockFamily<Rational>;

// min_i sum_{A contains i} theta_A
template <class S>
S theta_star(const BasicBlockFamily<S>& family);
// min_{i<j} sum_{A contains i and j} theta_A
template <class S>
S theta_star_star(const BasicBlockFamily<S>& family);

// Blocks for "singletons", "pairs", "all-but-one", "full" or "size-L".
std::vector<Mask> block_pattern(std::size_t n, const std::string& pattern);

// Uniform weights over the blocks of a pattern.
template <class S>
BasicBlockFamily<S> pattern_family(std::size_t n, const std::string& pattern);

// Random distinct blocks of size >= min_size with random integer weights.
template <class S>
BasicBlockFamily<S> random_family(std::size_t n, std::mt19937_64& rng,
                                  std::size_t min_size = 1,
                                  std::size_t max_blocks = 8);

std::string mask_to_string(Mask m);

template <class S>
struct BasicModel {
  std::string kind;
  SpacePtr<S> space;
  std::vector<BasicMarkovKernel<S>> kernels;
  BasicBlockWeights<S> theta;
  BasicMetric<S> metric;
  std::optional<BasicBlockFamily<S>> family;
  // Reference constants known for the model (theta_star, kappa_theory, ...).
  std::map<std::string, double> theory;
};

using Model = BasicModel<double>;
using ExactModel = BasicModel<Rational>;

inline constexpr std::size_t kMaxProductStates = 100000;

// Product of coordinate spaces of the given sizes; `marginals` defaults to
// uniform. One conditional-expectation kernel per block, Hamming metric.
template <class S>
BasicModel<S> build_product(const std::vector<std::size_t>& sizes,
                            const BasicBlockFamily<S>& family,
                            const std::vector<std::vector<S>>& marginals = {});

inline constexpr std::size_t kMaxNsetStates = 10000;

// (n <-> n-k) down-up walk on uniform n-subsets of [N].
template <class S>
BasicModel<S> build_nsets(std::size_t N, std::size_t n, std::size_t k);

// Kernels T_1..T_n with weights theta[k-1].
template <class S>
BasicModel<S> build_nsets_mixture(std::size_t N, std::size_t n,
                                  const BasicBlockWeights<S>& theta);

// kappa_0 + kappa_1 for weights theta[k-1] on k = 1..n.
template <class S>
S downup_theoretical_kappa(std::size_t N, std::size_t n,
                           const std::vector<S>& theta);

inline constexpr std::size_t kMaxPermutationSize = 7;

// Uniform measure on S_n, position-block shuffles, Cayley metric.
template <class S>
BasicModel<S> build_permutations(std::size_t n,
                                 const BasicBlockFamily<S>& family);

// n minus the number of cycles of a o b^{-1}.
std::size_t cayley_distance(const std::vector<int>& a, const std::vector<int>& b);

std::uint64_t binomial(std::size_t n, std::size_t k);

}  // namespace entcert
