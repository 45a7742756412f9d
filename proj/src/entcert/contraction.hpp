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

// Upper-bound side of the certificate: the nonlinear operator
//
//   Lambda f = sum_i theta_i T_i log T_i* exp f,
//
// the entropy ratio H(g) = sum_i theta_i Ent(T_i* g) / Ent(g) and its
// ascent, the spectral factor of sum_i theta_i T_i T_i*, and the
// Brascamp-Lieb type product inequality dual to entropy contraction.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "entcert/certifier.hpp"
#include "entcert/measure.hpp"

namespace entcert {

// Kernels, their adjoints and weights.
class KernelFamily {
 public:
  KernelFamily(std::vector<MarkovKernel> kernels, BlockWeights theta);

  std::size_t size() const { return kernels_.size(); }
  std::size_t states() const { return space_->size(); }
  const SpacePtr<double>& space() const { return space_; }
  const std::vector<MarkovKernel>& kernels() const { return kernels_; }
  const std::vector<MarkovKernel>& adjoints() const { return adjoints_; }
  const BlockWeights& theta() const { return theta_; }

 private:
  std::vector<MarkovKernel> kernels_;
  std::vector<MarkovKernel> adjoints_;
  BlockWeights theta_;
  SpacePtr<double> space_;
};

std::vector<double> lambda_op(std::span<const double> f, const KernelFamily& family);

// Ratio for a density g. Throws DomainError for constant g.
double entropy_ratio(const Density& g, const KernelFamily& family);

// Ratio at g = exp(h), optionally with its gradient in h.
double entropy_ratio_log(std::span<const double> h, const KernelFamily& family,
                         std::vector<double>* gradient = nullptr);

struct SpectralResult {
  double factor = 0.0;
  // Eigenvector in function coordinates, P-mean zero, unit P-norm.
  std::vector<double> eigenvector;
  bool dense = true;
};

// Dense symmetric eigendecomposition up to this many states, power
// iteration above.
inline constexpr std::size_t kDenseSpectralLimit = 1000;

SpectralResult variance_contraction_spectral(const KernelFamily& family);

struct EstimateConfig {
  std::size_t restarts = 16;
  std::size_t max_iters = 500;
  double step = 1.0;
  double tol = 1e-10;
  double clamp = 10.0;
  double seed_epsilon = 1e-7;
  std::size_t lambda_iters = 100;
  std::uint64_t seed = 1;
};

struct EstimateReport {
  double rho_est = 0.0;
  std::vector<double> witness;  // density g, mean 1
  double spectral_factor = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t best_restart = 0;
  std::string best_method;
  std::vector<double> restart_values;
  double lambda_iteration_value = 0.0;
};

// `metric` (optional) fixes the seminorm used to rescale the Lambda iterates.
EstimateReport estimate_rho(const KernelFamily& family, const EstimateConfig& config,
                            const Metric* metric = nullptr);

struct DualityReport {
  double max_violation = 0.0;
  std::size_t trials = 0;
  std::vector<double> exponents;  // c_i = theta_i / (1 - kappa)
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
};

DualityReport bl_duality_check(const KernelFamily& family, double kappa,
                               std::size_t trials, std::uint64_t seed,
                               double range = 2.0);

// Both sides for explicit test functions.
std::pair<double, double> bl_sides(const KernelFamily& family, double kappa,
                                   const std::vector<std::vector<double>>& phi);

// max |f(x) - f(y)| / dist(x, y) over the pairs.
double lip_metric(std::span<const double> f, const Metric& metric, const PairSet& pairs);

struct LambdaContractionReport {
  std::size_t samples = 0;
  double max_excess = 0.0;  // max of Lip(Lambda f) - (1 - kappa) Lip(f)
  double worst_ratio = 0.0; // max of Lip(Lambda f) / Lip(f)
};

LambdaContractionReport lambda_contraction_check(const KernelFamily& family,
                                                 const Metric& metric,
                                                 const PairSet& pairs, double kappa,
                                                 std::size_t samples,
                                                 std::uint64_t seed);

}  // namespace entcert
