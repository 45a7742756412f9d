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

// Langevin diffusion dX = -grad V(X) dt + sqrt(2) dB by Euler-Maruyama:
// synchronous coupling of two copies, decay-rate fits, and a 1-d histogram
// estimate of the relative entropy to exp(-V).

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "entcert/common.hpp"

namespace entcert {

struct Potential {
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn =
      std::function<void(std::span<const double>, std::span<double>)>;

  std::string name;
  std::size_t dim = 1;
  double rho = 0;
  ValueFn value;
  GradientFn gradient;
};

// rho |x|^2 / 2
Potential quadratic_potential(std::size_t dim, double rho);
// rho |x|^2 / 2 + slope log cosh(x_1), slope >= 0
Potential logcosh_potential(std::size_t dim, double rho, double slope);

struct PotentialCheck {
  double min_monotonicity_gap = 0;  // min <gV(x)-gV(y), x-y> - rho |x-y|^2
  double max_gradient_error = 0;    // relative, against central differences
  std::size_t probes = 0;
  bool ok = false;
};

PotentialCheck check_potential(const Potential& v, std::size_t probes,
                               std::uint64_t seed, double scale = 2.0);

struct CoupledPaths {
  std::vector<double> times;
  std::vector<std::vector<double>> x, y;
  std::vector<double> distance;
  double max_step_increase = 0;
};

CoupledPaths coupled_paths(const Potential& v, std::vector<double> x0,
                           std::vector<double> y0, double dt, double t_end,
                           std::uint64_t seed);

// Least-squares slope of -log distance against time. Points from the first
// non-positive distance on are dropped.
double decay_rate_fit(std::span<const double> times,
                      std::span<const double> distance);

// Initial law for the entropy estimate.
using Sampler = std::function<double(std::mt19937_64&)>;

Sampler gaussian_sampler(double mean, double sd);

// Normalised exp(-V) on a grid wide enough that the tails below are
// negligible; 1-d potentials only.
class StationaryDensity {
 public:
  explicit StationaryDensity(const Potential& v, std::size_t grid = 40001);

  double cdf(double x) const;
  double quantile(double u) const;
  Sampler sampler() const;
  double lower() const { return xs_.front(); }
  double upper() const { return xs_.back(); }

 private:
  std::vector<double> xs_;
  std::vector<double> cdf_;
};

struct EntropyCurve {
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<double> envelope;  // exp(-2 rho t) * entropy[0]
  std::size_t bins = 0;
  std::size_t particles = 0;
  double bias = 0;  // (bins - 1) / (2 particles), plug-in KL bias scale
  std::string warning;
};

inline constexpr std::size_t kMinParticles = 100000;
inline constexpr std::size_t kMinPerBin = 50;

EntropyCurve entropy_decay_estimate(const Potential& v, const Sampler& f0,
                                    std::vector<double> t_grid,
                                    std::size_t particles, std::size_t bins,
                                    std::uint64_t seed, double dt = 1e-3);

void write_distance_csv(std::ostream& out, const CoupledPaths& paths);
void write_entropy_csv(std::ostream& out, const EntropyCurve& curve);

}  // namespace entcert
