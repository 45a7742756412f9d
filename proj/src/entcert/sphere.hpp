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

// Cone measure on the l^p sphere, its sign-aware metric, the closed-form
// block-resampling distance and a Monte Carlo sweep of the coupling ratio.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "entcert/models.hpp"

namespace entcert {

struct SpherePoint {
  std::vector<double> coords;
  double p = 2;

  std::size_t size() const { return coords.size(); }
};

// Checks sum |x_i|^p = 1 within 1e-10.
SpherePoint make_sphere_point(std::vector<double> coords, double p);

SpherePoint cone_point(std::size_t n, double p, std::mt19937_64& rng);
std::vector<SpherePoint> cone_sample(std::size_t n, double p, std::size_t count,
                                     std::uint64_t seed);

// sum_i ||x_i|^p - |y_i|^p| + #{i : x_i y_i < 0}
double sphere_dist(const SpherePoint& x, const SpherePoint& y);

double closed_form_W(const SpherePoint& x, const SpherePoint& y, Mask a);

// sum_A theta_A closed_form_W(x, y, A) / dist(x, y); 0 when x = y.
double coupling_ratio(const BlockFamily& family, const SpherePoint& x,
                      const SpherePoint& y);

struct SphereCheckReport {
  double max_ratio = 0;
  std::string worst_kind;  // random, same-sign, sign-flip, basis
  SpherePoint worst_x, worst_y;
  double theta_star = 0;
  double theta_star_star = 0;
  double bound = 0;  // 1 - theta**
  double basis_max = 0;  // best canonical pair
  // Largest ratio per pair kind.
  std::vector<std::pair<std::string, double>> kind_max;
  bool within_bound = false;
  bool bound_attained = false;
  std::size_t pairs_checked = 0;
};

SphereCheckReport contraction_check(const BlockFamily& family, double p,
                                    std::size_t n, std::size_t pairs,
                                    std::uint64_t seed);

}  // namespace entcert
