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

#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "entcert/sphere.hpp"
#include "entcert/transport.hpp"

using namespace entcert;

namespace {

SpherePoint basis(std::size_t n, std::size_t i, double p, double sign = 1) {
  std::vector<double> c(n, 0.0);
  c[i] = sign;
  return make_sphere_point(c, p);
}

}  // namespace

TEST_CASE("Cone samples lie on the sphere") {
  for (double p : {0.5, 1.0, 2.0, 4.0, 7.5}) {
    for (const auto& x : cone_sample(5, p, 200, 3)) {
      double total = 0;
      for (double v : x.coords) total += std::pow(std::abs(v), p);
      CHECK(std::abs(total - 1) <= 1e-10);
      CHECK_NOTHROW(make_sphere_point(x.coords, p));
    }
  }
  CHECK_THROWS_AS(cone_sample(1, 2, 1, 0), UsageError);
  CHECK_THROWS_AS(cone_sample(3, 0, 1, 0), UsageError);
  CHECK_THROWS_AS(make_sphere_point({0.5, 0.5}, 2), ContractViolation);
}

TEST_CASE("Cone sample moments on the round sphere") {
  const std::size_t count = 100000;
  auto xs = cone_sample(3, 2.0, count, 42);
  double m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  for (const auto& x : xs) {
    double a = x.coords[0];
    m1 += a;
    s1 += a * a;
    m2 += a * a;
    s2 += a * a * a * a;
  }
  m1 /= count;
  m2 /= count;
  double se1 = std::sqrt((s1 / count - m1 * m1) / count);
  double se2 = std::sqrt((s2 / count - m2 * m2) / count);
  CHECK(std::abs(m1) <= 3 * se1);
  CHECK(std::abs(m2 - 1.0 / 3) <= 3 * se2);
}

TEST_CASE("Cone samples are reproducible") {
  auto a = cone_sample(4, 1.5, 50, 9);
  auto b = cone_sample(4, 1.5, 50, 9);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].coords == b[k].coords);
}

TEST_CASE("Sphere distance") {
  auto x = cone_sample(4, 3.0, 1, 1)[0];
  CHECK(sphere_dist(x, x) == 0);
  CHECK(sphere_dist(basis(4, 0, 3), basis(4, 2, 3)) == doctest::Approx(2));
  CHECK(sphere_dist(basis(4, 0, 3), basis(4, 0, 3, -1)) == doctest::Approx(1));
  // A zero coordinate never costs a flip.
  auto y = basis(2, 0, 1);
  auto z = make_sphere_point({-0.5, 0.5}, 1);
  CHECK(sphere_dist(y, z) == doctest::Approx(0.5 + 0.5 + 1));
  auto xs = cone_sample(5, 1.5, 40, 2);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    CHECK(sphere_dist(xs[k], xs[k + 1]) == sphere_dist(xs[k + 1], xs[k]));
  }
  CHECK_THROWS_AS(sphere_dist(basis(3, 0, 2), basis(4, 0, 2)), UsageError);
}

TEST_CASE("Closed-form block distance") {
  auto x = cone_sample(4, 2, 1, 5)[0];
  CHECK(closed_form_W(x, x, 0b0011) == 0);
  auto ei = basis(4, 1, 2), ej = basis(4, 3, 2);
  CHECK(closed_form_W(ei, ej, 0b1010) == 0);
  CHECK(closed_form_W(ei, ej, 0b1111) == 0);
  CHECK(closed_form_W(ei, ej, 0b0010) == doctest::Approx(2));
  CHECK(closed_form_W(ei, ej, 0b0010) == doctest::Approx(sphere_dist(ei, ej)));
  CHECK_THROWS_AS(closed_form_W(ei, ej, 0), UsageError);
  CHECK_THROWS_AS(closed_form_W(ei, ej, 0b10000), UsageError);

  std::mt19937_64 rng(3);
  for (double p : {0.7, 1.0, 2.0, 4.0}) {
    auto xs = cone_sample(5, p, 200, 11);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      Mask a = std::uniform_int_distribution<Mask>(1, 31)(rng);
      double w = closed_form_W(xs[k], xs[k + 1], a);
      CHECK(w <= sphere_dist(xs[k], xs[k + 1]) + 1e-12);
      CHECK(w == doctest::Approx(closed_form_W(xs[k + 1], xs[k], a)));
    }
  }
}

TEST_CASE("Closed form agrees with transport on discretised fibres") {
  // Resampling coordinates {0,1} of a point on the sphere in R^3 moves it
  // along a circle of fixed l^p radius; m shared directions discretise both
  // conditional laws.
  const double p = 1.5;
  const std::size_t m = 6;
  auto dirs = cone_sample(2, p, m, 77);
  auto pts = cone_sample(3, p, 8, 78);
  for (std::size_t t = 0; t + 1 < pts.size(); t += 2) {
    const auto& x = pts[t];
    const auto& y = pts[t + 1];
    auto fibre = [&](const SpherePoint& base) {
      double r = std::pow(std::pow(std::abs(base.coords[0]), p) +
                              std::pow(std::abs(base.coords[1]), p),
                          1 / p);
      std::vector<SpherePoint> out;
      for (const auto& u : dirs) {
        out.push_back(SpherePoint{{r * u.coords[0], r * u.coords[1], base.coords[2]}, p});
      }
      return out;
    };
    auto fx = fibre(x), fy = fibre(y);
    std::vector<SpherePoint> all(fx);
    all.insert(all.end(), fy.begin(), fy.end());
    auto metric = Metric::from_function(
        all.size(), [&](std::size_t i, std::size_t j) { return sphere_dist(all[i], all[j]); });
    std::vector<double> mu(2 * m, 0.0), nu(2 * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      mu[k] = 1.0 / m;
      nu[m + k] = 1.0 / m;
    }
    double expect = closed_form_W(x, y, 0b011);
    CHECK(w1<double>(mu, nu, metric).value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(winf<double>(mu, nu, metric).value == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("Coupling ratio sweep") {
  SUBCASE("full block") {
    auto fam = pattern_family<double>(4, "full");
    auto r = contraction_check(fam, 2, 4, 500, 1);
    CHECK(r.max_ratio <= 1e-12);
    CHECK(r.theta_star_star == doctest::Approx(1));
    CHECK(r.within_bound);
    CHECK(r.bound_attained);
  }
  SUBCASE("pairs on four coordinates") {
    auto fam = pattern_family<double>(4, "pairs");
    auto r = contraction_check(fam, 2, 4, 2000, 2);
    CHECK(r.theta_star_star == doctest::Approx(1.0 / 6));
    CHECK(r.max_ratio == doctest::Approx(5.0 / 6).epsilon(1e-12));
    CHECK(r.basis_max == doctest::Approx(5.0 / 6).epsilon(1e-12));
    CHECK(r.within_bound);
    CHECK(r.bound_attained);
  }
  SUBCASE("random families") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 18; ++t) {
      std::size_t n = 2 + t % 5;
      double p = std::array<double, 3>{1, 2, 4}[t % 3];
      auto fam = random_family<double>(n, rng);
      auto r = contraction_check(fam, p, n, 500, t);
      CHECK(r.max_ratio <= r.bound + 1e-9);
      CHECK(r.within_bound);
      CHECK(r.bound_attained);
      CHECK(r.theta_star_star <= r.theta_star + 1e-15);
    }
  }
  SUBCASE("sign flips cost 1 - theta_A mass") {
    auto fam = pattern_family<double>(3, "singletons");
    auto x = cone_sample(3, 2, 1, 4)[0];
    auto y = x;
    y.coords[1] = -y.coords[1];
    CHECK(coupling_ratio(fam, x, y) == doctest::Approx(2.0 / 3));
  }
  CHECK_THROWS_AS(contraction_check(pattern_family<double>(3, "pairs"), 2, 4, 1, 1),
                  UsageError);
}

TEST_CASE("Sweep is deterministic") {
  auto fam = pattern_family<double>(5, "size-2");
  auto a = contraction_check(fam, 1.5, 5, 300, 8);
  auto b = contraction_check(fam, 1.5, 5, 300, 8);
  CHECK(a.max_ratio == b.max_ratio);
  CHECK(a.worst_x.coords == b.worst_x.coords);
}
