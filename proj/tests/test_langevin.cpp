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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "entcert/langevin.hpp"

using namespace entcert;

TEST_CASE("Built-in potentials pass the probes") {
  for (const auto& v : {quadratic_potential(3, 1.5), logcosh_potential(2, 0.5, 2.0),
                        quadratic_potential(1, 1.0)}) {
    auto r = check_potential(v, 10000, 7);
    CHECK(r.min_monotonicity_gap >= -1e-8);
    CHECK(r.max_gradient_error <= 1e-5);
    CHECK(r.ok);
  }
  auto liar = quadratic_potential(2, 1.0);
  liar.rho = 1.5;
  CHECK_FALSE(check_potential(liar, 1000, 1).ok);
  auto wrong = quadratic_potential(2, 1.0);
  wrong.gradient = [](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 1.1 * x[i];
  };
  CHECK(check_potential(wrong, 1000, 1).max_gradient_error > 1e-3);
  CHECK_THROWS_AS(logcosh_potential(1, 1, -1), UsageError);
}

TEST_CASE("Shared noise keeps equal starts together") {
  auto v = logcosh_potential(2, 1.0, 1.0);
  auto p = coupled_paths(v, {0.3, -1}, {0.3, -1}, 1e-3, 1, 4);
  for (double d : p.distance) CHECK(d == 0);
  CHECK(p.x == p.y);
}

TEST_CASE("Ornstein-Uhlenbeck coupling contracts at the closed-form rate") {
  const double rho = 1, dt = 1e-3, t_end = 5;
  auto v = quadratic_potential(2, rho);
  auto p = coupled_paths(v, {2, 0}, {-1, 1}, dt, t_end, 11);
  const double d0 = std::sqrt(10.0);
  double worst = 0;
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    double exact = std::exp(-rho * p.times[k]) * d0;
    worst = std::max(worst, std::abs(p.distance[k] - exact) / exact);
  }
  CHECK(worst <= 2 * rho * dt * t_end);
  double rate = decay_rate_fit(p.times, p.distance);
  CHECK(rate >= 0.99);
  CHECK(rate <= 1.01);
  CHECK(rate == doctest::Approx(-std::log(1 - dt) / dt).epsilon(1e-9));
  CHECK(p.max_step_increase <= dt * dt * 1e3);
}

TEST_CASE("Convex perturbation contracts at least at rate rho") {
  const double rho = 0.8, dt = 1e-3;
  auto v = logcosh_potential(3, rho, 1.5);
  auto p = coupled_paths(v, {1, 2, -1}, {-2, 0.5, 0}, dt, 4, 13);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    CHECK(p.distance[k] <= std::exp(-rho * p.times[k]) * p.distance[0] * (1 + 1e-9));
  }
  CHECK(decay_rate_fit(p.times, p.distance) >= rho - 0.05);
  CHECK(p.max_step_increase <= dt * dt * 1e3);
}

TEST_CASE("Coupled paths are reproducible and validate input") {
  auto v = logcosh_potential(2, 1.0, 0.5);
  auto a = coupled_paths(v, {1, 1}, {0, 0}, 1e-2, 1, 3);
  auto b = coupled_paths(v, {1, 1}, {0, 0}, 1e-2, 1, 3);
  CHECK(a.x == b.x);
  CHECK(a.distance == b.distance);
  auto c = coupled_paths(v, {1, 1}, {0, 0}, 1e-2, 1, 4);
  CHECK(a.x != c.x);
  CHECK_THROWS_AS(coupled_paths(v, {1, 1}, {0, 0}, 0.1, 1, 3), UsageError);
  CHECK_THROWS_AS(coupled_paths(quadratic_potential(1, 20), {1}, {0}, 1e-2, 1, 3),
                  UsageError);
  CHECK_THROWS_AS(coupled_paths(v, {1}, {0, 0}, 1e-3, 1, 3), UsageError);
  auto blowup = quadratic_potential(1, 1.0);
  blowup.gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = -50 * x[0];
  };
  CHECK_THROWS_AS(coupled_paths(blowup, {1}, {0}, 1e-2, 10, 3), NumericalError);
}

TEST_CASE("Decay rate of a synthetic curve") {
  std::vector<double> t, d;
  for (int k = 0; k <= 3000; ++k) {
    t.push_back(k * 1e-3);
    d.push_back(std::exp(-2 * t.back()));
  }
  CHECK(std::abs(decay_rate_fit(t, d) - 2) <= 1e-6);
  d[2000] = 0;  // window stops at underflow
  CHECK(std::abs(decay_rate_fit(t, d) - 2) <= 1e-6);
  std::vector<double> zeros(5, 0.0), ts{0, 1, 2, 3, 4};
  CHECK_THROWS_AS(decay_rate_fit(ts, zeros), DomainError);
}

TEST_CASE("Stationary density by quadrature") {
  StationaryDensity pi(quadratic_potential(1, 1.0));
  CHECK(pi.cdf(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pi.cdf(1) == doctest::Approx(0.5 * std::erfc(-1 / std::sqrt(2.0))).epsilon(1e-7));
  CHECK(pi.quantile(pi.cdf(0.7)) == doctest::Approx(0.7).epsilon(1e-6));
  CHECK_THROWS_AS(StationaryDensity(quadratic_potential(2, 1.0)), UsageError);
}

TEST_CASE("Entropy decay under Ornstein-Uhlenbeck") {
  auto v = quadratic_potential(1, 1.0);
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(0.25 * k);

  auto curve = entropy_decay_estimate(v, gaussian_sampler(2, 1), grid, 100000, 200, 5);
  CHECK(curve.warning.empty());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double exact = 2 * std::exp(-2 * grid[k]);
    CHECK(std::abs(curve.entropy[k] - exact) <= 0.15 * exact);
    CHECK(curve.entropy[k] <= 1.2 * curve.envelope[k]);
  }

  StationaryDensity pi(v);
  auto flat = entropy_decay_estimate(v, pi.sampler(), {0, 0.5, 1}, 100000, 100, 6);
  for (double e : flat.entropy) CHECK(e <= 3 * flat.bias);
}

TEST_CASE("Entropy estimate widens sparse histograms") {
  auto v = quadratic_potential(1, 1.0);
  auto curve = entropy_decay_estimate(v, gaussian_sampler(0, 1), {0}, 100000, 5000, 1);
  CHECK(curve.bins == 2000);
  CHECK_FALSE(curve.warning.empty());
  CHECK_THROWS_AS(entropy_decay_estimate(v, gaussian_sampler(0, 1), {0}, 1000, 10, 1),
                  UsageError);
  CHECK_THROWS_AS(entropy_decay_estimate(v, gaussian_sampler(0, 1), {1, 0}, 100000, 10, 1),
                  UsageError);
}

TEST_CASE("CSV output") {
  auto p = coupled_paths(quadratic_potential(1, 1), {1}, {0}, 1e-2, 0.02, 1);
  std::ostringstream out;
  write_distance_csv(out, p);
  CHECK(out.str() == "t,distance\n0,1\n0.01,0.99\n0.02,0.9801\n");
}
