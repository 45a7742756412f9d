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
#include <random>

#include "doctest.h"
#include "entcert/transport.hpp"
#include "helpers.hpp"
#include "oracles/transport_instances.hpp"
#include "oracles/transport_oracle.hpp"

using namespace entcert;
using namespace entcert::oracle;

namespace {

template <class S>
void check_plan(const TransportResult<S>& r, std::span<const S> mu,
                std::span<const S> nu, const BasicMetric<S>& metric,
                bool bottleneck) {
  const std::size_t n = metric.size();
  auto rows = r.plan.row_marginal(n);
  auto cols = r.plan.column_marginal(n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(to_double(abs_value(S(rows[i] - mu[i]))) <= 1e-10);
    CHECK(to_double(abs_value(S(cols[i] - nu[i]))) <= 1e-10);
  }
  S cost(0);
  for (const auto& e : r.plan.entries) {
    CHECK(e.mass >= S(0));
    if (bottleneck) {
      if (e.mass > S(0) && metric(e.from, e.to) > cost) cost = metric(e.from, e.to);
    } else {
      cost += e.mass * metric(e.from, e.to);
    }
  }
  CHECK(to_double(abs_value(S(cost - r.value))) <= 1e-10);
}

}  // namespace

TEST_CASE("two-point transport") {
  auto metric = Metric::from_matrix(2, {0, 1, 1, 0});
  std::vector<double> mu{0.7, 0.3}, nu{0.4, 0.6};
  auto a = w1<double>(mu, nu, metric);
  auto b = winf<double>(mu, nu, metric);
  CHECK(a.value == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(b.value == 1.0);
  check_plan<double>(a, mu, nu, metric, false);
  check_plan<double>(b, mu, nu, metric, true);
  // Every coupling of the pair puts mass 0.3 off the diagonal at least.
  double best = 1.0;
  for (int k = 0; k <= 1000; ++k) {
    double stay0 = 0.4 * k / 1000.0;  // mass moved 0 -> 0
    double off = (0.7 - stay0) + (0.3 - std::min(0.3, 0.6 - (0.7 - stay0)));
    if (0.7 - stay0 <= 0.6 + 1e-15) best = std::min(best, off);
  }
  CHECK(a.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("identical and point-mass marginals") {
  std::mt19937_64 rng(21);
  auto metric = random_euclidean_metric(5, rng);
  auto mu = random_measure(5, rng);
  CHECK(w1<double>(mu, mu, metric).value == 0.0);
  CHECK(winf<double>(mu, mu, metric).value == 0.0);
  std::vector<double> dx(5, 0.0), dy(5, 0.0);
  dx[1] = 1.0;
  dy[3] = 1.0;
  CHECK(w1<double>(dx, dy, metric).value == metric(1, 3));
  CHECK(winf<double>(dx, dy, metric).value == metric(1, 3));
}

TEST_CASE("marginals must have unit mass") {
  auto metric = Metric::from_matrix(2, {0, 1, 1, 0});
  std::vector<double> bad{0.7, 0.2}, good{0.5, 0.5};
  CHECK_THROWS_AS(w1<double>(bad, good, metric), UsageError);
  CHECK_THROWS_AS(winf<double>(good, bad, metric), UsageError);
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(w1<double>(wrong, good, metric), UsageError);
}

TEST_CASE("W1 never exceeds W_inf and both are metrics") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + t % 9;
    auto metric = random_euclidean_metric(n, rng);
    auto a = random_measure(n, rng), b = random_measure(n, rng),
         c = random_measure(n, rng);
    double w_ab = w1<double>(a, b, metric).value;
    double i_ab = winf<double>(a, b, metric).value;
    CHECK(w_ab <= i_ab + 1e-12);
    if (t % 5 == 0) {
      CHECK(std::abs(w_ab - w1<double>(b, a, metric).value) <= 1e-9);
      CHECK(std::abs(i_ab - winf<double>(b, a, metric).value) <= 1e-9);
      CHECK(w_ab <= w1<double>(a, c, metric).value + w1<double>(c, b, metric).value + 1e-9);
      CHECK(i_ab <=
            winf<double>(a, c, metric).value + winf<double>(c, b, metric).value + 1e-9);
    }
  }
}

TEST_CASE("exact transport matches the brute-force references") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 5;
    auto metric = random_exact_metric(n, rng);
    auto mu = random_exact_measure(n, rng), nu = random_exact_measure(n, rng);
    auto dist = exact_matrix(metric);
    auto a = w1<Rational>(mu, nu, metric);
    auto b = winf<Rational>(mu, nu, metric);
    CHECK(a.value == oracle::w1(mu, nu, dist));
    CHECK(b.value == oracle::winf(mu, nu, dist));
    check_plan<Rational>(a, mu, nu, metric, false);
    check_plan<Rational>(b, mu, nu, metric, true);
  }
}

TEST_CASE("floating transport matches the brute-force references") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 5;
    auto metric = random_euclidean_metric(n, rng);
    auto mu = random_measure(n, rng), nu = random_measure(n, rng);
    auto dist = exact_matrix(metric);
    auto a = w1<double>(mu, nu, metric);
    auto b = winf<double>(mu, nu, metric);
    double ref_a = static_cast<double>(oracle::w1(exact_vector(mu), exact_vector(nu), dist));
    double ref_b =
        static_cast<double>(oracle::winf(exact_vector(mu), exact_vector(nu), dist));
    CHECK(std::abs(a.value - ref_a) <= 1e-10);
    CHECK(std::abs(b.value - ref_b) <= 1e-10);
  }
}

TEST_CASE("simplex reference solves a textbook LP") {
  // min -x - y  s.t. x + s1 = 2, y + s2 = 3
  std::vector<std::vector<Rational>> a{{1, 0, 1, 0}, {0, 1, 0, 1}};
  CHECK(oracle::simplex_min(a, {2, 3}, {-1, -1, 0, 0}) == Rational(-5));
}
