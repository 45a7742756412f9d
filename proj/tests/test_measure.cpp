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
#include "entcert/measure.hpp"
#include "helpers.hpp"

using namespace entcert;
using namespace entcert::testing;

TEST_CASE("space rejects bad probability vectors") {
  CHECK_THROWS_AS(FiniteSpace({"a", "b"}, {0.5, 0.4}), ContractViolation);
  CHECK_THROWS_AS(FiniteSpace({"a", "b"}, {1.0, 0.0}), ContractViolation);
  CHECK_THROWS_AS(FiniteSpace({"a", "a"}, {0.5, 0.5}), ContractViolation);
  CHECK_THROWS_AS(FiniteSpace({"a"}, {0.5, 0.5}), UsageError);
  CHECK_NOTHROW(FiniteSpace({"a", "b"}, {0.25, 0.75}));
}

TEST_CASE("exact spaces are capped at one hundred states") {
  CHECK_NOTHROW(ExactSpace::uniform(numbered_labels(100)));
  CHECK_THROWS_AS(ExactSpace::uniform(numbered_labels(101)), UsageError);
}

TEST_CASE("entropy of simple densities") {
  auto two = uniform_space(2);
  CHECK(entropy(Density({3.7, 3.7}), *two) == doctest::Approx(0.0));
  CHECK(entropy(Density({2.0, 0.0}), *two) == doctest::Approx(std::log(2.0)));
  for (std::size_t m : {3u, 5u, 17u}) {
    auto space = uniform_space(m);
    std::vector<double> f(m, 0.0);
    f[1] = static_cast<double>(m);
    CHECK(entropy(Density(f), *space) ==
          doctest::Approx(std::log(static_cast<double>(m))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(entropy(Density({0.0, 0.0}), *two), DomainError);
  CHECK_THROWS_AS(Density({-1.0, 2.0}), UsageError);
}

TEST_CASE("entropy matches the textbook formula away from constants") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    auto space = random_space(7, rng);
    auto f = random_density(7, rng);
    double mean = 0.0, flogf = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      mean += space->prob(i) * f[i];
      if (f[i] > 0) flogf += space->prob(i) * f[i] * std::log(f[i]);
    }
    CHECK(entropy(f, *space) ==
          doctest::Approx(flogf - mean * std::log(mean)).epsilon(1e-10));
  }
}

TEST_CASE("entropy of a small perturbation is half the variance") {
  auto space = uniform_space(4);
  const double eps = 1e-6;
  std::vector<double> v{1.0, -1.0, 0.5, -0.5};
  std::vector<double> f(4);
  for (int i = 0; i < 4; ++i) f[i] = 1.0 + eps * v[i];
  double var = 0.0;
  for (double x : v) var += 0.25 * x * x;
  CHECK(entropy(Density(f), *space) / (eps * eps) ==
        doctest::Approx(var / 2).epsilon(1e-5));
}

TEST_CASE("apply with identity and one-step mixing kernels") {
  std::mt19937_64 rng(3);
  auto space = random_space(5, rng);
  auto f = random_density(5, rng);
  auto id = MarkovKernel::identity(space);
  auto same = apply(id, f);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same[i] == f[i]);
  auto mix = MarkovKernel::one_step_mixing(space);
  auto flat = apply(mix, f);
  double mean = space->expectation(f.values());
  for (std::size_t i = 0; i < 5; ++i) CHECK(flat[i] == doctest::Approx(mean));
  CHECK_THROWS_AS(apply(mix, Density({1.0, 2.0})), UsageError);
}

TEST_CASE("stationary kernels preserve the mean") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto space = random_space(6, rng);
    auto k = compose(metropolis_kernel(space, rng), metropolis_kernel(space, rng));
    REQUIRE(k.stationary());
    auto f = random_density(6, rng);
    auto tf = apply(k, f);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t x = 0; x < 6; ++x) {
      double row = 0.0;
      for (std::size_t y = 0; y < 6; ++y) row += k.at(x, y) * f[y];
      CHECK(tf[x] == doctest::Approx(row).epsilon(1e-14));
      lhs += space->prob(x) * tf[x];
      rhs += space->prob(x) * f[x];
    }
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("kernel validation") {
  auto space = uniform_space(2);
  CHECK_THROWS_AS(MarkovKernel::from_dense(space, {0.5, 0.4, 0.5, 0.5}),
                  ContractViolation);
  CHECK_THROWS_AS(MarkovKernel::from_dense(space, {1.5, -0.5, 0.5, 0.5}),
                  ContractViolation);
  auto skew = std::make_shared<const FiniteSpace>(
      std::vector<std::string>{"a", "b"}, std::vector<double>{0.5, 0.5});
  auto k = MarkovKernel::from_dense(skew, {0.0, 1.0, 0.0, 1.0});
  CHECK_FALSE(k.stationary());
  CHECK_THROWS_AS(adjoint(k), ContractViolation);
}

TEST_CASE("adjoint of symmetric and identity kernels") {
  auto space = uniform_space(3);
  auto sym = MarkovKernel::from_dense(
      space, {0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5});
  auto a = adjoint(sym);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      CHECK(a.at(x, y) == doctest::Approx(sym.at(x, y)));
  auto id = adjoint(MarkovKernel::identity(space));
  for (std::size_t x = 0; x < 3; ++x) CHECK(id.at(x, x) == 1.0);
}

TEST_CASE("adjoint satisfies the inner product identity") {
  std::mt19937_64 rng(7);
  auto space = std::make_shared<const FiniteSpace>(
      std::vector<std::string>{"a", "b"}, std::vector<double>{1.0 / 3, 2.0 / 3});
  auto t = metropolis_kernel(space, rng);
  auto ts = adjoint(t);
  CHECK(ts.stationary());
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_vector(2, rng), g = random_vector(2, rng);
    auto tsf = apply<double, double>(ts, f);
    auto tg = apply<double, double>(t, g);
    CHECK(std::abs(inner(*space, tsf, g) - inner(*space, f, tg)) <= 1e-10);
  }
  auto bigger = random_space(8, rng);
  auto k = compose(metropolis_kernel(bigger, rng), metropolis_kernel(bigger, rng));
  auto ks = adjoint(k);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_vector(8, rng), g = random_vector(8, rng);
    CHECK(std::abs(inner(*bigger, apply<double, double>(ks, f), g) -
                   inner(*bigger, f, apply<double, double>(k, g))) <= 1e-10);
  }
  auto back = adjoint(ks);
  for (std::size_t x = 0; x < 8; ++x)
    for (std::size_t y = 0; y < 8; ++y)
      CHECK(std::abs(back.at(x, y) - k.at(x, y)) <= 1e-12);
}

TEST_CASE("mixture combines rows entrywise") {
  std::mt19937_64 rng(9);
  auto space = random_space(4, rng);
  auto t = metropolis_kernel(space, rng);
  std::vector<MarkovKernel> one{t};
  auto m1 = mixture<double>(one, BlockWeights({1.0}));
  std::vector<MarkovKernel> two{t, t};
  auto m2 = mixture<double>(two, BlockWeights({0.5, 0.5}));
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y) {
      CHECK(m1.at(x, y) == doctest::Approx(t.at(x, y)));
      CHECK(m2.at(x, y) == doctest::Approx(t.at(x, y)));
    }
  std::vector<MarkovKernel> pair{MarkovKernel::identity(space),
                                 MarkovKernel::one_step_mixing(space)};
  auto m3 = mixture<double>(pair, BlockWeights({0.5, 0.5}));
  CHECK(m3.stationary());
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y) {
      double expected = 0.5 * (x == y ? 1.0 : 0.0) + 0.5 * space->prob(y);
      CHECK(m3.at(x, y) == doctest::Approx(expected).epsilon(1e-15));
    }
  CHECK_THROWS_AS(mixture<double>(pair, BlockWeights({1.0})), UsageError);
}

TEST_CASE("block weights must be a probability vector") {
  CHECK_THROWS_AS(BlockWeights({0.5, 0.6}), ContractViolation);
  CHECK_THROWS_AS(BlockWeights({1.5, -0.5}), ContractViolation);
  auto w = BlockWeights::normalized({1.0, 2.0, 1.0});
  CHECK(w[1] == doctest::Approx(0.5));
  auto exact = ExactBlockWeights::uniform(3);
  CHECK(exact[0] == Rational(1, 3));
}

TEST_CASE("conditional kernels of trivial partitions") {
  std::mt19937_64 rng(13);
  auto space = random_space(5, rng);
  std::vector<std::vector<std::size_t>> singletons{{0}, {1}, {2}, {3}, {4}};
  auto id = conditional_kernel(space, singletons);
  for (std::size_t x = 0; x < 5; ++x) CHECK(id.at(x, x) == 1.0);
  std::vector<std::vector<std::size_t>> whole{{0, 1, 2, 3, 4}};
  auto mix = conditional_kernel(space, whole);
  for (std::size_t x = 0; x < 5; ++x)
    for (std::size_t y = 0; y < 5; ++y)
      CHECK(mix.at(x, y) == doctest::Approx(space->prob(y)));
  std::vector<std::vector<std::size_t>> missing{{0, 1}, {2, 3}};
  CHECK_THROWS_AS(conditional_kernel(space, missing), UsageError);
  std::vector<std::optional<std::size_t>> partial{0, 0, 1, std::nullopt, 1};
  CHECK_THROWS_AS(conditional_kernel(space, partial), UsageError);
}

TEST_CASE("conditional kernel on the 2x2 product by first coordinate") {
  auto space = std::make_shared<const FiniteSpace>(
      FiniteSpace::uniform({"00", "01", "10", "11"}));
  std::vector<std::optional<std::size_t>> first{0, 0, 1, 1};
  auto t = conditional_kernel(space, first);
  auto d = t.dense();
  std::vector<double> expected{0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0,
                               0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5};
  for (std::size_t i = 0; i < 16; ++i) CHECK(d[i] == expected[i]);
  auto tt = compose(t, t);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y)
      CHECK(std::abs(tt.at(x, y) - t.at(x, y)) <= 1e-12);
}

TEST_CASE("conditional kernels are self-adjoint projections with the chain rule") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 9;
    auto space = random_space(n, rng);
    std::uniform_int_distribution<std::size_t> cell(0, 2);
    std::vector<std::optional<std::size_t>> assign(n);
    for (auto& a : assign) a = cell(rng);
    auto t = conditional_kernel(space, assign);
    auto ts = adjoint(t);
    auto tt = compose(t, t);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        CHECK(std::abs(ts.at(x, y) - t.at(x, y)) <= 1e-12);
        CHECK(std::abs(tt.at(x, y) - t.at(x, y)) <= 1e-12);
      }
    auto f = random_density(n, rng);
    // Cellwise entropies weighted by cell mass.
    double within = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      double mass = 0.0, mean = 0.0, flogf = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        if (*assign[x] != c) continue;
        mass += space->prob(x);
        mean += space->prob(x) * f[x];
        flogf += space->prob(x) * f[x] * std::log(f[x]);
      }
      if (mass == 0.0) continue;
      mean /= mass;
      within += flogf - mass * mean * std::log(mean);
    }
    CHECK(std::abs(entropy(f, *space) - (within + entropy(apply(t, f), *space))) <=
          1e-10);
  }
}

TEST_CASE("adjoints never increase entropy") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 7;
    auto space = random_space(n, rng);
    auto t = compose(metropolis_kernel(space, rng), metropolis_kernel(space, rng));
    auto f = random_density(n, rng);
    CHECK(entropy(apply(adjoint(t), f), *space) <= entropy(f, *space) + 1e-14);
  }
}

TEST_CASE("metric validation") {
  CHECK_NOTHROW(Metric::from_matrix(3, {0, 1, 2, 1, 0, 1, 2, 1, 0}));
  CHECK_THROWS_AS(Metric::from_matrix(3, {0, 1, 3, 1, 0, 1, 3, 1, 0}),
                  ContractViolation);
  CHECK_THROWS_AS(Metric::from_matrix(2, {0, 1, 2, 0}), ContractViolation);
  CHECK_THROWS_AS(Metric::from_matrix(2, {0, 0, 0, 0}), ContractViolation);
  // Declared generators must reproduce the distances.
  CHECK_NOTHROW(Metric::from_matrix(3, {0, 1, 2, 1, 0, 1, 2, 1, 0},
                                    std::vector<Edge>{{0, 1}, {1, 2}}));
  CHECK_THROWS_AS(Metric::from_matrix(3, {0, 1, 2, 1, 0, 1, 2, 1, 0},
                                      std::vector<Edge>{{0, 1}}),
                  ContractViolation);
  auto path = Metric::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(path(0, 3) == 3.0);
  CHECK(path.generators().size() == 3);
}

TEST_CASE("exact kernels and spaces") {
  auto space = std::make_shared<const ExactSpace>(
      std::vector<std::string>{"a", "b"},
      std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
  auto k = ExactKernel::from_dense(
      space, {Rational(1, 2), Rational(1, 2), Rational(1, 4), Rational(3, 4)});
  CHECK(k.stationary());
  auto a = adjoint(k);
  CHECK(a.at(0, 1) == Rational(1, 2));
  CHECK_THROWS_AS(ExactKernel::from_dense(space, {Rational(1, 2), Rational(1, 2),
                                                  Rational(1, 3), Rational(3, 4)}),
                  ContractViolation);
}

TEST_CASE("parse_rational") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("-1/3") == Rational(-1, 3));
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("x"), ParseError);
}
