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

#include "entcert/sphere.hpp"

#include <cmath>
#include <limits>

#include "entcert/parallel.hpp"

namespace entcert {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + i + 0x632be59bd9b4e019ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

void check_params(std::size_t n, double p) {
  if (!(p > 0) || !std::isfinite(p)) throw UsageError("sphere: p must be positive");
  if (n < 2) throw UsageError("sphere: need n >= 2");
}

void check_pair(const SpherePoint& x, const SpherePoint& y) {
  if (x.size() != y.size() || x.p != y.p) {
    throw UsageError("sphere: points live on different spheres");
  }
}

double power(double v, double p) { return std::pow(std::abs(v), p); }

// Points with |x_i|^p = w_i and the given signs.
SpherePoint from_weights(const std::vector<double>& w,
                         const std::vector<int>& sign, double p) {
  SpherePoint s;
  s.p = p;
  s.coords.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    s.coords[i] = sign[i] * std::pow(w[i], 1 / p);
  }
  return s;
}

std::vector<double> gamma_weights(std::size_t n, double p, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(1 / p, 1.0);
  std::vector<double> w(n);
  for (;;) {
    double total = 0;
    for (auto& v : w) total += v = gamma(rng);
    if (total > 0 && std::isfinite(total)) {
      for (auto& v : w) v /= total;
      return w;
    }
  }
}

}  // namespace

SpherePoint make_sphere_point(std::vector<double> coords, double p) {
  check_params(coords.size(), p);
  double total = 0;
  for (double v : coords) {
    if (!std::isfinite(v)) throw UsageError("sphere: non-finite coordinate");
    total += power(v, p);
  }
  if (std::abs(total - 1) > 1e-10) {
    throw ContractViolation("sphere: point has sum |x_i|^p = " +
                            std::to_string(total));
  }
  return SpherePoint{std::move(coords), p};
}

SpherePoint cone_point(std::size_t n, double p, std::mt19937_64& rng) {
  check_params(n, p);
  auto w = gamma_weights(n, p, rng);
  std::bernoulli_distribution coin;
  std::vector<int> sign(n);
  for (auto& s : sign) s = coin(rng) ? 1 : -1;
  return from_weights(w, sign, p);
}

std::vector<SpherePoint> cone_sample(std::size_t n, double p, std::size_t count,
                                     std::uint64_t seed) {
  check_params(n, p);
  std::vector<SpherePoint> out(count);
  parallel_for(count, [&](std::size_t k) {
    std::mt19937_64 rng(mix(seed, k));
    out[k] = cone_point(n, p, rng);
  });
  return out;
}

double sphere_dist(const SpherePoint& x, const SpherePoint& y) {
  check_pair(x, y);
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d += std::abs(power(x.coords[i], x.p) - power(y.coords[i], y.p));
    if (x.coords[i] * y.coords[i] < 0) d += 1;
  }
  return d;
}

double closed_form_W(const SpherePoint& x, const SpherePoint& y, Mask a) {
  check_pair(x, y);
  const std::size_t n = x.size();
  if (a == 0) throw UsageError("closed_form_W: empty block");
  if (n < 32 && (a >> n) != 0) throw UsageError("closed_form_W: block out of range");
  double outside = 0, inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double diff = power(x.coords[i], x.p) - power(y.coords[i], y.p);
    if (i < 32 && (a >> i & 1u)) {
      inside += diff;
    } else {
      outside += std::abs(diff);
      if (x.coords[i] * y.coords[i] < 0) outside += 1;
    }
  }
  return outside + std::abs(inside);
}

double coupling_ratio(const BlockFamily& family, const SpherePoint& x,
                      const SpherePoint& y) {
  if (family.coordinates() != x.size()) {
    throw UsageError("sphere: family size does not match the points");
  }
  double d = sphere_dist(x, y);
  if (d == 0) return 0;
  double total = 0;
  for (std::size_t b = 0; b < family.size(); ++b) {
    total += family.theta()[b] * closed_form_W(x, y, family.blocks()[b]);
  }
  return total / d;
}

SphereCheckReport contraction_check(const BlockFamily& family, double p,
                                    std::size_t n, std::size_t pairs,
                                    std::uint64_t seed) {
  check_params(n, p);
  if (family.coordinates() != n) {
    throw UsageError("sphere: family has " + std::to_string(family.coordinates()) +
                     " coordinates, expected " + std::to_string(n));
  }

  struct Candidate {
    double ratio = -std::numeric_limits<double>::infinity();
    const char* kind = "";
    SpherePoint x, y;
  };
  auto consider = [&](Candidate& c, const char* kind, SpherePoint x,
                      SpherePoint y) {
    double r = coupling_ratio(family, x, y);
    if (r > c.ratio) c = Candidate{r, kind, std::move(x), std::move(y)};
  };

  // Each random index yields an independent pair, a same-sign pair and a
  // single sign flip.
  struct Slot {
    Candidate best;
    double kind[3] = {0, 0, 0};
  };
  std::vector<Slot> slots(pairs);
  parallel_for(pairs, [&](std::size_t k) {
    std::mt19937_64 rng(mix(seed, k));
    auto x = cone_point(n, p, rng);
    auto y = cone_point(n, p, rng);
    auto& slot = slots[k];
    slot.kind[0] = coupling_ratio(family, x, y);
    consider(slot.best, "random", x, y);
    std::vector<int> sign(n);
    for (std::size_t i = 0; i < n; ++i) sign[i] = x.coords[i] < 0 ? -1 : 1;
    auto same = from_weights(gamma_weights(n, p, rng), sign, p);
    slot.kind[1] = coupling_ratio(family, x, same);
    consider(slot.best, "same-sign", x, same);
    auto flipped = x;
    std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    flipped.coords[i] = -flipped.coords[i];
    slot.kind[2] = coupling_ratio(family, x, flipped);
    consider(slot.best, "sign-flip", x, flipped);
  });

  Candidate best;
  double kind_max[3] = {0, 0, 0};
  for (auto& s : slots) {
    for (int t = 0; t < 3; ++t) kind_max[t] = std::max(kind_max[t], s.kind[t]);
    if (s.best.ratio > best.ratio) best = std::move(s.best);
  }
  // Deterministic sign flips at every coordinate and all basis pairs.
  auto base = cone_sample(n, p, 1, mix(seed, ~0ull))[0];
  for (std::size_t i = 0; i < n; ++i) {
    auto flipped = base;
    flipped.coords[i] = -flipped.coords[i];
    kind_max[2] = std::max(kind_max[2], coupling_ratio(family, base, flipped));
    consider(best, "sign-flip", base, flipped);
  }
  double basis_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> ei(n, 0.0), ej(n, 0.0);
      ei[i] = 1;
      ej[j] = 1;
      SpherePoint x{ei, p}, y{ej, p};
      basis_max = std::max(basis_max, coupling_ratio(family, x, y));
      consider(best, "basis", std::move(x), std::move(y));
    }
  }

  SphereCheckReport r;
  r.max_ratio = best.ratio;
  r.worst_kind = best.kind;
  r.worst_x = std::move(best.x);
  r.worst_y = std::move(best.y);
  r.theta_star = theta_star(family);
  r.theta_star_star = theta_star_star(family);
  r.bound = 1 - r.theta_star_star;
  r.basis_max = basis_max;
  r.within_bound = r.max_ratio <= r.bound + 1e-9;
  r.bound_attained = std::abs(basis_max - r.bound) <= 1e-9;
  r.pairs_checked = 3 * pairs + n + n * (n - 1);
  r.kind_max = {{"random", kind_max[0]},
                {"same-sign", kind_max[1]},
                {"sign-flip", kind_max[2]},
                {"basis", basis_max}};
  return r;
}

}  // namespace entcert
