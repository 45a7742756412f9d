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

#include "entcert/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "entcert/parallel.hpp"

namespace entcert {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + i + 0x2545f4914f6cdd1dull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double norm(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void require_potential(const Potential& v) {
  if (v.dim == 0 || !v.value || !v.gradient) {
    throw UsageError("potential '" + v.name + "' is incomplete");
  }
  if (!(v.rho >= 0)) throw UsageError("potential: rho must be >= 0");
}

}  // namespace

Potential quadratic_potential(std::size_t dim, double rho) {
  if (dim == 0) throw UsageError("quadratic: dimension must be positive");
  if (!(rho > 0)) throw UsageError("quadratic: rho must be positive");
  Potential v;
  v.name = "quadratic";
  v.dim = dim;
  v.rho = rho;
  v.value = [rho](std::span<const double> x) {
    double s = 0;
    for (double c : x) s += c * c;
    return 0.5 * rho * s;
  };
  v.gradient = [rho](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = rho * x[i];
  };
  return v;
}

Potential logcosh_potential(std::size_t dim, double rho, double slope) {
  if (!(slope >= 0)) throw UsageError("logcosh: slope must be >= 0");
  Potential v = quadratic_potential(dim, rho);
  v.name = "quadratic-plus-logcosh";
  auto base_value = v.value;
  auto base_grad = v.gradient;
  v.value = [=](std::span<const double> x) {
    double a = std::abs(x[0]);
    // log cosh a = a + log1p(exp(-2a)) - log 2
    return base_value(x) + slope * (a + std::log1p(std::exp(-2 * a)) - std::log(2.0));
  };
  v.gradient = [=](std::span<const double> x, std::span<double> g) {
    base_grad(x, g);
    g[0] += slope * std::tanh(x[0]);
  };
  return v;
}

PotentialCheck check_potential(const Potential& v, std::size_t probes,
                               std::uint64_t seed, double scale) {
  require_potential(v);
  const std::size_t n = v.dim;
  struct Slot {
    double gap, err;
  };
  std::vector<Slot> slots(probes);
  parallel_for(probes, [&](std::size_t k) {
    std::mt19937_64 rng(mix(seed, k));
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> x(n), y(n), gx(n), gy(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = normal(rng);
    }
    v.gradient(x, gx);
    v.gradient(y, gy);
    double inner = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      inner += (gx[i] - gy[i]) * (x[i] - y[i]);
      sq += (x[i] - y[i]) * (x[i] - y[i]);
    }
    slots[k].gap = inner - v.rho * sq;
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      z = x;
      z[i] = x[i] + h;
      double up = v.value(z);
      z[i] = x[i] - h;
      double down = v.value(z);
      double fd = (up - down) / (2 * h);
      err = std::max(err, std::abs(fd - gx[i]) / std::max(1.0, std::abs(gx[i])));
    }
    slots[k].err = err;
  });
  PotentialCheck out;
  out.probes = probes;
  out.min_monotonicity_gap = std::numeric_limits<double>::infinity();
  for (const auto& s : slots) {
    out.min_monotonicity_gap = std::min(out.min_monotonicity_gap, s.gap);
    out.max_gradient_error = std::max(out.max_gradient_error, s.err);
  }
  out.ok = out.min_monotonicity_gap >= -1e-8 && out.max_gradient_error <= 1e-5;
  return out;
}

CoupledPaths coupled_paths(const Potential& v, std::vector<double> x0,
                           std::vector<double> y0, double dt, double t_end,
                           std::uint64_t seed) {
  require_potential(v);
  const std::size_t n = v.dim;
  if (x0.size() != n || y0.size() != n) {
    throw UsageError("coupled_paths: starting points must have dimension " +
                     std::to_string(n));
  }
  if (!(dt > 0) || dt > 1e-2 || v.rho * dt > 0.1) {
    throw UsageError("coupled_paths: need 0 < dt <= 1e-2 and rho dt <= 0.1");
  }
  if (!(t_end > 0) || !std::isfinite(t_end)) {
    throw UsageError("coupled_paths: t_end must be positive");
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  CoupledPaths out;
  out.times.reserve(steps + 1);
  out.x.reserve(steps + 1);
  out.y.reserve(steps + 1);
  out.distance.reserve(steps + 1);
  std::vector<double> x = std::move(x0), y = std::move(y0), gx(n), gy(n);
  out.times.push_back(0);
  out.x.push_back(x);
  out.y.push_back(y);
  out.distance.push_back(norm(x, y));

  std::mt19937_64 rng(mix(seed, 0));
  std::normal_distribution<double> normal;
  const double noise = std::sqrt(2 * dt);
  for (std::size_t k = 1; k <= steps; ++k) {
    v.gradient(x, gx);
    v.gradient(y, gy);
    for (std::size_t i = 0; i < n; ++i) {
      double xi = noise * normal(rng);
      x[i] += -gx[i] * dt + xi;
      y[i] += -gy[i] * dt + xi;
    }
    double d = norm(x, y);
    if (!(d <= 1e6)) {
      throw NumericalError("coupled_paths: diverged at step " + std::to_string(k));
    }
    out.max_step_increase = std::max(out.max_step_increase, d - out.distance.back());
    out.times.push_back(static_cast<double>(k) * dt);
    out.x.push_back(x);
    out.y.push_back(y);
    out.distance.push_back(d);
  }
  return out;
}

double decay_rate_fit(std::span<const double> times,
                      std::span<const double> distance) {
  if (times.size() != distance.size()) {
    throw UsageError("decay_rate_fit: length mismatch");
  }
  std::size_t m = 0;
  while (m < distance.size() && distance[m] > 0 &&
         std::isfinite(std::log(distance[m]))) {
    ++m;
  }
  if (m < 2) throw DomainError("decay_rate_fit: fewer than two positive distances");
  double st = 0, sl = 0;
  for (std::size_t i = 0; i < m; ++i) {
    st += times[i];
    sl += std::log(distance[i]);
  }
  const double mt = st / m, ml = sl / m;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < m; ++i) {
    num += (times[i] - mt) * (std::log(distance[i]) - ml);
    den += (times[i] - mt) * (times[i] - mt);
  }
  if (!(den > 0)) throw DomainError("decay_rate_fit: times are all equal");
  return -num / den;
}

Sampler gaussian_sampler(double mean, double sd) {
  if (!(sd > 0)) throw UsageError("gaussian sampler: sd must be positive");
  return [mean, sd](std::mt19937_64& rng) {
    return std::normal_distribution<double>(mean, sd)(rng);
  };
}

StationaryDensity::StationaryDensity(const Potential& v, std::size_t grid) {
  require_potential(v);
  if (v.dim != 1) throw UsageError("stationary density: 1-d potentials only");
  if (grid < 3) throw UsageError("stationary density: grid too small");
  auto V = [&](double x) { return v.value(std::span<const double>(&x, 1)); };
  const double v0 = V(0);
  double L = 1;
  while (V(L) - v0 < 60 || V(-L) - v0 < 60) {
    L *= 2;
    if (L > 1e6) throw NumericalError("stationary density: exp(-V) is not integrable");
  }
  xs_.resize(grid);
  std::vector<double> vals(grid);
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid; ++i) {
    xs_[i] = -L + 2 * L * static_cast<double>(i) / static_cast<double>(grid - 1);
    vals[i] = V(xs_[i]);
    vmin = std::min(vmin, vals[i]);
  }
  cdf_.assign(grid, 0.0);
  double prev = std::exp(-(vals[0] - vmin));
  for (std::size_t i = 1; i < grid; ++i) {
    double cur = std::exp(-(vals[i] - vmin));
    cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * (xs_[i] - xs_[i - 1]);
    prev = cur;
  }
  const double total = cdf_.back();
  for (auto& c : cdf_) c /= total;
}

double StationaryDensity::cdf(double x) const {
  if (x <= xs_.front()) return 0;
  if (x >= xs_.back()) return 1;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs_.begin());
  double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
  return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
}

double StationaryDensity::quantile(double u) const {
  if (u <= 0) return xs_.front();
  if (u >= 1) return xs_.back();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  if (i == 0) return xs_.front();
  double span = cdf_[i] - cdf_[i - 1];
  double w = span > 0 ? (u - cdf_[i - 1]) / span : 0;
  return xs_[i - 1] + w * (xs_[i] - xs_[i - 1]);
}

Sampler StationaryDensity::sampler() const {
  auto self = *this;
  return [self](std::mt19937_64& rng) {
    return self.quantile(std::uniform_real_distribution<double>(0, 1)(rng));
  };
}

EntropyCurve entropy_decay_estimate(const Potential& v, const Sampler& f0,
                                    std::vector<double> t_grid,
                                    std::size_t particles, std::size_t bins,
                                    std::uint64_t seed, double dt) {
  require_potential(v);
  if (v.dim != 1) throw UsageError("entropy estimate: 1-d potentials only");
  if (particles < kMinParticles) {
    throw UsageError("entropy estimate: need at least " +
                     std::to_string(kMinParticles) + " particles");
  }
  if (bins < 2) throw UsageError("entropy estimate: need at least 2 bins");
  if (t_grid.empty()) throw UsageError("entropy estimate: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0) || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw UsageError("entropy estimate: times must be sorted and >= 0");
    }
  }
  if (!(dt > 0) || dt > 1e-2 || v.rho * dt > 0.1) {
    throw UsageError("entropy estimate: need 0 < dt <= 1e-2 and rho dt <= 0.1");
  }

  EntropyCurve out;
  out.times = t_grid;
  out.particles = particles;
  if (particles / bins < kMinPerBin) {
    std::size_t wider = std::max<std::size_t>(2, particles / kMinPerBin);
    out.warning = "widened bins: " + std::to_string(bins) + " -> " +
                  std::to_string(wider);
    bins = wider;
  }
  out.bins = bins;
  out.bias = static_cast<double>(bins - 1) / (2.0 * static_cast<double>(particles));

  // positions[k * particles + j]
  const std::size_t nt = t_grid.size();
  std::vector<double> positions(nt * particles);
  std::vector<std::size_t> step_at(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    step_at[k] = static_cast<std::size_t>(std::llround(t_grid[k] / dt));
  }
  const double noise = std::sqrt(2 * dt);
  parallel_for(particles, [&](std::size_t j) {
    std::mt19937_64 rng(mix(seed, j));
    std::normal_distribution<double> normal;
    double x = f0(rng);
    std::size_t step = 0;
    double g = 0;
    for (std::size_t k = 0; k < nt; ++k) {
      for (; step < step_at[k]; ++step) {
        v.gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
        x += -g * dt + noise * normal(rng);
      }
      positions[k * particles + j] = x;
    }
  }, 256);

  StationaryDensity pi(v);
  double lo = pi.quantile(1e-5), hi = pi.quantile(1 - 1e-5);
  for (std::size_t j = 0; j < particles; ++j) {
    lo = std::min(lo, positions[j]);
    hi = std::max(hi, positions[j]);
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  // Edge bins are open-ended.
  std::vector<double> pi_mass(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double left = b == 0 ? 0.0 : pi.cdf(lo + width * static_cast<double>(b));
    double right = b + 1 == bins ? 1.0 : pi.cdf(lo + width * static_cast<double>(b + 1));
    pi_mass[b] = std::max(right - left, 1e-300);
  }
  out.entropy.resize(nt);
  std::vector<std::size_t> counts(bins);
  for (std::size_t k = 0; k < nt; ++k) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t j = 0; j < particles; ++j) {
      double r = (positions[k * particles + j] - lo) / width;
      auto b = r <= 0 ? 0 : std::min<std::size_t>(bins - 1, static_cast<std::size_t>(r));
      ++counts[b];
    }
    double kl = 0;
    for (std::size_t b = 0; b < bins; ++b) {
      if (counts[b] == 0) continue;
      double q = static_cast<double>(counts[b]) / static_cast<double>(particles);
      kl += q * std::log(q / pi_mass[b]);
    }
    out.entropy[k] = std::max(0.0, kl);
  }
  out.envelope.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    out.envelope[k] = std::exp(-2 * v.rho * (t_grid[k] - t_grid[0])) * out.entropy[0];
  }
  return out;
}

void write_distance_csv(std::ostream& out, const CoupledPaths& paths) {
  out << "t,distance\n";
  for (std::size_t i = 0; i < paths.times.size(); ++i) {
    out << paths.times[i] << ',' << paths.distance[i] << '\n';
  }
}

void write_entropy_csv(std::ostream& out, const EntropyCurve& curve) {
  out << "t,entropy,envelope\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << curve.times[i] << ',' << curve.entropy[i] << ',' << curve.envelope[i]
        << '\n';
  }
}

}  // namespace entcert
