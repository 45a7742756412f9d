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

#include "entcert/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "entcert/parallel.hpp"

namespace entcert {

KernelFamily::KernelFamily(std::vector<MarkovKernel> kernels, BlockWeights theta)
    : kernels_(std::move(kernels)), theta_(std::move(theta)) {
  if (kernels_.empty()) throw UsageError("kernel family: no kernels");
  if (kernels_.size() != theta_.size()) {
    throw UsageError("kernel family: " + std::to_string(kernels_.size()) +
                     " kernels but " + std::to_string(theta_.size()) + " weights");
  }
  space_ = kernels_.front().space();
  for (const auto& k : kernels_) {
    if (k.space() != space_) throw UsageError("kernel family: kernels on different spaces");
    adjoints_.push_back(adjoint(k));
  }
}

namespace {

double p_mean(std::span<const double> f, const FiniteSpace& space) {
  return space.expectation(f);
}

// (log K exp f)(x) row by row with max subtraction.
std::vector<double> log_apply_exp(const MarkovKernel& k, std::span<const double> f) {
  std::vector<double> out(k.size());
  for (std::size_t x = 0; x < k.size(); ++x) {
    auto row = k.row(x);
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& e : row) top = std::max(top, f[e.col]);
    double acc = 0.0;
    for (const auto& e : row) acc += e.value * std::exp(f[e.col] - top);
    out[x] = top + std::log(acc);
  }
  return out;
}

}  // namespace

std::vector<double> lambda_op(std::span<const double> f, const KernelFamily& family) {
  if (f.size() != family.states()) throw UsageError("lambda_op: dimension mismatch");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double w = family.theta()[i];
    if (w == 0.0) continue;
    auto inner = log_apply_exp(family.adjoints()[i], f);
    auto outer = apply<double, double>(family.kernels()[i], inner);
    for (std::size_t x = 0; x < f.size(); ++x) out[x] += w * outer[x];
  }
  return out;
}

namespace {

// Ratio from the mean and deviation of g; the adjoints preserve the mean,
// so T*g has deviation T*(g - mean).
double ratio_from_deviation(double mean, const std::vector<double>& dev,
                            const KernelFamily& family, double* denominator) {
  const auto& probs = family.space()->probabilities();
  const double den = entropy_from_deviation(mean, dev, probs);
  if (!(den > 0.0)) {
    throw DomainError("entropy ratio undefined for a constant function");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double w = family.theta()[i];
    if (w == 0.0) continue;
    auto tdev = apply<double, double>(family.adjoints()[i], dev);
    num += w * entropy_from_deviation(mean, tdev, probs);
  }
  if (denominator) *denominator = den;
  return num / den;
}

}  // namespace

double entropy_ratio(const Density& g, const KernelFamily& family) {
  if (g.size() != family.states()) throw UsageError("entropy_ratio: dimension mismatch");
  const double mean = family.space()->expectation(g.values());
  if (!(mean > 0.0)) throw DomainError("entropy of zero function undefined for ratio use");
  std::vector<double> dev(g.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = g[i] - mean;
  if (std::all_of(dev.begin(), dev.end(), [](double v) { return v == 0.0; })) {
    throw DomainError("entropy ratio undefined for a constant function");
  }
  return ratio_from_deviation(mean, dev, family, nullptr);
}

double entropy_ratio_log(std::span<const double> h, const KernelFamily& family,
                         std::vector<double>* gradient) {
  const auto& space = *family.space();
  if (h.size() != space.size()) throw UsageError("entropy_ratio: dimension mismatch");
  const double c = p_mean(h, space);
  std::vector<double> hc(h.size()), em1(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    hc[i] = h[i] - c;
    em1[i] = std::expm1(hc[i]);
  }
  // g = exp(hc) = 1 + em1; mean and deviation without cancellation.
  const double shift = space.expectation<double>(em1);
  const double mean = 1.0 + shift;
  std::vector<double> dev(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) dev[i] = em1[i] - shift;
  double den = 0.0;
  const double r = ratio_from_deviation(mean, dev, family, &den);
  if (gradient) {
    auto lam = lambda_op(hc, family);
    const double log_mean = std::log1p(shift);
    gradient->assign(h.size(), 0.0);
    for (std::size_t y = 0; y < h.size(); ++y) {
      const double g = 1.0 + em1[y];
      (*gradient)[y] = space.prob(y) * g *
                       (lam[y] - r * hc[y] + (r - 1.0) * log_mean) / den;
    }
  }
  return r;
}

SpectralResult variance_contraction_spectral(const KernelFamily& family) {
  const auto& space = *family.space();
  const std::size_t n = space.size();
  SpectralResult out;
  if (n == 1) {
    out.eigenvector = {0.0};
    return out;
  }
  std::vector<double> sq(n);
  for (std::size_t x = 0; x < n; ++x) sq[x] = std::sqrt(space.prob(x));

  if (n <= kDenseSpectralLimit) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < family.size(); ++i) {
      const double w = family.theta()[i];
      if (w == 0.0) continue;
      const auto& t = family.kernels()[i];
      const auto& ts = family.adjoints()[i];
      for (std::size_t x = 0; x < n; ++x)
        for (const auto& a : t.row(x))
          for (const auto& b : ts.row(a.col)) k(x, b.col) += w * a.value * b.value;
    }
    // D^{1/2} K D^{-1/2} is symmetric; remove the constant direction.
    Eigen::MatrixXd s(n, n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t z = 0; z < n; ++z) s(x, z) = sq[x] * k(x, z) / sq[z];
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::VectorXd u(n);
    for (std::size_t x = 0; x < n; ++x) u(x) = sq[x];
    s -= u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success) {
      throw NumericalError("spectral factor: eigendecomposition failed");
    }
    const Eigen::Index top = static_cast<Eigen::Index>(n) - 1;
    out.factor = std::clamp(eig.eigenvalues()(top), 0.0, 1.0);
    Eigen::VectorXd v = eig.eigenvectors().col(top);
    v -= u * u.dot(v);
    out.eigenvector.resize(n);
    for (std::size_t x = 0; x < n; ++x) out.eigenvector[x] = v(static_cast<Eigen::Index>(x)) / sq[x];
    out.dense = true;
  } else {
    // Power iteration on mean-zero functions; K is positive semidefinite.
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    std::vector<double> f(n);
    for (auto& v : f) v = gauss(rng);
    auto normalise = [&](std::vector<double>& v) {
      const double m = space.expectation<double>(v);
      for (auto& x : v) x -= m;
      double norm = 0.0;
      for (std::size_t x = 0; x < n; ++x) norm += space.prob(x) * v[x] * v[x];
      norm = std::sqrt(norm);
      if (norm > 0) for (auto& x : v) x /= norm;
      return norm;
    };
    auto apply_k = [&](const std::vector<double>& v) {
      std::vector<double> acc(n, 0.0);
      for (std::size_t i = 0; i < family.size(); ++i) {
        const double w = family.theta()[i];
        if (w == 0.0) continue;
        auto a = apply<double, double>(family.adjoints()[i], v);
        auto b = apply<double, double>(family.kernels()[i], a);
        for (std::size_t x = 0; x < n; ++x) acc[x] += w * b[x];
      }
      return acc;
    };
    normalise(f);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
      auto kf = apply_k(f);
      double next = 0.0;
      for (std::size_t x = 0; x < n; ++x) next += space.prob(x) * f[x] * kf[x];
      f = std::move(kf);
      if (normalise(f) == 0.0) break;
      if (std::abs(next - lambda) <= 1e-13) {
        lambda = next;
        break;
      }
      lambda = next;
    }
    out.factor = std::clamp(lambda, 0.0, 1.0);
    out.eigenvector = std::move(f);
    out.dense = false;
  }
  double norm = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    norm += space.prob(x) * out.eigenvector[x] * out.eigenvector[x];
  }
  norm = std::sqrt(norm);
  if (norm > 0) for (auto& v : out.eigenvector) v /= norm;
  return out;
}

namespace {

struct AscentResult {
  double value = -1.0;
  std::vector<double> h;
  std::size_t iterations = 0;
  bool converged = false;
};

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void project(std::vector<double>& h, const FiniteSpace& space, double clamp) {
  const double c = space.expectation<double>(h);
  for (auto& v : h) v = std::clamp(v - c, -clamp, clamp);
}

double safe_ratio(const std::vector<double>& h, const KernelFamily& family,
                  std::vector<double>* grad) {
  try {
    return entropy_ratio_log(h, family, grad);
  } catch (const DomainError&) {
    return -1.0;
  }
}

AscentResult ascend(std::vector<double> h, const KernelFamily& family,
                    const EstimateConfig& config) {
  const auto& space = *family.space();
  project(h, space, config.clamp);
  AscentResult out;
  std::vector<double> grad;
  double value = safe_ratio(h, family, &grad);
  if (value < 0.0) return out;
  double alpha = config.step * std::max(sup_norm(h), 1e-6);
  std::vector<double> trial(h.size());
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    out.iterations = it + 1;
    const double gnorm = sup_norm(grad);
    if (!(gnorm > 0.0)) {
      out.converged = true;
      break;
    }
    const double floor = 1e-14 * std::max(1.0, sup_norm(h));
    bool moved = false;
    double next = value;
    while (alpha > floor) {
      for (std::size_t x = 0; x < h.size(); ++x) trial[x] = h[x] + alpha * grad[x] / gnorm;
      project(trial, space, config.clamp);
      next = safe_ratio(trial, family, nullptr);
      if (next > value) {
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      out.converged = true;
      break;
    }
    const double gain = next - value;
    h.swap(trial);
    value = safe_ratio(h, family, &grad);
    alpha *= 1.5;
    if (gain <= config.tol) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  out.h = std::move(h);
  return out;
}

// f <- Lambda f, centred and rescaled to a fixed seminorm.
AscentResult lambda_iteration(std::vector<double> f, const KernelFamily& family,
                              const EstimateConfig& config, const Metric* metric,
                              const PairSet* pairs) {
  const auto& space = *family.space();
  auto seminorm = [&](const std::vector<double>& v) {
    if (metric) return lip_metric(v, *metric, *pairs);
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  AscentResult out;
  for (std::size_t it = 0; it < config.lambda_iters; ++it) {
    const double c = space.expectation<double>(f);
    for (auto& v : f) v -= c;
    const double s = seminorm(f);
    if (!(s > 0.0)) break;
    for (auto& v : f) v /= s;
    const double r = safe_ratio(f, family, nullptr);
    out.iterations = it + 1;
    if (r > out.value + config.tol) {
      out.value = r;
      out.h = f;
    } else if (it > 0) {
      out.converged = true;
      if (r <= out.value) break;
    }
    f = lambda_op(f, family);
  }
  return out;
}

}  // namespace

EstimateReport estimate_rho(const KernelFamily& family, const EstimateConfig& config,
                            const Metric* metric) {
  const auto& space = *family.space();
  const std::size_t n = space.size();
  EstimateReport report;
  auto spectral = variance_contraction_spectral(family);
  report.spectral_factor = spectral.factor;
  if (n < 2) {
    report.witness.assign(n, 1.0);
    report.converged = true;
    return report;
  }
  std::vector<double> v2 = spectral.eigenvector;
  const double v2_norm = sup_norm(v2);
  if (v2_norm > 0) for (auto& v : v2) v /= v2_norm;

  const std::size_t restarts = std::max<std::size_t>(1, config.restarts);
  std::vector<AscentResult> results(restarts);
  std::vector<std::string> methods(restarts);
  parallel_for(
      restarts,
      [&](std::size_t r) {
        std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + r);
        std::vector<double> h(n, 0.0);
        switch (r) {
          case 0:
          case 1: {
            const double s = (r == 0 ? 1.0 : -1.0) * config.seed_epsilon;
            for (std::size_t x = 0; x < n; ++x) h[x] = s * v2[x];
            methods[r] = "eigenvector-perturbation";
            break;
          }
          case 2:
          case 3: {
            const double s = r == 2 ? 1.0 : -1.0;
            for (std::size_t x = 0; x < n; ++x) h[x] = s * v2[x];
            methods[r] = "eigenvector";
            break;
          }
          case 4:
          case 5:
          case 6:
          case 7: {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            h[pick(rng)] = 3.0;
            methods[r] = "indicator";
            break;
          }
          default: {
            std::normal_distribution<double> gauss;
            for (auto& v : h) v = gauss(rng);
            methods[r] = "gaussian";
            break;
          }
        }
        results[r] = ascend(std::move(h), family, config);
      },
      1);

  std::size_t best = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    report.restart_values.push_back(results[r].value);
    if (results[r].value > results[best].value) best = r;
  }
  std::vector<double> best_h = results[best].h;
  report.best_restart = best;
  report.best_method = methods[best];
  report.iterations = results[best].iterations;
  report.converged = results[best].converged;

  // Lambda iteration from the eigenvector and one Gaussian start.
  std::optional<PairSet> pairs;
  if (metric) {
    pairs = pair_set(space, *metric,
                     metric->has_generators() ? PairMode::kGeneratorEdges
                                              : PairMode::kExhaustive);
  }
  std::mt19937_64 rng(config.seed ^ 0xA5A5A5A5ULL);
  std::normal_distribution<double> gauss;
  std::vector<double> g0(n);
  for (auto& v : g0) v = gauss(rng);
  for (const auto& start : {v2, g0}) {
    auto it = lambda_iteration(start, family, config, metric, pairs ? &*pairs : nullptr);
    report.lambda_iteration_value = std::max(report.lambda_iteration_value, it.value);
    if (it.value > results[best].value && !it.h.empty()) {
      results[best].value = it.value;
      best_h = it.h;
      report.best_method = "lambda-iteration";
      report.best_restart = restarts;
    }
  }

  if (best_h.empty()) {
    report.witness.assign(n, 1.0);
    report.rho_est = 0.0;
    return report;
  }
  // The reported value is recomputed from the witness itself.
  const double c = space.expectation<double>(best_h);
  std::vector<double> g(n);
  for (std::size_t x = 0; x < n; ++x) g[x] = std::exp(best_h[x] - c);
  const double mean = space.expectation<double>(g);
  for (auto& v : g) v /= mean;
  report.witness = g;
  try {
    report.rho_est = std::clamp(entropy_ratio(Density(g), family), 0.0, 1.0);
  } catch (const DomainError&) {
    report.rho_est = 0.0;
  }
  return report;
}

std::pair<double, double> bl_sides(const KernelFamily& family, double kappa,
                                   const std::vector<std::vector<double>>& phi) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw UsageError("duality check needs kappa in (0, 1), got " + std::to_string(kappa));
  }
  if (phi.size() != family.size()) throw UsageError("duality: one function per kernel");
  const auto& space = *family.space();
  const std::size_t n = space.size();
  std::vector<double> exponent(n, 0.0);
  double log_rhs = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (phi[i].size() != n) throw UsageError("duality: dimension mismatch");
    const double c = family.theta()[i] / (1.0 - kappa);
    auto tphi = apply<double, double>(family.kernels()[i], phi[i]);
    for (std::size_t x = 0; x < n; ++x) exponent[x] += c * tphi[x];
    const double top = *std::max_element(phi[i].begin(), phi[i].end());
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) acc += space.prob(x) * std::exp(phi[i][x] - top);
    log_rhs += c * (top + std::log(acc));
  }
  const double top = *std::max_element(exponent.begin(), exponent.end());
  double acc = 0.0;
  for (std::size_t x = 0; x < n; ++x) acc += space.prob(x) * std::exp(exponent[x] - top);
  return {top + std::log(acc), log_rhs};
}

DualityReport bl_duality_check(const KernelFamily& family, double kappa,
                               std::size_t trials, std::uint64_t seed, double range) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw UsageError("duality check needs kappa in (0, 1), got " + std::to_string(kappa));
  }
  DualityReport report;
  report.trials = trials;
  for (std::size_t i = 0; i < family.size(); ++i) {
    report.exponents.push_back(family.theta()[i] / (1.0 - kappa));
  }
  const std::size_t n = family.states();
  std::vector<double> violation(trials, 0.0), lhs(trials), rhs(trials);
  parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + t);
    std::uniform_real_distribution<double> u(-range, range);
    std::vector<std::vector<double>> phi(family.size(), std::vector<double>(n));
    for (auto& f : phi)
      for (auto& v : f) v = u(rng);
    auto [log_lhs, log_rhs] = bl_sides(family, kappa, phi);
    // Relative violation (LHS - RHS) / RHS.
    violation[t] = std::max(0.0, std::expm1(log_lhs - log_rhs));
    lhs[t] = log_lhs;
    rhs[t] = log_rhs;
  });
  std::size_t worst = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    if (violation[t] > violation[worst]) worst = t;
  }
  if (trials > 0) {
    report.max_violation = violation[worst];
    report.worst_lhs = std::exp(lhs[worst]);
    report.worst_rhs = std::exp(rhs[worst]);
  }
  return report;
}

double lip_metric(std::span<const double> f, const Metric& metric, const PairSet& pairs) {
  double best = 0.0;
  for (auto [x, y] : pairs.pairs) {
    best = std::max(best, std::abs(f[x] - f[y]) / metric(x, y));
  }
  return best;
}

LambdaContractionReport lambda_contraction_check(const KernelFamily& family,
                                                 const Metric& metric,
                                                 const PairSet& pairs, double kappa,
                                                 std::size_t samples,
                                                 std::uint64_t seed) {
  LambdaContractionReport report;
  report.samples = samples;
  const std::size_t n = family.states();
  std::vector<double> excess(samples), ratio(samples);
  parallel_for(samples, [&](std::size_t s) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + s);
    std::normal_distribution<double> gauss;
    // Mix of scales: near-linear and strongly nonlinear regimes.
    const double scale = std::pow(10.0, static_cast<double>(s % 4) - 2.0);
    std::vector<double> f(n);
    for (auto& v : f) v = scale * gauss(rng);
    const double lf = lip_metric(f, metric, pairs);
    const double lg = lip_metric(lambda_op(f, family), metric, pairs);
    excess[s] = lg - (1.0 - kappa) * lf;
    ratio[s] = lf > 0 ? lg / lf : 0.0;
  });
  report.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    report.max_excess = std::max(report.max_excess, excess[s]);
    report.worst_ratio = std::max(report.worst_ratio, ratio[s]);
  }
  return report;
}

}  // namespace entcert
