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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "entcert/certifier.hpp"
#include "entcert/contraction.hpp"
#include "entcert/gff.hpp"
#include "entcert/langevin.hpp"
#include "entcert/models.hpp"
#include "entcert/sphere.hpp"
#include "entcert/transport.hpp"
#include "oracles/transport_instances.hpp"
#include "oracles/transport_oracle.hpp"

using namespace entcert;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Certified instances reused by the sandwich, Lipschitz and duality checks.
struct ZooEntry {
  std::string name;
  Model model;
  double kappa = 0;
};
std::vector<ZooEntry> g_zoo;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failed_;
      if (first_.empty()) first_ = what;
    }
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o;
    o.pass = failed_ == 0;
    o.detail = summary + "; " + std::to_string(checks_) + " checks";
    if (failed_) o.detail += ", " + std::to_string(failed_) + " failed, first: " + first_;
    return o;
  }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::string first_;
};

Model numeric(const ExactModel& e) {
  Model m{e.kind, to_double(*e.space), {}, to_double(e.theta), to_double(e.metric),
          std::nullopt, e.theory};
  for (const auto& k : e.kernels) m.kernels.push_back(to_double(k, m.space));
  return m;
}

template <class S>
BasicCertReport<S> certify(const BasicModel<S>& m, PairMode mode = PairMode::kExhaustive) {
  return certify_kappa(m.kernels, m.theta, m.metric, pair_set(*m.space, m.metric, mode));
}

KernelFamily family_of(const Model& m) { return KernelFamily(m.kernels, m.theta); }

// 1. Product models: certified kappa equals theta_star exactly.
Outcome shearer() {
  Tally t;
  std::mt19937_64 rng(101);
  double worst_gap = 0;
  for (std::size_t n : {2, 3, 4}) {
    for (int i = 0; i < 50; ++i) {
      auto family = random_family<Rational>(n, rng);
      auto m = build_product<Rational>(std::vector<std::size_t>(n, 2), family);
      auto rep = certify(m);
      Rational ts = theta_star(family);
      t.expect(rep.kappa == ts, "n=" + std::to_string(n) + " family " + std::to_string(i) +
                                    ": kappa " + rational_to_string(rep.kappa) +
                                    " vs " + rational_to_string(ts));
      worst_gap = std::max(worst_gap, std::abs(to_double(Rational(rep.kappa - ts))));
      g_zoo.push_back({"product n=" + std::to_string(n) + " #" + std::to_string(i),
                       numeric(m), to_double(rep.kappa)});
    }
  }
  return t.outcome("150 rational families, max |kappa - theta*| = " + fmt(worst_gap));
}

// 2. Transposition shuffles on S4.
Outcome permutations() {
  Tally t;
  auto pairs = build_permutations<double>(4, pattern_family<double>(4, "pairs"));
  auto rep = certify(pairs);
  t.expect(std::abs(rep.kappa - 1.0 / 6) <= 1e-9, "pairs kappa " + fmt(rep.kappa));
  auto gen = certify(pairs, PairMode::kGeneratorEdges);
  t.expect(std::abs(gen.kappa - 1.0 / 6) <= 1e-9, "generator-edges kappa " + fmt(gen.kappa));
  g_zoo.push_back({"S4 pairs", pairs, rep.kappa});
  std::mt19937_64 rng(202);
  double min_slack = 1;
  for (int i = 0; i < 20; ++i) {
    auto family = random_family<double>(4, rng, 2);
    auto m = build_permutations<double>(4, family);
    auto r = certify(m);
    double tss = theta_star_star(family);
    t.expect(r.kappa >= tss - 1e-9, "family " + std::to_string(i) + ": kappa " +
                                        fmt(r.kappa) + " < theta** " + fmt(tss));
    min_slack = std::min(min_slack, r.kappa - tss);
    g_zoo.push_back({"S4 #" + std::to_string(i), m, r.kappa});
  }
  std::ostringstream s;
  s.precision(12);
  s << "pairs kappa = " << rep.kappa << ", 20 random families, min kappa - theta** = "
    << fmt(min_slack);
  return t.outcome(s.str());
}

// 3. Down-up walks, N <= 8.
Outcome downup() {
  Tally t;
  std::size_t count = 0, strict = 0;
  double min_margin = 1;
  for (std::size_t N = 2; N <= 8; ++N) {
    for (std::size_t n = 1; n < N; ++n) {
      for (std::size_t k = 1; k <= n; ++k) {
        auto m = build_nsets<double>(N, n, k);
        auto r = certify(m);
        const double kk = static_cast<double>(k), nn = static_cast<double>(n);
        const double bound = kk / nn + kk / static_cast<double>(N - (n - k)) * (1 - kk / nn);
        const std::string tag = "(" + std::to_string(N) + "," + std::to_string(n) + "," +
                                std::to_string(k) + ")";
        t.expect(r.kappa >= bound - 1e-9, tag + " kappa " + fmt(r.kappa) + " < " + fmt(bound));
        if (k < n) {
          t.expect(r.kappa > kk / nn, tag + " kappa not above k/n");
          min_margin = std::min(min_margin, r.kappa - kk / nn);
          ++strict;
        }
        ++count;
        g_zoo.push_back({"down-up " + tag, m, r.kappa});
      }
    }
  }
  return t.outcome(std::to_string(count) + " walks; strictness checked on " +
                   std::to_string(strict) + " with k < n (k = n forces kappa = k/n = 1)" +
                   ", min kappa - k/n = " + fmt(min_margin));
}

// 4. kappa + rho_est <= 1 and kappa + spectral <= 1.
Outcome sandwich() {
  Tally t;
  EstimateConfig cfg;
  double worst_rho = 0, worst_spec = 0;
  for (std::size_t i = 0; i < g_zoo.size(); ++i) {
    const auto& z = g_zoo[i];
    cfg.seed = 1000 + i;
    auto fam = family_of(z.model);
    auto est = estimate_rho(fam, cfg, &z.model.metric);
    worst_rho = std::max(worst_rho, z.kappa + est.rho_est);
    worst_spec = std::max(worst_spec, z.kappa + est.spectral_factor);
    t.expect(z.kappa + est.rho_est <= 1 + 1e-6, z.name + ": kappa + rho = " +
                                                    fmt(z.kappa + est.rho_est));
    t.expect(z.kappa + est.spectral_factor <= 1 + 1e-9,
             z.name + ": kappa + spectral = " + fmt(z.kappa + est.spectral_factor));
  }
  return t.outcome(std::to_string(g_zoo.size()) + " instances, max kappa + rho = " +
                   fmt(worst_rho) + ", max kappa + spectral = " + fmt(worst_spec));
}

// 5. Lip(Lambda f) <= (1 - kappa) Lip(f).
Outcome lipschitz() {
  Tally t;
  double worst = -1;
  for (std::size_t i = 0; i < g_zoo.size(); ++i) {
    const auto& z = g_zoo[i];
    auto pairs = pair_set(*z.model.space, z.model.metric, PairMode::kExhaustive);
    auto r = lambda_contraction_check(family_of(z.model), z.model.metric, pairs, z.kappa,
                                      1000, 2000 + i);
    worst = std::max(worst, r.max_excess);
    t.expect(r.max_excess <= 1e-9, z.name + ": excess " + fmt(r.max_excess));
  }
  return t.outcome(std::to_string(g_zoo.size()) + " instances x 1000 f, max excess = " +
                   fmt(worst));
}

// 6. Brascamp-Lieb dual inequality at the certified constant.
Outcome duality() {
  Tally t;
  double worst = 0;
  std::size_t used = 0, at_one = 0;
  for (std::size_t i = 0; i < g_zoo.size(); ++i) {
    const auto& z = g_zoo[i];
    if (!(z.kappa > 0)) continue;
    if (z.kappa >= 1) {
      ++at_one;
      continue;
    }
    auto r = bl_duality_check(family_of(z.model), z.kappa, 1000, 3000 + i);
    worst = std::max(worst, r.max_violation);
    t.expect(r.max_violation <= 1e-10, z.name + ": violation " + fmt(r.max_violation));
    ++used;
  }
  return t.outcome(std::to_string(used) + " instances x 1000 draws (" +
                   std::to_string(at_one) +
                   " with kappa = 1 have no finite exponent), max violation = " + fmt(worst));
}

std::vector<Mask> all_blocks(std::size_t n) {
  std::vector<Mask> out;
  for (Mask a = 1; a < (Mask(1) << n); ++a) out.push_back(a);
  return out;
}

// 7. GFF block matrices and the weighted curvature inequality.
Outcome gff_identities() {
  Tally t;
  std::mt19937_64 rng(707);
  double worst_id = 0, worst_curv = -1e300;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i) % 7;
    auto g = random_gff(n, rng);
    auto blocks = all_blocks(n);
    auto id = check_matrix_identities(g, blocks);
    const std::string tag = "instance " + std::to_string(i) + " (n=" + std::to_string(n) + ")";
    t.expect(id.ok(1e-8), tag + ": identity residuals");
    worst_id = std::max({worst_id, id.idempotent, id.delta_m_symmetric, -id.min_id_minus_mt,
                         -id.psi_lower_gap});
    BlockFamily family(n, blocks, BlockWeights::uniform(blocks.size()));
    auto cv = check_distorted_curvature(g, family, 10000, 7000 + i);
    worst_curv = std::max({worst_curv, cv.max_violation, cv.aggregate_violation});
    t.expect(cv.max_violation <= 1e-9, tag + ": curvature " + fmt(cv.max_violation));
    t.expect(cv.aggregate_violation <= 1e-9, tag + ": aggregate " + fmt(cv.aggregate_violation));
  }
  return t.outcome("20 instances, all blocks, max identity residual = " + fmt(worst_id) +
                   ", max curvature violation = " + fmt(worst_curv));
}

// 8. Glauber constants, lattice closed forms, sigma sandwich at Gamma = Id.
Outcome gff_constants() {
  Tally t;
  std::mt19937_64 rng(808);
  double worst_glauber = 0;
  for (int i = 0; i < 20; ++i) {
    auto g = random_gff(2 + static_cast<std::size_t>(i) % 10, rng);
    auto gc = glauber_constants(g);
    const double target = g.delta_min / static_cast<double>(g.size());
    const double lin = lambda_upper_linear(g);
    double gap = std::max({std::abs(gc.kappa - target), std::abs(gc.lambda - target),
                           std::abs(lin - target)});
    worst_glauber = std::max(worst_glauber, gap);
    t.expect(gap <= 1e-9, "random field " + std::to_string(i) + ": gap " + fmt(gap));
  }
  double worst_lattice = 0;
  const std::vector<std::vector<std::size_t>> boxes = {
      {3}, {7}, {2, 3}, {3, 3}, {4, 5}, {2, 2, 3}, {3, 3, 3}, {2, 3, 4, 2}};
  for (const auto& dims : boxes) {
    const double h = 1.0 / (2.0 * static_cast<double>(dims.size()));
    auto ld = lattice_delta(dims, h);
    double gap = std::max(std::abs(ld.delta - ld.separable), std::abs(ld.delta - ld.closed_form));
    worst_lattice = std::max(worst_lattice, gap);
    t.expect(gap <= 1e-10, "lattice of " + std::to_string(ld.states) + " sites: gap " + fmt(gap));
  }
  auto half = lattice_delta({3}, 0.5);
  t.expect(std::abs(half.delta - (1 - std::sqrt(0.5))) <= 1e-12, "path of 3 at h = 1/2");

  std::size_t sigma_checks = 0;
  for (std::size_t n : {2, 3, 4, 5}) {
    for (int i = 0; i < 5; ++i) {
      auto family = random_family<double>(n, rng);
      auto s = sigma_quantities(Matrix::Identity(n, n), family);
      const double ts = theta_star(family);
      t.expect(std::abs(s.kappa_low - (1 - std::sqrt(1 - ts))) <= 1e-12, "sigma lower form");
      t.expect(std::abs(s.kappa_high - ts) <= 1e-12, "sigma upper form");
      t.expect(s.kappa_low <= s.kappa_high + 1e-15, "sigma ordering");
      ++sigma_checks;
    }
  }
  return t.outcome("20 fields max Glauber gap = " + fmt(worst_glauber) + ", " +
                   std::to_string(boxes.size()) + " lattices max gap = " + fmt(worst_lattice) +
                   ", " + std::to_string(sigma_checks) + " sigma sandwiches");
}

// 9. Coupling contraction on the lp sphere.
Outcome sphere() {
  Tally t;
  std::mt19937_64 rng(909);
  double worst = -1, attain = 0;
  std::size_t runs = 0;
  for (double p : {1.0, 2.0, 4.0}) {
    for (std::size_t n : {3, 4, 6}) {
      for (int i = 0; i < 10; ++i) {
        auto family = random_family<double>(n, rng, 2);
        auto r = contraction_check(family, p, n, 100000, 9000 + runs);
        const std::string tag = "p=" + fmt(p) + " n=" + std::to_string(n) + " #" + std::to_string(i);
        t.expect(r.max_ratio <= r.bound + 1e-9, tag + ": ratio " + fmt(r.max_ratio) +
                                                    " > bound " + fmt(r.bound));
        t.expect(std::abs(r.basis_max - r.bound) <= 1e-9, tag + ": basis pair misses bound");
        worst = std::max(worst, r.max_ratio - r.bound);
        attain = std::max(attain, std::abs(r.basis_max - r.bound));
        ++runs;
      }
    }
  }
  return t.outcome(std::to_string(runs) + " runs x 1e5 random pairs, max ratio - bound = " +
                   fmt(worst) + ", max |basis - bound| = " + fmt(attain));
}

// 10. Transport against brute-force references.
Outcome transport() {
  Tally t;
  std::mt19937_64 rng(1010);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i) % 5;
    auto metric = oracle::random_exact_metric(n, rng);
    auto mu = oracle::random_exact_measure(n, rng), nu = oracle::random_exact_measure(n, rng);
    auto dist = oracle::exact_matrix(metric);
    t.expect(w1<Rational>(mu, nu, metric).value == oracle::w1(mu, nu, dist),
             "exact W1 instance " + std::to_string(i));
    t.expect(winf<Rational>(mu, nu, metric).value == oracle::winf(mu, nu, dist),
             "exact Winf instance " + std::to_string(i));
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i) % 5;
    auto metric = oracle::random_euclidean_metric(n, rng);
    auto mu = oracle::random_measure(n, rng), nu = oracle::random_measure(n, rng);
    auto dist = oracle::exact_matrix(metric);
    auto emu = oracle::exact_vector(mu), enu = oracle::exact_vector(nu);
    double a = std::abs(w1<double>(mu, nu, metric).value -
                        static_cast<double>(oracle::w1(emu, enu, dist)));
    double b = std::abs(winf<double>(mu, nu, metric).value -
                        static_cast<double>(oracle::winf(emu, enu, dist)));
    worst = std::max({worst, a, b});
    t.expect(a <= 1e-10, "float W1 instance " + std::to_string(i));
    t.expect(b <= 1e-10, "float Winf instance " + std::to_string(i));
  }
  return t.outcome("200 rational + 200 float instances, max float error = " + fmt(worst));
}

// 11. Langevin coupling rates and entropy decay.
Outcome langevin() {
  Tally t;
  auto ou = quadratic_potential(1, 1.0);
  auto paths = coupled_paths(ou, {1.0}, {-1.0}, 1e-3, 5.0, 11);
  double ou_rate = decay_rate_fit(paths.times, paths.distance);
  t.expect(ou_rate >= 0.99 && ou_rate <= 1.01, "OU rate " + fmt(ou_rate));

  auto lc = logcosh_potential(1, 1.0, 2.0);
  auto lc_paths = coupled_paths(lc, {1.0}, {-1.0}, 1e-3, 5.0, 12);
  double lc_rate = decay_rate_fit(lc_paths.times, lc_paths.distance);
  t.expect(lc_rate >= 0.95, "perturbed rate " + fmt(lc_rate));

  double worst = 0;
  std::vector<double> grid;
  for (int k = 0; k <= 6; ++k) grid.push_back(0.25 * k);
  for (const Potential* v : {&ou, &lc}) {
    auto curve = entropy_decay_estimate(*v, gaussian_sampler(2.0, 1.0), grid, kMinParticles,
                                        200, 13);
    for (std::size_t k = 1; k < curve.times.size(); ++k) {
      double ratio = curve.entropy[k] / curve.envelope[k];
      worst = std::max(worst, ratio);
      t.expect(ratio <= 1.2, v->name + " entropy at t=" + fmt(curve.times[k]) + " ratio " +
                                 fmt(ratio));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "OU rate = %.5f, perturbed rate = %.4f, max entropy/envelope = %.3f", ou_rate,
                lc_rate, worst);
  return t.outcome(buf);
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Shearer exactness", 30, shearer},
      {2, "Permutations", 300, permutations},
      {3, "Down-up walks", 120, downup},
      {4, "Sandwich consistency", 0, sandwich},
      {5, "Lambda contraction", 0, lipschitz},
      {6, "Duality", 0, duality},
      {7, "GFF matrix identities", 300, gff_identities},
      {8, "GFF constants", 0, gff_constants},
      {9, "Sphere coupling", 180, sphere},
      {10, "Transport correctness", 0, transport},
      {11, "Langevin", 0, langevin},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += "; runtime over the " + fmt(c.limit_seconds) + " s limit";
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2d  %-22s  %s  [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
