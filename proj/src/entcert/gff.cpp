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

#include "entcert/gff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "entcert/parallel.hpp"

namespace entcert {

namespace {

std::vector<std::vector<std::size_t>> components(const Matrix& P) {
  const std::size_t n = static_cast<std::size_t>(P.rows());
  std::vector<int> seen(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s] >= 0) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = static_cast<int>(out.size());
    while (!q.empty()) {
      std::size_t i = q.front();
      q.pop();
      comp.push_back(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (seen[j] < 0 && P(i, j) > 0) {
          seen[j] = static_cast<int>(out.size());
          q.push(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

Matrix submatrix(const Matrix& m, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& A,
                                    std::size_t n) {
  std::vector<char> in(n, 0);
  for (auto i : A) in[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

GffInstance build_gff(const Matrix& P) {
  const auto n = static_cast<std::size_t>(P.rows());
  if (n == 0 || P.cols() != P.rows()) {
    throw UsageError("gff: P must be a nonempty square matrix");
  }
  if (n > kMaxGffSize) {
    throw UsageError("gff: " + std::to_string(n) + " sites exceeds " +
                     std::to_string(kMaxGffSize));
  }
  if (!P.allFinite()) throw UsageError("gff: non-finite entry in P");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (P(i, j) < 0) throw ContractViolation("gff: negative entry in P");
      if (std::abs(P(i, j) - P(j, i)) > 1e-12) {
        throw ContractViolation("gff: P is not symmetric");
      }
      row += P(i, j);
    }
    if (row > 1 + 1e-12) {
      throw ContractViolation("gff: row " + std::to_string(i) +
                              " of P sums to more than 1");
    }
  }

  GffInstance g;
  g.P = 0.5 * (P + P.transpose());
  g.Delta = Matrix::Identity(n, n) - g.P;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.Delta);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("gff: eigendecomposition failed");
  }
  g.delta_spectrum = eig.eigenvalues();
  g.delta_min = g.delta_spectrum(0);
  if (!(g.delta_min > 1e-12)) {
    std::ostringstream msg;
    msg << "gff: Id - P is singular (least eigenvalue " << g.delta_min << ")";
    throw NumericalError(msg.str());
  }
  const Matrix& V = eig.eigenvectors();
  g.Gamma = V * g.delta_spectrum.cwiseInverse().asDiagonal() * V.transpose();
  double residual = max_abs(g.Gamma * g.Delta - Matrix::Identity(n, n));
  if (residual > 1e-8) {
    std::ostringstream msg;
    msg << "gff: Gamma * Delta residual " << residual;
    throw NumericalError(msg.str());
  }

  // A positive bottom eigenvector exists iff every irreducible piece reaches
  // the same least eigenvalue.
  auto comps = components(g.P);
  g.psi = Vector::Zero(n);
  if (comps.size() == 1) {
    g.psi = V.col(0);
    if (g.psi.sum() < 0) g.psi = -g.psi;
    g.psi /= g.psi.maxCoeff();
  }
  for (const auto& c : comps) {
    if (comps.size() == 1) break;
    Matrix sub = submatrix(g.Delta, c, c);
    Eigen::SelfAdjointEigenSolver<Matrix> ce(sub);
    double dc = ce.eigenvalues()(0);
    if (std::abs(dc - g.delta_min) > 1e-10) {
      throw ContractViolation(
          "gff: P is reducible and its pieces have different least "
          "eigenvalues");
    }
    Vector v = ce.eigenvectors().col(0);
    if (v.sum() < 0) v = -v;
    v /= v.maxCoeff();
    for (std::size_t i = 0; i < c.size(); ++i) g.psi(c[i]) = v(i);
  }
  if (!(g.psi.minCoeff() > 0)) {
    throw NumericalError("gff: Perron vector is not strictly positive");
  }
  if (max_abs(g.Delta * g.psi - g.delta_min * g.psi) > 1e-8) {
    throw NumericalError("gff: Perron vector residual too large");
  }
  return g;
}

GffInstance random_gff(std::size_t n, std::mt19937_64& rng, double mass) {
  if (n == 0) throw UsageError("random_gff: n must be positive");
  if (!(mass > 0 && mass < 1)) throw UsageError("random_gff: mass in (0,1)");
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Matrix P = Matrix::Zero(n, n);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    P(i, j) = P(j, i) = weight(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (P(i, j) == 0 && coin(rng) < 0.4) P(i, j) = P(j, i) = weight(rng);
    }
  }
  double top = P.rowwise().sum().maxCoeff();
  if (top > 0) P *= mass / top;
  return build_gff(P);
}

std::vector<std::size_t> mask_indices(Mask a, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n && i < 32; ++i) {
    if (a >> i & 1u) out.push_back(i);
  }
  if (n < 32 && (a >> n) != 0) {
    throw UsageError("block " + mask_to_string(a) + " exceeds " +
                     std::to_string(n) + " coordinates");
  }
  return out;
}

Matrix conditional_matrix(const Matrix& Gamma,
                          const std::vector<std::size_t>& A) {
  const auto n = static_cast<std::size_t>(Gamma.rows());
  if (A.empty()) throw UsageError("conditional_matrix: empty block");
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A[k] >= n || (k > 0 && A[k] <= A[k - 1])) {
      throw UsageError("conditional_matrix: block indices must be sorted, "
                       "distinct and in range");
    }
  }
  auto Ac = complement(A, n);
  Matrix M = Matrix::Zero(n, n);
  for (auto i : A) M(i, i) = 1;
  if (Ac.empty()) return M;
  Matrix gcc = submatrix(Gamma, Ac, Ac);
  Eigen::LLT<Matrix> llt(gcc);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    std::ostringstream msg;
    msg << "conditional_matrix: complement block of Gamma is singular "
           "(reciprocal condition "
        << (llt.info() == Eigen::Success ? llt.rcond() : 0.0) << ")";
    throw NumericalError(msg.str());
  }
  Matrix solved = llt.solve(submatrix(Gamma, Ac, A));  // Gcc^{-1} G_{Ac,A}
  for (std::size_t r = 0; r < A.size(); ++r) {
    for (std::size_t c = 0; c < Ac.size(); ++c) M(A[r], Ac[c]) = -solved(c, r);
  }
  return M;
}

Matrix conditional_matrix(const GffInstance& g, Mask a) {
  return conditional_matrix(g.Gamma, mask_indices(a, g.size()));
}

bool MatrixIdentityReport::ok(double tol, double neg_tol,
                              double neumann_tol) const {
  return idempotent <= tol && delta_m_symmetric <= tol &&
         min_id_minus_mt >= -neg_tol && maga_offblock <= tol &&
         psi_lower_gap >= -tol && psi_outside <= tol && neumann <= neumann_tol;
}

MatrixIdentityReport check_matrix_identities(const GffInstance& g,
                                             const std::vector<Mask>& blocks) {
  const std::size_t n = g.size();
  const Matrix I = Matrix::Identity(n, n);
  std::vector<MatrixIdentityReport> slots(blocks.size());
  parallel_for(
      blocks.size(),
      [&](std::size_t b) {
        auto A = mask_indices(blocks[b], n);
        Matrix M = conditional_matrix(g.Gamma, A);
        auto& r = slots[b];
        r.idempotent = max_abs(M * M - M);
        Matrix DM = g.Delta * M;
        r.delta_m_symmetric = max_abs(DM - DM.transpose());
        r.min_id_minus_mt = (I - M.transpose()).minCoeff();
        Matrix MG = M * g.Gamma;
        std::vector<char> in(n, 0);
        for (auto i : A) in[i] = 1;
        double off = 0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (!(in[i] && in[j])) off = std::max(off, std::abs(MG(i, j)));
          }
        }
        r.maga_offblock = off;
        Vector Mpsi = M * g.psi;
        double gap = std::numeric_limits<double>::infinity();
        double outside = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (in[j]) {
            gap = std::min(gap, Mpsi(j) - g.delta_min * g.psi(j));
          } else {
            outside = std::max(outside, std::abs(Mpsi(j)));
          }
        }
        r.psi_lower_gap = gap;
        r.psi_outside = outside;

        Matrix PA = submatrix(g.P, A, A);
        Matrix DA = Matrix::Identity(A.size(), A.size()) - PA;
        Matrix inv = DA.llt().solve(Matrix::Identity(A.size(), A.size()));
        double radius = Eigen::SelfAdjointEigenSolver<Matrix>(
                            PA, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
        // Terms needed for a tail below 1e-10, rounded up to 2^m - 1 by
        // repeated squaring.
        std::size_t want = 1;
        if (radius > 0) {
          double k = std::log(1e-10 * (1 - radius)) / std::log(radius);
          want = static_cast<std::size_t>(std::clamp(k, 1.0, 1e7));
        }
        Matrix S = Matrix::Identity(A.size(), A.size());
        Matrix power = PA;
        std::size_t terms = 1;
        while (terms < want) {
          S += power * S;
          power = power * power;
          terms *= 2;
        }
        r.neumann = max_abs(inv - S);
        r.neumann_terms = terms;
      },
      1);

  MatrixIdentityReport out;
  out.min_id_minus_mt = std::numeric_limits<double>::infinity();
  out.psi_lower_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : slots) {
    out.idempotent = std::max(out.idempotent, r.idempotent);
    out.delta_m_symmetric = std::max(out.delta_m_symmetric, r.delta_m_symmetric);
    out.min_id_minus_mt = std::min(out.min_id_minus_mt, r.min_id_minus_mt);
    out.maga_offblock = std::max(out.maga_offblock, r.maga_offblock);
    out.psi_lower_gap = std::min(out.psi_lower_gap, r.psi_lower_gap);
    out.psi_outside = std::max(out.psi_outside, r.psi_outside);
    out.neumann = std::max(out.neumann, r.neumann);
    out.neumann_terms = std::max(out.neumann_terms, r.neumann_terms);
  }
  out.blocks = blocks.size();
  return out;
}

CurvatureSides curvature_sides(const GffInstance& g, const Matrix& M,
                               const std::vector<std::size_t>& A,
                               const Vector& z) {
  const std::size_t n = g.size();
  Vector w = g.Delta * z;
  Vector moved = g.Delta * (z - M * z);
  CurvatureSides s;
  double on_a = 0;
  for (auto i : A) on_a += g.psi(i) * std::abs(w(i));
  for (std::size_t i = 0; i < n; ++i) {
    s.lhs += g.psi(i) * std::abs(moved(i));
    s.dist += g.psi(i) * std::abs(w(i));
  }
  s.rhs = s.dist - g.delta_min * on_a;
  return s;
}

CurvatureReport check_distorted_curvature(const GffInstance& g,
                                          const BlockFamily& family,
                                          std::size_t samples,
                                          std::uint64_t seed) {
  const std::size_t n = g.size();
  if (family.coordinates() != n) {
    throw UsageError("curvature check: family has " +
                     std::to_string(family.coordinates()) +
                     " coordinates, field has " + std::to_string(n));
  }
  if (samples == 0) throw UsageError("curvature check: samples must be >= 1");

  const std::size_t nb = family.size();
  std::vector<Matrix> moved(nb);  // Delta (Id - M_A)
  std::vector<Vector> weight_a(nb);  // psi restricted to A
  const Matrix I = Matrix::Identity(n, n);
  parallel_for(
      nb,
      [&](std::size_t b) {
        auto A = mask_indices(family.blocks()[b], n);
        moved[b] = g.Delta * (I - conditional_matrix(g.Gamma, A));
        weight_a[b] = Vector::Zero(n);
        for (auto i : A) weight_a[b](i) = g.psi(i);
      },
      1);

  CurvatureReport report;
  report.samples = samples;
  report.blocks = nb;
  report.theta_star = theta_star(family);
  report.contraction = 1 - g.delta_min * report.theta_star;
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.aggregate_violation = -std::numeric_limits<double>::infinity();

  constexpr std::size_t kChunk = 512;
  std::mt19937_64 rng(splitmix(seed));
  std::normal_distribution<double> normal;
  std::vector<double> block_worst(nb);
  std::vector<Eigen::RowVectorXd> block_lhs(nb);
  for (std::size_t start = 0; start < samples; start += kChunk) {
    const std::size_t c = std::min(kChunk, samples - start);
    Matrix Z(n, c);
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t i = 0; i < n; ++i) Z(i, k) = normal(rng);
    }
    Matrix W = (g.Delta * Z).cwiseAbs();
    Eigen::RowVectorXd dist = g.psi.transpose() * W;
    parallel_for(
        nb,
        [&](std::size_t b) {
          Eigen::RowVectorXd lhs =
              g.psi.transpose() * (moved[b] * Z).cwiseAbs();
          Eigen::RowVectorXd rhs =
              dist - g.delta_min * (weight_a[b].transpose() * W);
          block_worst[b] = (lhs - rhs).maxCoeff();
          block_lhs[b] = std::move(lhs);
        },
        1);
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(c);
    for (std::size_t b = 0; b < nb; ++b) {
      if (block_worst[b] > report.max_violation) {
        report.max_violation = block_worst[b];
        report.worst_block = family.blocks()[b];
      }
      total += family.theta()[b] * block_lhs[b];
    }
    report.aggregate_violation =
        std::max(report.aggregate_violation,
                 (total - report.contraction * dist).maxCoeff());
  }
  return report;
}

GlauberConstants glauber_constants(const GffInstance& g,
                                   const BlockFamily* family) {
  GlauberConstants out;
  out.kappa = out.lambda = g.delta_min / static_cast<double>(g.size());
  if (family) {
    if (family->coordinates() != g.size()) {
      throw UsageError("glauber_constants: family size mismatch");
    }
    out.lower_bound = g.delta_min * theta_star(*family);
  }
  return out;
}

double lambda_upper_linear(const GffInstance& g, const std::optional<Vector>& z) {
  const std::size_t n = g.size();
  Vector v = z ? *z : g.psi;
  if (static_cast<std::size_t>(v.size()) != n) {
    throw UsageError("lambda_upper_linear: direction has wrong length");
  }
  double var = v.dot(g.Gamma * v);
  if (!(var > 0)) throw DomainError("lambda_upper_linear: zero direction");
  // Var_i(x^T z) = z_i^2 / Delta_ii.
  double form = 0;
  for (std::size_t i = 0; i < n; ++i) form += v(i) * v(i) / g.Delta(i, i);
  return form / static_cast<double>(n) / var;
}

SigmaReport sigma_quantities(const Matrix& Gamma, const BlockFamily& family) {
  const auto n = static_cast<std::size_t>(Gamma.rows());
  if (n == 0 || Gamma.cols() != Gamma.rows()) {
    throw UsageError("sigma: Gamma must be square");
  }
  if (family.coordinates() != n) throw UsageError("sigma: family size mismatch");
  if (max_abs(Gamma - Gamma.transpose()) > 1e-10 * std::max(1.0, max_abs(Gamma))) {
    throw ContractViolation("sigma: Gamma is not symmetric");
  }
  Matrix G = 0.5 * (Gamma + Gamma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0)) {
    throw ContractViolation("sigma: Gamma is not positive definite");
  }
  const Matrix& V = eig.eigenvectors();
  Matrix root = V * eig.eigenvalues().cwiseSqrt().asDiagonal() * V.transpose();
  Matrix inv = V * eig.eigenvalues().cwiseInverse().asDiagonal() * V.transpose();

  std::vector<Matrix> terms(family.size());
  parallel_for(
      family.size(),
      [&](std::size_t b) {
        Matrix M = conditional_matrix(G, mask_indices(family.blocks()[b], n));
        Matrix R = M * root;
        terms[b] = family.theta()[b] * (R.transpose() * inv * R);
      },
      1);
  SigmaReport out;
  out.Sigma = Matrix::Zero(n, n);
  for (const auto& t : terms) out.Sigma += t;
  out.Sigma = 0.5 * (out.Sigma + out.Sigma.transpose());
  out.sigma = Eigen::SelfAdjointEigenSolver<Matrix>(out.Sigma,
                                                    Eigen::EigenvaluesOnly)
                  .eigenvalues()(0);
  double s = std::clamp(out.sigma, 0.0, 1.0);
  out.kappa_low = 1 - std::sqrt(1 - s);
  out.kappa_high = out.sigma;
  return out;
}

Matrix lattice_matrix(const std::vector<std::size_t>& dims, double hop_weight) {
  if (dims.empty()) throw UsageError("lattice: no dimensions");
  std::size_t states = 1;
  for (auto k : dims) {
    if (k == 0) throw UsageError("lattice: side length must be positive");
    if (states > kMaxGffSize / k) {
      throw UsageError("lattice: more than " + std::to_string(kMaxGffSize) +
                       " sites");
    }
    states *= k;
  }
  if (!(hop_weight >= 0) || hop_weight * 2.0 * static_cast<double>(dims.size()) > 1 + 1e-12) {
    throw UsageError("lattice: hop weight must lie in [0, 1/(2d)]");
  }
  Matrix P = Matrix::Zero(states, states);
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) stride[k - 1] = stride[k] * dims[k];
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t k = 0; k < dims.size(); ++k) {
      std::size_t coord = s / stride[k] % dims[k];
      if (coord + 1 < dims[k]) {
        P(s, s + stride[k]) = hop_weight;
        P(s + stride[k], s) = hop_weight;
      }
    }
  }
  return P;
}

LatticeDelta lattice_delta(const std::vector<std::size_t>& dims,
                           double hop_weight) {
  Matrix P = lattice_matrix(dims, hop_weight);
  LatticeDelta out;
  out.states = static_cast<std::size_t>(P.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("lattice: eigendecomposition failed");
  }
  out.delta = 1 - eig.eigenvalues().maxCoeff();
  double cos_sum = 0;
  for (auto k : dims) {
    cos_sum += std::cos(std::numbers::pi / static_cast<double>(k + 1));
  }
  const double d = static_cast<double>(dims.size());
  out.closed_form = 1 - 2 * hop_weight * cos_sum;
  out.separable = 2 * hop_weight * (d - cos_sum);
  out.displayed = 2 / d * (d - cos_sum);
  return out;
}

}  // namespace entcert
