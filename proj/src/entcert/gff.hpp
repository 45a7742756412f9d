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

// Discrete Gaussian free field with covariance (Id - P)^{-1}: conditional
// matrices M_A, the psi-weighted curvature inequality, sigma bounds, lattices.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "entcert/models.hpp"

namespace entcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GffInstance {
  Matrix P;
  Matrix Delta;  // Id - P
  Matrix Gamma;  // Delta^{-1}
  double delta_min = 0;
  Vector psi;  // positive, max entry 1
  Vector delta_spectrum;

  std::size_t size() const { return static_cast<std::size_t>(P.rows()); }
};

inline constexpr std::size_t kMaxGffSize = 4096;

GffInstance build_gff(const Matrix& P);

// Symmetric, zero diagonal, row sums <= `mass` < 1, connected.
GffInstance random_gff(std::size_t n, std::mt19937_64& rng, double mass = 0.95);

// Indices of a subset, sorted. Masks address the first 32 coordinates.
std::vector<std::size_t> mask_indices(Mask a, std::size_t n);

// M_A from a positive definite covariance.
Matrix conditional_matrix(const Matrix& Gamma, const std::vector<std::size_t>& A);
Matrix conditional_matrix(const GffInstance& g, Mask a);

struct MatrixIdentityReport {
  double idempotent = 0;       // max |M^2 - M|
  double delta_m_symmetric = 0;  // max |DM - (DM)^T|
  double min_id_minus_mt = 0;  // min entry of Id - M^T
  double maga_offblock = 0;    // max |M Gamma| outside A x A
  double psi_lower_gap = 0;    // min over j in A of (M psi)_j - delta psi_j
  double psi_outside = 0;      // max |(M psi)_j| for j outside A
  double neumann = 0;          // max |Delta_AA^{-1} - sum_k P_AA^k|
  std::size_t neumann_terms = 0;
  std::size_t blocks = 0;

  // All residuals within `tol`, nonnegativity within `neg_tol`.
  bool ok(double tol = 1e-8, double neg_tol = 1e-10,
          double neumann_tol = 1e-6) const;
};

MatrixIdentityReport check_matrix_identities(const GffInstance& g,
                                             const std::vector<Mask>& blocks);

struct CurvatureReport {
  double max_violation = 0;  // max over z, A of lhs - rhs
  Mask worst_block = 0;
  double aggregate_violation = 0;  // sum_A theta_A lhs - (1 - delta theta*) dist
  double theta_star = 0;
  double contraction = 0;  // 1 - delta theta*
  std::size_t samples = 0;
  std::size_t blocks = 0;
};

// Sides of the per-block inequality at one z.
struct CurvatureSides {
  double lhs = 0;
  double rhs = 0;
  double dist = 0;
};
CurvatureSides curvature_sides(const GffInstance& g, const Matrix& M,
                               const std::vector<std::size_t>& A,
                               const Vector& z);

CurvatureReport check_distorted_curvature(const GffInstance& g,
                                          const BlockFamily& family,
                                          std::size_t samples,
                                          std::uint64_t seed);

struct GlauberConstants {
  double kappa = 0;
  double lambda = 0;
  std::optional<double> lower_bound;  // delta * theta_star for a family
};

GlauberConstants glauber_constants(const GffInstance& g,
                                   const BlockFamily* family = nullptr);

// Dirichlet form of single-site dynamics over Var at f(x) = x^T z; z defaults
// to the bottom eigenvector of Delta.
double lambda_upper_linear(const GffInstance& g,
                           const std::optional<Vector>& z = std::nullopt);

struct SigmaReport {
  Matrix Sigma;
  double sigma = 0;
  double kappa_low = 0;
  double kappa_high = 0;
};

SigmaReport sigma_quantities(const Matrix& Gamma, const BlockFamily& family);

struct LatticeDelta {
  double delta = 0;        // eigendecomposition
  double closed_form = 0;  // 1 - 2h sum_k cos(pi/(n_k+1))
  double separable = 0;    // sum_k 2h (1 - cos(pi/(n_k+1)))
  double displayed = 0;    // (2/d) sum_k (1 - cos(pi/(n_k+1)))
  std::size_t states = 0;
};

// Killed nearest-neighbour walk on the box with per-neighbour weight h.
Matrix lattice_matrix(const std::vector<std::size_t>& dims, double hop_weight);
LatticeDelta lattice_delta(const std::vector<std::size_t>& dims,
                           double hop_weight);

}  // namespace entcert
