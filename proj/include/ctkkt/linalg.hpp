// Copyright 2026 The ctkkt Authors
//
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

// Dense kernels used by certification: SVD-based Gram determinants,
// minimal-norm least squares, orthonormal null-space bases, symmetric
// eigenvalues, and the L^(p-1)/K inverse-norm bound. All functions are pure.

#pragma once

#include <Eigen/Dense>

namespace ctkkt {

/// SVD summary of a wide matrix M (rows <= cols), quantifying how far its
/// rows are from linear dependence via det(M M').
struct GramReport {
  int rows = 0;
  int cols = 0;
  Eigen::VectorXd singular_values;  // of M, descending
  double det = 0.0;                 // det(M M') = product of squared singular values
  double log_det = 0.0;             // log of the same; -inf when rank deficient
  int sign = 0;                     // 1 when all singular values are positive, else 0
  double spectral_norm = 0.0;       // largest singular value of M
  int rank = 0;                     // numerical rank at `tol`
  double tol = 0.0;                 // rank tolerance actually used
};

/// Rank decision tolerance: 1e-10 * sigma_1 * max(rows, cols).
double default_rank_tol(double sigma_max, int rows, int cols);

/// Computes the Gram determinant report of an r-by-c matrix, r <= c.
/// det is formed as the product of squared singular values; for r > 20 the
/// product is accumulated in log space and `det` is its exponential.
/// Throws DimensionError when r > c.
GramReport gram_det(const Eigen::MatrixXd& M);

/// Upper bound L^(p-1)/K on the spectral norm of the inverse of any p-by-p
/// matrix with determinant >= K > 0 and spectral norm <= L.
double inverse_norm_bound(double K, double L, int p);

/// Minimal-norm x with ||M x - b|| minimal, via SVD pseudo-inverse.
/// Singular values at or below tol_rank are treated as zero; pass a negative
/// tol_rank to use default_rank_tol.
Eigen::VectorXd min_norm_lsq(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                             double tol_rank = -1.0);

/// Orthonormal basis (columns) of the numerical null space of M.
/// Returns a cols-by-k matrix with k = cols - rank; k may be zero.
Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& M, double tol_rank = -1.0);

/// Largest eigenvalue of a symmetric matrix; -infinity for the 0x0 matrix.
/// Asymmetry beyond 1e-12 * ||S|| is rejected with DimensionError.
double max_eig_sym(const Eigen::MatrixXd& S);

}  // namespace ctkkt
