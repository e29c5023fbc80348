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

#include "ctkkt/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ctkkt/errors.hpp"

namespace ctkkt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double default_rank_tol(double sigma_max, int rows, int cols) {
  return 1e-10 * sigma_max * static_cast<double>(std::max(rows, cols));
}

GramReport gram_det(const Eigen::MatrixXd& M) {
  const int r = static_cast<int>(M.rows());
  const int c = static_cast<int>(M.cols());
  if (r > c) {
    throw DimensionError("gram_det requires rows <= cols, got " +
                         std::to_string(r) + "x" + std::to_string(c));
  }

  GramReport report;
  report.rows = r;
  report.cols = c;
  if (r == 0) {
    // Empty Gram matrix: determinant of a 0x0 matrix is 1 by convention.
    report.det = 1.0;
    report.log_det = 0.0;
    report.sign = 1;
    report.singular_values.resize(0);
    return report;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  report.singular_values = svd.singularValues();
  report.spectral_norm = report.singular_values(0);
  report.tol = default_rank_tol(report.spectral_norm, r, c);
  report.rank = 0;
  for (int i = 0; i < report.singular_values.size(); ++i) {
    if (report.singular_values(i) > report.tol) ++report.rank;
  }

  report.sign = 1;
  report.log_det = 0.0;
  for (int i = 0; i < r; ++i) {
    const double s = report.singular_values(i);
    if (s == 0.0) {
      report.sign = 0;
      report.log_det = -kInf;
      break;
    }
    report.log_det += 2.0 * std::log(s);
  }

  if (report.sign == 0) {
    report.det = 0.0;
  } else if (r <= 20) {
    double det = 1.0;
    for (int i = 0; i < r; ++i) {
      const double s = report.singular_values(i);
      det *= s * s;
    }
    report.det = det;
  } else {
    // Products of many squared singular values under/overflow; report the
    // exponentiated log-determinant (possibly 0 or inf) alongside log_det.
    report.det = std::exp(report.log_det);
  }
  return report;
}

double inverse_norm_bound(double K, double L, int p) {
  if (!(K > 0.0)) throw Error("inverse_norm_bound requires K > 0");
  if (!(L > 0.0)) throw Error("inverse_norm_bound requires L > 0");
  if (p < 1) throw Error("inverse_norm_bound requires p >= 1");
  return std::pow(L, static_cast<double>(p - 1)) / K;
}

Eigen::VectorXd min_norm_lsq(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                             double tol_rank) {
  if (M.rows() != b.size()) {
    throw DimensionError("min_norm_lsq: matrix has " + std::to_string(M.rows()) +
                         " rows but b has " + std::to_string(b.size()) +
                         " entries");
  }
  if (M.rows() == 0 || M.cols() == 0) {
    return Eigen::VectorXd::Zero(M.cols());
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (tol_rank < 0.0) {
    tol_rank = default_rank_tol(sigma(0), static_cast<int>(M.rows()),
                                static_cast<int>(M.cols()));
  }

  Eigen::VectorXd coeffs = svd.matrixU().transpose() * b;
  for (int i = 0; i < sigma.size(); ++i) {
    coeffs(i) = sigma(i) > tol_rank ? coeffs(i) / sigma(i) : 0.0;
  }
  return svd.matrixV() * coeffs;
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& M, double tol_rank) {
  const int c = static_cast<int>(M.cols());
  if (M.rows() == 0) {
    return Eigen::MatrixXd::Identity(c, c);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (tol_rank < 0.0) {
    tol_rank = default_rank_tol(sigma(0), static_cast<int>(M.rows()), c);
  }
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol_rank) ++rank;
  }
  return svd.matrixV().rightCols(c - rank);
}

double max_eig_sym(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) {
    throw DimensionError("max_eig_sym requires a square matrix");
  }
  if (S.rows() == 0) return -kInf;

  const double asym = (S - S.transpose()).norm();
  if (asym > 1e-12 * S.norm()) {
    throw DimensionError("max_eig_sym: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace ctkkt
