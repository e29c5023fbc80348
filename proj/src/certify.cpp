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

#include "ctkkt/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctkkt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

Eigen::MatrixXd stacked_constraint_gradients(const PointEval& pe) {
  Eigen::MatrixXd stacked(pe.p() + pe.m(), pe.n());
  stacked.topRows(pe.p()) = pe.grad_h;
  stacked.bottomRows(pe.m()) = pe.grad_g;
  return stacked;
}

Eigen::MatrixXd active_stack(const PointEval& pe) {
  const int qa = static_cast<int>(pe.active.size());
  Eigen::MatrixXd stacked(pe.p() + qa, pe.n());
  stacked.topRows(pe.p()) = pe.grad_h;
  for (int a = 0; a < qa; ++a) {
    stacked.row(pe.p() + a) = pe.grad_g.row(pe.active[static_cast<size_t>(a)]);
  }
  return stacked;
}

// Sweeps gram_det over per-node matrices and aggregates the infimum.
CQReport gram_sweep(CQReport::Kind kind, const TimeGrid& grid,
                    const std::vector<Eigen::MatrixXd>& per_node,
                    const std::vector<int>& active_counts, double k_min) {
  CQReport report;
  report.kind = kind;
  report.k_min = k_min;
  report.node_active_count = active_counts;

  bool any_rows = false;
  for (const auto& M : per_node) {
    if (M.rows() > 0) any_rows = true;
  }
  if (!any_rows) {
    report.vacuous = true;
    report.infimum = kInf;
    report.pass = true;
    return report;
  }

  report.infimum = kInf;
  report.node_det.reserve(per_node.size());
  report.node_rank.reserve(per_node.size());
  for (size_t k = 0; k < per_node.size(); ++k) {
    const GramReport gram = gram_det(per_node[k]);
    report.node_det.push_back(gram.det);
    report.node_rank.push_back(gram.rank);
    if (gram.det < report.infimum) {
      report.infimum = gram.det;
      report.worst_node = static_cast<int>(k);
      report.worst_t = grid.nodes(static_cast<int>(k));
    }
  }
  report.rank_min = *std::min_element(report.node_rank.begin(), report.node_rank.end());
  report.rank_max = *std::max_element(report.node_rank.begin(), report.node_rank.end());
  report.pass = report.infimum >= k_min;
  return report;
}

}  // namespace

const char* to_string(CQReport::Kind kind) {
  switch (kind) {
    case CQReport::Kind::kH4: return "H4";
    case CQReport::Kind::kH7: return "H7";
    case CQReport::Kind::kLicqActive: return "LICQ-active";
  }
  return "?";
}

Eigen::VectorXd equality_multipliers(const PointEval& pe) {
  const int p = pe.p();
  if (p < 1) throw Error("equality_multipliers requires p >= 1");

  GramReport gram = gram_det(pe.grad_h);
  if (gram.rank < p) {
    throw CqFailureError(
        "equality gradients are rank deficient at t=" + std::to_string(pe.t) +
            " (rank " + std::to_string(gram.rank) + " of " + std::to_string(p) + ")",
        std::move(gram));
  }
  return min_norm_lsq(pe.grad_h.transpose(), -pe.grad_phi);
}

Eigen::MatrixXd slack_jacobian(const PointEval& pe, double tol_ineq) {
  const int n = pe.n();
  const int p = pe.p();
  const int m = pe.m();
  for (int j = 0; j < m; ++j) {
    if (pe.g(j) < -tol_ineq) {
      throw Error("slack_jacobian at an infeasible point: g" +
                  std::to_string(j + 1) + " = " + std::to_string(pe.g(j)));
    }
  }

  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(p + m, n + m);
  Y.topLeftCorner(p, n) = pe.grad_h;
  Y.block(p, 0, m, n) = pe.grad_g;
  for (int j = 0; j < m; ++j) {
    // Tiny negative values inside the feasibility tolerance are clamped.
    const double w = std::sqrt(std::max(pe.g(j), 0.0));
    Y(p + j, n + j) = -2.0 * w;
  }
  return Y;
}

CQReport check_h4(const ProblemEvaluator& evaluator, const Trajectory& trajectory,
                  double k_min) {
  const int N = trajectory.grid.size();
  std::vector<Eigen::MatrixXd> mats;
  std::vector<int> counts;
  mats.reserve(static_cast<size_t>(N));
  counts.reserve(static_cast<size_t>(N));
  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k));
    mats.push_back(pe.grad_h);
    counts.push_back(static_cast<int>(pe.active.size()));
  }
  return gram_sweep(CQReport::Kind::kH4, trajectory.grid, mats, counts, k_min);
}

CQReport check_h7(const ProblemEvaluator& evaluator, const Trajectory& trajectory,
                  double k_min, double tol_ineq) {
  const int N = trajectory.grid.size();
  std::vector<Eigen::MatrixXd> mats;
  std::vector<int> counts;
  mats.reserve(static_cast<size_t>(N));
  counts.reserve(static_cast<size_t>(N));
  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k));
    mats.push_back(slack_jacobian(pe, tol_ineq));
    counts.push_back(static_cast<int>(pe.active.size()));
  }
  return gram_sweep(CQReport::Kind::kH7, trajectory.grid, mats, counts, k_min);
}

CQReport check_licq_active(const ProblemEvaluator& evaluator,
                           const Trajectory& trajectory, double k_min,
                           double eps_act) {
  const int N = trajectory.grid.size();
  std::vector<Eigen::MatrixXd> mats;
  std::vector<int> counts;
  mats.reserve(static_cast<size_t>(N));
  counts.reserve(static_cast<size_t>(N));
  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k), eps_act);
    mats.push_back(active_stack(pe));
    counts.push_back(static_cast<int>(pe.active.size()));
  }
  return gram_sweep(CQReport::Kind::kLicqActive, trajectory.grid, mats, counts, k_min);
}

KktPointResult kkt_multipliers(const PointEval& pe) {
  const int p = pe.p();
  const int m = pe.m();
  const int qa = static_cast<int>(pe.active.size());

  KktPointResult result;
  result.u.resize(p);
  result.v = Eigen::VectorXd::Zero(m);

  const Eigen::MatrixXd B = active_stack(pe);  // (p+qa) x n
  if (B.rows() == 0) {
    result.stationarity_residual = pe.grad_phi.norm();
    return result;
  }

  const Eigen::VectorXd x = min_norm_lsq(B.transpose(), -pe.grad_phi);
  result.u = x.head(p);
  for (int a = 0; a < qa; ++a) {
    result.v(pe.active[static_cast<size_t>(a)]) = x(p + a);
  }
  result.stationarity_residual = (pe.grad_phi + B.transpose() * x).norm();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double tol = default_rank_tol(sigma(0), static_cast<int>(B.rows()),
                                      static_cast<int>(B.cols()));
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++rank;
  }
  result.unique = rank == B.rows();
  return result;
}

FirstOrderCertificate first_order_certificate(const ProblemEvaluator& evaluator,
                                              const Trajectory& trajectory,
                                              const CertifyOptions& options) {
  const Problem& problem = evaluator.problem();
  const int p = problem.p();
  const int m = problem.m();
  const int N = trajectory.grid.size();

  FirstOrderCertificate cert;
  cert.tol_sign = options.tol_sign;
  cert.feasibility =
      check_feasibility(evaluator, trajectory, options.tol_eq, options.tol_ineq);
  cert.min_multiplier = kInf;  // stays +inf when m = 0

  if (!cert.feasibility.pass) {
    // No multipliers for infeasible candidates; the slack-form Jacobian is
    // undefined there, so the regularity sweeps are skipped as well.
    cert.h4.kind = CQReport::Kind::kH4;
    cert.h7.kind = CQReport::Kind::kH7;
    cert.licq_active.kind = CQReport::Kind::kLicqActive;
    cert.tol_stat = options.tol_stat >= 0.0 ? options.tol_stat : 0.0;
    cert.tol_comp = options.tol_comp >= 0.0 ? options.tol_comp : 0.0;
    cert.pass = false;
    return cert;
  }

  MultiplierTrajectory multipliers;
  multipliers.u.resize(N, p);
  multipliers.v.resize(N, m);

  std::vector<Eigen::MatrixXd> h4_mats, h7_mats, licq_mats;
  std::vector<int> active_counts;
  h4_mats.reserve(static_cast<size_t>(N));
  h7_mats.reserve(static_cast<size_t>(N));
  licq_mats.reserve(static_cast<size_t>(N));
  active_counts.reserve(static_cast<size_t>(N));

  cert.node_stationarity_residual.resize(static_cast<size_t>(N));
  double sup_gram_norm = 0.0;  // spectral norm of the bounding Gram matrix
  double k0 = 0.0;

  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k), options.eps_act);
    const KktPointResult kkt = kkt_multipliers(pe);
    multipliers.u.row(k) = kkt.u.transpose();
    multipliers.v.row(k) = kkt.v.transpose();
    if (!kkt.unique) ++cert.nonunique_nodes;

    cert.node_stationarity_residual[static_cast<size_t>(k)] = kkt.stationarity_residual;
    cert.max_stationarity_residual =
        std::max(cert.max_stationarity_residual, kkt.stationarity_residual);
    for (int j = 0; j < m; ++j) {
      cert.max_complementarity =
          std::max(cert.max_complementarity, std::abs(kkt.v(j) * pe.g(j)));
      cert.min_multiplier = std::min(cert.min_multiplier, kkt.v(j));
    }
    cert.sup_norm_u = std::max(cert.sup_norm_u, kkt.u.norm());
    cert.sup_norm_v = std::max(cert.sup_norm_v, kkt.v.norm());
    cert.sup_grad_phi = std::max(cert.sup_grad_phi, pe.grad_phi.norm());
    k0 = std::max(k0, spectral_norm(stacked_constraint_gradients(pe)));

    h4_mats.push_back(pe.grad_h);
    const Eigen::MatrixXd Y = slack_jacobian(pe, options.tol_ineq);
    sup_gram_norm = std::max(
        sup_gram_norm,
        m > 0 ? std::pow(spectral_norm(Y), 2) : std::pow(spectral_norm(pe.grad_h), 2));
    h7_mats.push_back(Y);
    licq_mats.push_back(active_stack(pe));
    active_counts.push_back(static_cast<int>(pe.active.size()));
  }

  cert.h4 = gram_sweep(CQReport::Kind::kH4, trajectory.grid, h4_mats, active_counts,
                       options.k_min);
  cert.h7 = gram_sweep(CQReport::Kind::kH7, trajectory.grid, h7_mats, active_counts,
                       options.k_min);
  cert.licq_active = gram_sweep(CQReport::Kind::kLicqActive, trajectory.grid,
                                licq_mats, active_counts, options.k_min);
  cert.multipliers = std::move(multipliers);

  cert.tol_stat = options.tol_stat >= 0.0 ? options.tol_stat
                                          : 1e-7 * (1.0 + cert.sup_grad_phi);
  cert.tol_comp = options.tol_comp >= 0.0 ? options.tol_comp
                                          : 1e-7 * (1.0 + cert.sup_grad_phi);

  // Essential multiplier bound from the regularity infimum.
  const CQReport& bound_cq = m > 0 ? cert.h7 : cert.h4;
  const int gram_dim = m > 0 ? p + m : p;
  if (gram_dim == 0) {
    cert.multiplier_bound = 0.0;
    cert.bound_holds = true;
  } else if (bound_cq.infimum > 0.0 && std::isfinite(bound_cq.infimum) &&
             sup_gram_norm > 0.0) {
    const double M = inverse_norm_bound(bound_cq.infimum, sup_gram_norm, gram_dim);
    cert.multiplier_bound = M * k0 * cert.sup_grad_phi;
    double sup_uv = 0.0;
    for (int k = 0; k < N; ++k) {
      const double norm_u2 = cert.multipliers->u.row(k).squaredNorm();
      const double norm_v2 = cert.multipliers->v.row(k).squaredNorm();
      sup_uv = std::max(sup_uv, std::sqrt(norm_u2 + norm_v2));
    }
    cert.bound_holds = sup_uv <= cert.multiplier_bound;
  } else {
    cert.multiplier_bound = kInf;
    cert.bound_holds = true;
  }

  cert.cq_pass = cert.h4.pass && cert.h7.pass;
  cert.stationarity_pass = cert.max_stationarity_residual <= cert.tol_stat;
  cert.sign_pass = m == 0 || cert.min_multiplier >= -options.tol_sign;
  cert.complementarity_pass = cert.max_complementarity <= cert.tol_comp;
  cert.pass = cert.feasibility.pass && cert.cq_pass && cert.stationarity_pass &&
              cert.sign_pass && cert.complementarity_pass;
  return cert;
}

UnconstrainedCertificate unconstrained_certificate(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const CertifyOptions& options) {
  const Problem& problem = evaluator.problem();
  if (problem.p() != 0 || problem.m() != 0) {
    throw Error("unconstrained_certificate requires a problem without constraints");
  }
  const int N = trajectory.grid.size();

  UnconstrainedCertificate cert;
  cert.worst_eigenvalue = -kInf;
  double sup_grad = 0.0;
  bool psd_ok = true;
  double worst_tol_psd = 0.0;
  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k));
    const double grad_norm = pe.grad_phi.norm();
    if (grad_norm > cert.max_grad_norm) {
      cert.max_grad_norm = grad_norm;
      cert.worst_grad_node = k;
    }
    sup_grad = std::max(sup_grad, grad_norm);

    const double lambda = max_eig_sym(pe.hess_phi);
    const double tol_psd = 1e-8 * (1.0 + pe.hess_phi.norm());
    if (lambda > cert.worst_eigenvalue) {
      cert.worst_eigenvalue = lambda;
      cert.worst_eig_node = k;
      worst_tol_psd = tol_psd;
    }
    if (lambda > tol_psd) psd_ok = false;
  }

  cert.tol_stat =
      options.tol_stat >= 0.0 ? options.tol_stat : 1e-7 * (1.0 + sup_grad);
  cert.tol_psd = worst_tol_psd;
  cert.first_order_pass = cert.max_grad_norm <= cert.tol_stat;
  cert.second_order_pass = psd_ok;
  cert.pass = cert.first_order_pass && cert.second_order_pass;
  return cert;
}

}  // namespace ctkkt
