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

// First-order certification: constraint-qualification diagnostics, multiplier
// computation (closed form and least squares), stationarity, complementarity
// and sign residuals, and multiplier boundedness.
//
// The regularity diagnostics quantify full row rank by a floor on the Gram
// determinant over the horizon:
//   H4          det(Dh Dh') on the equality gradients,
//   H7          det(Y Y') on the slack-form Jacobian Y (slack_jacobian below),
//   LICQ-active det on the stacked equality and active inequality gradients.
// Multipliers exist and are unique under these conditions; without them the
// minimal-norm representative is reported and flagged.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ctkkt/errors.hpp"
#include "ctkkt/linalg.hpp"
#include "ctkkt/problem.hpp"

namespace ctkkt {

/// Multiplier trajectories u (equalities) and v (inequalities) per grid node.
struct MultiplierTrajectory {
  Eigen::MatrixXd u;  // N x p
  Eigen::MatrixXd v;  // N x m
};

/// Gram-determinant diagnostic of one regularity condition over the grid.
struct CQReport {
  enum class Kind { kH4, kH7, kLicqActive };

  Kind kind = Kind::kH4;
  std::vector<double> node_det;       // det(Gram) per node; empty when vacuous
  std::vector<int> node_rank;
  std::vector<int> node_active_count; // cardinality of the active set per node
  double infimum = 0.0;               // +inf sentinel when vacuous
  int worst_node = -1;
  double worst_t = 0.0;
  int rank_min = 0;
  int rank_max = 0;
  double k_min = 0.0;                 // determinant floor tested against
  bool vacuous = false;               // no constraint rows anywhere
  bool pass = false;
};

const char* to_string(CQReport::Kind kind);

struct CertifyOptions {
  double k_min = 1e-8;      // determinant floor for the regularity diagnostics
  double tol_sign = 1e-8;   // v_j >= -tol_sign
  double tol_stat = -1.0;   // absolute; < 0 selects 1e-7 * (1 + sup ||grad phi||)
  double tol_comp = -1.0;   // absolute; < 0 selects the same relative rule
  double tol_eq = 1e-8;     // feasibility
  double tol_ineq = 1e-8;
  double eps_act = -1.0;    // active-set band; < 0 selects the per-point default
};

/// CQ failure while computing equality multipliers; carries the offending
/// node's Gram diagnostics.
class CqFailureError : public Error {
 public:
  CqFailureError(const std::string& message, GramReport gram)
      : Error(message), gram_(std::move(gram)) {}
  const GramReport& gram() const noexcept { return gram_; }

 private:
  GramReport gram_;
};

/// Closed-form equality multipliers
///   u = -(Dh Dh')^{-1} Dh grad_phi,
/// computed as the least-squares solution of Dh' u = -grad_phi. Requires
/// numerically full row rank; throws CqFailureError otherwise.
Eigen::VectorXd equality_multipliers(const PointEval& pe);

/// Jacobian of the slack-form constraint system (h, g - w^2) in the
/// variables (z, w), evaluated with w_j = sqrt(max(g_j, 0)):
///
///   [ Dh  0            ]
///   [ Dg  diag(-2 w_j) ]        ((p+m) x (n+m))
///
/// Throws Error when some g_j < -tol_ineq (strongly infeasible point).
Eigen::MatrixXd slack_jacobian(const PointEval& pe, double tol_ineq = 1e-8);

CQReport check_h4(const ProblemEvaluator& evaluator, const Trajectory& trajectory,
                  double k_min = 1e-8);
CQReport check_h7(const ProblemEvaluator& evaluator, const Trajectory& trajectory,
                  double k_min = 1e-8, double tol_ineq = 1e-8);
CQReport check_licq_active(const ProblemEvaluator& evaluator,
                           const Trajectory& trajectory, double k_min = 1e-8,
                           double eps_act = -1.0);

/// KKT multipliers at one point via active-set reduction: solve
/// [Dh' Dg_A'] (u, v_A) = -grad_phi in the least-squares sense and pin
/// v_j = 0 off the active set. `unique` is false when the active gradients
/// are rank deficient (minimal-norm representative returned).
struct KktPointResult {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double stationarity_residual = 0.0;
  bool unique = true;
};
KktPointResult kkt_multipliers(const PointEval& pe);

/// Aggregated first-order verdict over a trajectory.
struct FirstOrderCertificate {
  FeasibilityReport feasibility;
  CQReport h4;
  CQReport h7;
  CQReport licq_active;
  std::optional<MultiplierTrajectory> multipliers;  // absent when infeasible

  double max_stationarity_residual = 0.0;
  std::vector<double> node_stationarity_residual;
  double max_complementarity = 0.0;  // max over nodes, j of |v_j * g_j|
  double min_multiplier = 0.0;       // min over nodes, j of v_j; +inf when m = 0
  double sup_norm_u = 0.0;           // sup over nodes of ||u(t)||
  double sup_norm_v = 0.0;
  int nonunique_nodes = 0;

  // Proved essential bound on the multipliers: M * K0 * Kphi with
  // M = inverse_norm_bound(inf gram det, sup gram norm, gram dim),
  // K0 = sup_t ||D[h,g](t)||, Kphi = sup_t ||grad phi(t)||. +inf when the
  // regularity infimum is not positive.
  double multiplier_bound = 0.0;
  bool bound_holds = false;

  double tol_stat = 0.0;
  double tol_comp = 0.0;
  double tol_sign = 0.0;
  double sup_grad_phi = 0.0;  // Kphi

  bool cq_pass = false;
  bool stationarity_pass = false;
  bool sign_pass = false;
  bool complementarity_pass = false;
  bool pass = false;
};

FirstOrderCertificate first_order_certificate(const ProblemEvaluator& evaluator,
                                              const Trajectory& trajectory,
                                              const CertifyOptions& options = {});

/// Specialization for problems with no constraints: requires grad phi = 0
/// and a negative semidefinite Hessian of phi at every node.
struct UnconstrainedCertificate {
  double max_grad_norm = 0.0;
  int worst_grad_node = -1;
  double worst_eigenvalue = 0.0;
  int worst_eig_node = -1;
  double tol_stat = 0.0;
  double tol_psd = 0.0;
  bool first_order_pass = false;
  bool second_order_pass = false;
  bool pass = false;
};

UnconstrainedCertificate unconstrained_certificate(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const CertifyOptions& options = {});

}  // namespace ctkkt
