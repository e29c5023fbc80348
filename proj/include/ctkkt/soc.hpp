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

// Second-order necessary condition: at every grid node the Lagrangian
// Hessian, projected onto the tangent space of the active constraints, must
// be negative semidefinite. The pointwise matrix condition is the checkable
// surrogate of the integral form over all bounded tangent fields; test
// fields localize to arbitrary positive-measure subsets, so the two agree
// almost everywhere. The integral form is additionally sampled in the test
// suite.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ctkkt/certify.hpp"
#include "ctkkt/problem.hpp"

namespace ctkkt {

struct SocOptions {
  double tol_psd_rel = 1e-8;  // per-node threshold 1e-8 * (1 + ||H||)
  double eps_act = -1.0;
  // Nodes whose first-order residual exceeds the stationarity tolerance are
  // excluded (the projected-Hessian test presumes stationarity).
  double stationarity_tol = kDefaultStationarityTol;
  static constexpr double kDefaultStationarityTol = -1.0;  // taken from certificate
};

struct SecondOrderCertificate {
  struct NodeResult {
    int node = 0;
    double t = 0.0;
    int tangent_dim = 0;
    double max_eigenvalue = 0.0;  // -inf when tangent_dim == 0
    bool vacuous = false;
    bool skipped = false;  // first-order residual too large at this node
    bool pass = false;
  };

  std::vector<NodeResult> nodes;
  double worst_eigenvalue = 0.0;  // max over non-vacuous checked nodes; -inf if none
  int worst_node = -1;
  double worst_t = 0.0;
  int vacuous_nodes = 0;
  int skipped_nodes = 0;
  int checked_nodes = 0;
  // Nodes where widening the active band by 10x changes the active set; the
  // tangent space there is sensitive to the banding choice.
  int active_set_sensitive_nodes = 0;
  double tol_psd = 0.0;  // threshold at the worst node
  bool pass = false;
};

/// Weighted Hessian of the Lagrangian:
///   hess_phi + sum_i u_i hess_h_i + sum_j v_j hess_g_j.
Eigen::MatrixXd lagrangian_hessian(const PointEval& pe, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v);

/// Orthonormal basis of the tangent space: the null space of the stacked
/// equality and active inequality gradients. Full identity basis when there
/// are no constraint rows.
Eigen::MatrixXd tangent_basis(const PointEval& pe);

/// Projected-Hessian sweep over the grid using the multipliers of a passing
/// first-order certificate. Throws Error when the certificate carries no
/// multipliers.
SecondOrderCertificate second_order_certificate(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const FirstOrderCertificate& first_order, const SocOptions& options = {});

}  // namespace ctkkt
