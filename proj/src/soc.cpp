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

#include "ctkkt/soc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctkkt/linalg.hpp"

namespace ctkkt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd active_stack(const PointEval& pe) {
  const int qa = static_cast<int>(pe.active.size());
  Eigen::MatrixXd stacked(pe.p() + qa, pe.n());
  stacked.topRows(pe.p()) = pe.grad_h;
  for (int a = 0; a < qa; ++a) {
    stacked.row(pe.p() + a) = pe.grad_g.row(pe.active[static_cast<size_t>(a)]);
  }
  return stacked;
}

}  // namespace

Eigen::MatrixXd lagrangian_hessian(const PointEval& pe, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v) {
  if (u.size() != pe.p() || v.size() != pe.m()) {
    throw DimensionError("lagrangian_hessian: multiplier sizes (" +
                         std::to_string(u.size()) + "," + std::to_string(v.size()) +
                         ") do not match (p,m)=(" + std::to_string(pe.p()) + "," +
                         std::to_string(pe.m()) + ")");
  }
  Eigen::MatrixXd H = pe.hess_phi;
  for (int i = 0; i < pe.p(); ++i) {
    H += u(i) * pe.hess_h[static_cast<size_t>(i)];
  }
  for (int j = 0; j < pe.m(); ++j) {
    H += v(j) * pe.hess_g[static_cast<size_t>(j)];
  }
  return H;
}

Eigen::MatrixXd tangent_basis(const PointEval& pe) {
  return nullspace_basis(active_stack(pe));
}

SecondOrderCertificate second_order_certificate(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const FirstOrderCertificate& first_order, const SocOptions& options) {
  if (!first_order.multipliers.has_value()) {
    throw Error("second_order_certificate requires multipliers (feasible candidate)");
  }
  const int N = trajectory.grid.size();
  const MultiplierTrajectory& multipliers = *first_order.multipliers;

  const double stat_tol = options.stationarity_tol >= 0.0
                              ? options.stationarity_tol
                              : first_order.tol_stat;

  SecondOrderCertificate cert;
  cert.nodes.resize(static_cast<size_t>(N));
  cert.worst_eigenvalue = -kInf;
  bool all_pass = true;

  for (int k = 0; k < N; ++k) {
    const PointEval pe = evaluator.evaluate(trajectory.values.row(k).transpose(),
                                            trajectory.grid.nodes(k), options.eps_act);
    auto& node = cert.nodes[static_cast<size_t>(k)];
    node.node = k;
    node.t = trajectory.grid.nodes(k);

    if (k < static_cast<int>(first_order.node_stationarity_residual.size()) &&
        first_order.node_stationarity_residual[static_cast<size_t>(k)] > stat_tol) {
      node.skipped = true;
      node.max_eigenvalue = -kInf;
      ++cert.skipped_nodes;
      continue;
    }

    // Sensitivity of the active set to the banding choice.
    const PointEval pe_wide = evaluator.evaluate(
        trajectory.values.row(k).transpose(), trajectory.grid.nodes(k),
        10.0 * pe.eps_act);
    if (pe_wide.active != pe.active) ++cert.active_set_sensitive_nodes;

    const Eigen::MatrixXd basis = tangent_basis(pe);
    node.tangent_dim = static_cast<int>(basis.cols());
    if (node.tangent_dim == 0) {
      node.vacuous = true;
      node.pass = true;
      node.max_eigenvalue = -kInf;
      ++cert.vacuous_nodes;
      continue;
    }

    const Eigen::MatrixXd H = lagrangian_hessian(
        pe, multipliers.u.row(k).transpose(), multipliers.v.row(k).transpose());
    const Eigen::MatrixXd projected = basis.transpose() * H * basis;
    // Symmetrize: B'HB picks up rounding asymmetry from the two products.
    node.max_eigenvalue = max_eig_sym(0.5 * (projected + projected.transpose()));
    const double tol_psd = options.tol_psd_rel * (1.0 + H.norm());
    node.pass = node.max_eigenvalue <= tol_psd;
    ++cert.checked_nodes;
    if (node.max_eigenvalue > cert.worst_eigenvalue) {
      cert.worst_eigenvalue = node.max_eigenvalue;
      cert.worst_node = k;
      cert.worst_t = node.t;
      cert.tol_psd = tol_psd;
    }
    if (!node.pass) all_pass = false;
  }

  cert.pass = all_pass;
  return cert;
}

}  // namespace ctkkt
