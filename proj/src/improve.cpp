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

#include "ctkkt/improve.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ctkkt/linalg.hpp"
#include "ctkkt/soc.hpp"

namespace ctkkt {

Eigen::VectorXd increase_direction(const PointEval& pe, int k) {
  const int n = pe.n();
  const int p = pe.p();
  const int m = pe.m();
  if (k < 0 || k >= m) {
    throw Error("increase_direction: constraint index out of range");
  }
  if (!pe.is_active(k)) {
    throw Error("increase_direction: constraint " + std::to_string(k + 1) +
                " is not active");
  }

  // The slack-form system with active slacks pinned to zero: active rows
  // must be raised through the state, not through their slack.
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(p + m, n + m);
  Y.topLeftCorner(p, n) = pe.grad_h;
  Y.block(p, 0, m, n) = pe.grad_g;
  for (int j = 0; j < m; ++j) {
    const double w = pe.is_active(j) ? 0.0 : std::sqrt(std::max(pe.g(j), 0.0));
    Y(p + j, n + j) = -2.0 * w;
  }

  const GramReport gram = gram_det(Y);
  if (gram.rank < p + m) {
    throw Error("increase_direction: slack-form Jacobian is rank deficient at t=" +
                std::to_string(pe.t));
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + m);
  b(p + k) = 1.0;
  const Eigen::VectorXd full = min_norm_lsq(Y, b);
  return full.head(n);
}

double ascent_integral(const ProblemEvaluator& evaluator,
                       const Trajectory& trajectory,
                       const Eigen::MatrixXd& direction) {
  const int N = trajectory.grid.size();
  if (direction.rows() != N || direction.cols() != evaluator.problem().n) {
    throw DimensionError("ascent_integral: direction shape mismatch");
  }
  Eigen::VectorXd values(N);
  for (int k = 0; k < N; ++k) {
    const FirstOrderEval fe = evaluator.evaluate_first_order(
        trajectory.values.row(k).transpose(), trajectory.grid.nodes(k));
    values(k) = fe.grad_phi.dot(direction.row(k).transpose());
  }
  return integrate(trajectory.grid, values);
}

namespace {

// Backtracking search over tau in {sigma0, sigma0/2, ...}: the first step
// whose perturbed trajectory stays feasible and gains at least tol_gain
// yields a witness.
std::optional<RefutationWitness> line_search(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const Eigen::MatrixXd& direction, double objective_before,
    const RefuteOptions& options, std::string source, int constraint,
    double ascent) {
  double tau = options.sigma0;
  for (int attempt = 0; attempt <= options.max_halvings; ++attempt, tau *= 0.5) {
    Trajectory candidate(trajectory.grid, trajectory.values + tau * direction);
    FeasibilityReport feas =
        check_feasibility(evaluator, candidate, options.tol_eq, options.tol_ineq);
    if (!feas.pass) continue;
    const double objective_after = evaluator.objective_value(candidate);
    const double gain = objective_after - objective_before;
    if (gain <= options.tol_gain) continue;

    RefutationWitness witness;
    witness.source = std::move(source);
    witness.constraint = constraint;
    witness.direction = direction;
    witness.direction_sup_norm = direction.cwiseAbs().maxCoeff();
    witness.ascent_integral = ascent;
    witness.step = tau;
    witness.improved = std::move(candidate);
    witness.objective_before = objective_before;
    witness.objective_after = objective_after;
    witness.objective_gain = gain;
    witness.improved_feasibility = std::move(feas);
    // Soundness gate: every returned witness is feasible and strictly better.
    if (!(witness.objective_gain > 0.0) || !witness.improved_feasibility.pass) {
      throw Error("internal: unsound refutation witness");
    }
    return witness;
  }
  return std::nullopt;
}

}  // namespace

std::optional<RefutationWitness> refute_optimality(const ProblemEvaluator& evaluator,
                                                   const Trajectory& trajectory,
                                                   const RefuteOptions& options) {
  const Problem& problem = evaluator.problem();
  const int n = problem.n;
  const int m = problem.m();
  const int N = trajectory.grid.size();

  const FeasibilityReport feas =
      check_feasibility(evaluator, trajectory, options.tol_eq, options.tol_ineq);
  if (!feas.pass) {
    throw Error("refute_optimality requires a feasible candidate trajectory");
  }

  const double objective_before = evaluator.objective_value(trajectory);

  std::vector<PointEval> evals;
  evals.reserve(static_cast<size_t>(N));
  for (int k = 0; k < N; ++k) {
    evals.push_back(evaluator.evaluate(trajectory.values.row(k).transpose(),
                                       trajectory.grid.nodes(k), options.eps_act));
  }

  // Source 1: negative multipliers. For each constraint whose multiplier
  // falls below -tol_sign somewhere, build the raising direction on those
  // nodes and zero elsewhere.
  for (int k_constraint = 0; k_constraint < m; ++k_constraint) {
    Eigen::MatrixXd direction = Eigen::MatrixXd::Zero(N, n);
    bool violated = false;
    bool solvable = true;
    for (int k = 0; k < N; ++k) {
      const KktPointResult kkt = kkt_multipliers(evals[static_cast<size_t>(k)]);
      if (kkt.v.size() <= k_constraint ||
          kkt.v(k_constraint) >= -options.tol_sign) {
        continue;
      }
      violated = true;
      try {
        direction.row(k) =
            increase_direction(evals[static_cast<size_t>(k)], k_constraint)
                .transpose();
      } catch (const Error&) {
        solvable = false;
        break;
      }
    }
    if (!violated || !solvable) continue;

    const double ascent = ascent_integral(evaluator, trajectory, direction);
    if (ascent <= options.tol_ascent) continue;
    auto witness =
        line_search(evaluator, trajectory, direction, objective_before, options,
                    "negative_multiplier", k_constraint, ascent);
    if (witness) return witness;
  }

  // Source 2: the stationarity residual projected onto the tangent space,
  // normalized to unit sup-norm.
  {
    Eigen::MatrixXd direction(N, n);
    for (int k = 0; k < N; ++k) {
      const Eigen::MatrixXd basis = tangent_basis(evals[static_cast<size_t>(k)]);
      direction.row(k) =
          (basis * (basis.transpose() * evals[static_cast<size_t>(k)].grad_phi))
              .transpose();
    }
    const double sup = direction.cwiseAbs().maxCoeff();
    if (sup > 0.0) {
      direction /= sup;
      const double ascent = ascent_integral(evaluator, trajectory, direction);
      if (ascent > options.tol_ascent) {
        auto witness =
            line_search(evaluator, trajectory, direction, objective_before,
                        options, "residual_direction", -1, ascent);
        if (witness) return witness;
      }
    }
  }

  return std::nullopt;
}

}  // namespace ctkkt
