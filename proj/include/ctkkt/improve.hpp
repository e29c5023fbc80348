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

// Optimality refutation. A candidate is disproved by exhibiting a bounded
// direction field with positive ascent integral and a step along it that
// keeps feasibility while strictly increasing the objective. Two
// constructive direction sources are tried:
//   1. for an inequality whose multiplier goes negative on a node set D,
//      the direction that raises that constraint while staying tangent to
//      all other active constraints, zeroed outside D;
//   2. the projection of grad phi onto the tangent space of the active
//      constraints (nonzero exactly when stationarity fails).
// On a grid, "a set of positive measure" is approximated by "at least one
// node".

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "ctkkt/certify.hpp"
#include "ctkkt/problem.hpp"

namespace ctkkt {

struct RefuteOptions {
  double sigma0 = 1.0;       // initial line-search step
  int max_halvings = 30;
  double tol_gain = 1e-10;   // required objective improvement
  double tol_sign = 1e-8;    // multiplier negativity threshold
  double tol_ascent = 1e-10; // required ascent-integral positivity
  double tol_eq = 1e-8;      // feasibility of the improved trajectory
  double tol_ineq = 1e-8;
  double eps_act = -1.0;
};

/// A feasible strictly-better trajectory, proving the candidate is not a
/// local maximizer. Soundness (feasibility and gain > 0) is asserted before
/// any witness is returned.
struct RefutationWitness {
  std::string source;           // "negative_multiplier" or "residual_direction"
  int constraint = -1;          // 0-based index for the multiplier source
  Eigen::MatrixXd direction;    // N x n
  double direction_sup_norm = 0.0;
  double ascent_integral = 0.0;
  double step = 0.0;            // accepted tau
  Trajectory improved;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double objective_gain = 0.0;  // > 0
  FeasibilityReport improved_feasibility;
};

/// Direction that raises active constraint k at unit rate while staying
/// tangent to every other active constraint: the state part of the
/// minimal-norm solution of the slack-form system with unit right-hand side
/// in row k. Requires k active and the slack-form Jacobian full row rank.
Eigen::VectorXd increase_direction(const PointEval& pe, int k);

/// Trapezoid integral of <grad phi(z(t),t), direction(t)> over the grid.
double ascent_integral(const ProblemEvaluator& evaluator,
                       const Trajectory& trajectory,
                       const Eigen::MatrixXd& direction);

/// Tries the two direction sources with a backtracking line search.
/// Returns nullopt when no sound witness is found. Throws Error when the
/// input trajectory is infeasible.
std::optional<RefutationWitness> refute_optimality(
    const ProblemEvaluator& evaluator, const Trajectory& trajectory,
    const RefuteOptions& options = {});

}  // namespace ctkkt
