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

// Candidate trajectories by separability: the constraints and the integrand
// are pointwise in t, so the problem decomposes into independent
// finite-dimensional maximizations at each grid node. Each node is solved by
// a multi-start augmented-Lagrangian outer loop with a bounded-step BFGS
// inner loop. Per-node and per-start seeds are derived from the global seed,
// so results are bit-reproducible and adding starts never loses a solution
// already found.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "ctkkt/certify.hpp"
#include "ctkkt/improve.hpp"
#include "ctkkt/problem.hpp"
#include "ctkkt/soc.hpp"

namespace ctkkt {

struct SolveOptions {
  int starts = 16;                 // fresh random starts per node
  std::uint64_t seed = 0;
  double box_half_width = 5.0;     // random starts uniform in [-w, w]^n
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
  int outer_iterations = 8;
  double inner_grad_tol = 1e-10;
  int inner_max_iterations = 250;
  double max_step_norm = 1.0;      // bound on each inner quasi-Newton step
  double feasibility_tol = 1e-6;   // acceptance filter for candidate maximizers
  double tie_tol_rel = 1e-9;       // equal-objective ties -> lexicographic min
};

/// Best feasible local maximizer of phi(., t) subject to h = 0, g >= 0,
/// found across the warm start (when given) and `starts` random starts.
/// Deterministic in (options.seed, node_index). Throws SolveError with the
/// best infeasibility attained when no start reaches feasibility.
Eigen::VectorXd solve_pointwise(const ProblemEvaluator& evaluator, double t,
                                const SolveOptions& options,
                                std::uint64_t node_index = 0,
                                const Eigen::VectorXd* warm_start = nullptr);

struct TrajectorySolveResult {
  Trajectory trajectory;
  std::vector<std::uint8_t> solved;  // per-node success mask
  bool all_solved = false;
  double best_infeasibility = 0.0;   // over failed nodes
};

/// Solves every node, warm-starting each from the previous node's solution.
/// Failed nodes keep the warm start (or zero) and are flagged in the mask.
TrajectorySolveResult solve_trajectory(const ProblemEvaluator& evaluator,
                                       const TimeGrid& grid,
                                       const SolveOptions& options);

struct CertifiedSolveResult {
  Trajectory trajectory;
  double objective = 0.0;
  FirstOrderCertificate first_order;
  SecondOrderCertificate second_order;
  std::optional<RefutationWitness> refutation;
};

/// solve_trajectory, then certify; refutation is attempted when
/// certification fails. Throws SolveError when any node fails.
CertifiedSolveResult certified_solve(const ProblemEvaluator& evaluator,
                                     const TimeGrid& grid,
                                     const SolveOptions& solve_options = {},
                                     const CertifyOptions& certify_options = {},
                                     const SocOptions& soc_options = {},
                                     const RefuteOptions& refute_options = {});

}  // namespace ctkkt
