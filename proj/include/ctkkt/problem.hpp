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

// Problem and trajectory data model: problem-file ingestion, time
// discretization, trapezoid quadrature, pointwise evaluation with exact
// derivatives, feasibility and active-set computation.
//
// A problem describes
//
//   maximize  integral over [0, T] of phi(z(t), t) dt
//   such that h_i(z(t), t)  = 0   for all i, a.e. t,
//             g_j(z(t), t) >= 0   for all j, a.e. t,
//
// over bounded measurable trajectories z : [0, T] -> R^n. Conditions are
// checked on a finite grid; violations confined to sets that miss every
// grid node are not detectable.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctkkt/expr.hpp"

namespace ctkkt {

struct Problem {
  std::string name;
  int n = 0;             // state dimension
  double horizon = 0.0;  // T

  Expr objective;
  std::vector<Expr> equality;    // h_1..h_p
  std::vector<Expr> inequality;  // g_1..g_m

  // Source text, preserved for reports and round-trip serialization.
  std::string objective_text;
  std::vector<std::string> equality_text;
  std::vector<std::string> inequality_text;

  int p() const { return static_cast<int>(equality.size()); }
  int m() const { return static_cast<int>(inequality.size()); }
};

/// Candidate trajectory given as expressions in t, one per state component.
struct CandidateExprs {
  std::vector<Expr> z;
  std::vector<std::string> z_text;
};

struct LoadResult {
  Problem problem;
  std::optional<CandidateExprs> candidate;
};

/// Parses the problem-file format (see docs/problem_format.md). Throws
/// FormatError with a 1-based line number on malformed input.
LoadResult load_problem(std::string_view text);
LoadResult load_problem_file(const std::string& path);

/// Serializes back to the problem-file format; load_problem(save_problem(x))
/// reproduces the data model.
std::string save_problem(const Problem& problem,
                         const CandidateExprs* candidate = nullptr);

// ---------------------------------------------------------------------------

/// Uniform grid on [0, T] with composite trapezoid quadrature weights.
struct TimeGrid {
  double horizon = 0.0;
  Eigen::VectorXd nodes;    // strictly increasing, nodes(0)=0, nodes(N-1)=T
  Eigen::VectorXd weights;  // sum to T

  int size() const { return static_cast<int>(nodes.size()); }
};

/// N >= 2 uniform nodes; weights (T/(N-1)) * (1/2, 1, ..., 1, 1/2).
TimeGrid build_grid(double horizon, int node_count);

/// Weighted sum of per-node values in ascending node order (bit-reproducible).
double integrate(const TimeGrid& grid, const Eigen::VectorXd& node_values);

/// Candidate z(.) sampled on a grid; row k is z(t_k).
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd values;  // size() x n
  std::optional<CandidateExprs> defining;  // set when sampled from expressions

  Trajectory() = default;
  Trajectory(TimeGrid grid_in, Eigen::MatrixXd values_in);
};

/// Samples candidate expressions (functions of t only) at the grid nodes.
Trajectory sample_candidate(const CandidateExprs& candidate, const TimeGrid& grid);

/// Constant-in-time trajectory z(t) = z0.
Trajectory constant_trajectory(const Eigen::VectorXd& z0, const TimeGrid& grid);

// ---------------------------------------------------------------------------

/// Everything the certification pipeline needs at one (z, t): values, exact
/// first and second derivatives, and the active inequality set.
struct PointEval {
  double t = 0.0;
  Eigen::VectorXd z;

  double phi = 0.0;
  Eigen::VectorXd grad_phi;  // n
  Eigen::MatrixXd hess_phi;  // n x n

  Eigen::VectorXd h;                    // p
  Eigen::MatrixXd grad_h;               // p x n, row i is the gradient of h_i
  std::vector<Eigen::MatrixXd> hess_h;  // p matrices, n x n

  Eigen::VectorXd g;                    // m
  Eigen::MatrixXd grad_g;               // m x n
  std::vector<Eigen::MatrixXd> hess_g;  // m matrices, n x n

  std::vector<int> active;  // 0-based indices j with g_j <= eps_act, ascending
  double eps_act = 0.0;

  int n() const { return static_cast<int>(z.size()); }
  int p() const { return static_cast<int>(h.size()); }
  int m() const { return static_cast<int>(g.size()); }
  bool is_active(int j) const;
};

/// First-order slice of PointEval, for solver inner loops.
struct FirstOrderEval {
  double phi = 0.0;
  Eigen::VectorXd grad_phi;
  Eigen::VectorXd h;
  Eigen::MatrixXd grad_h;
  Eigen::VectorXd g;
  Eigen::MatrixXd grad_g;
};

/// Binds a Problem to precomputed symbolic gradients and Hessians of every
/// expression, so repeated pointwise evaluation does not re-differentiate.
/// Immutable after construction; evaluation is pure.
class ProblemEvaluator {
 public:
  explicit ProblemEvaluator(Problem problem);

  const Problem& problem() const { return problem_; }

  /// Full evaluation. eps_act < 0 selects the default active-set band
  /// 1e-6 * (1 + max_j |g_j|) at the point.
  PointEval evaluate(const Eigen::VectorXd& z, double t, double eps_act = -1.0) const;

  FirstOrderEval evaluate_first_order(const Eigen::VectorXd& z, double t) const;

  /// Objective integral of a trajectory on its own grid.
  double objective_value(const Trajectory& trajectory) const;

 private:
  Problem problem_;
  std::vector<Expr> grad_phi_;
  std::vector<std::vector<Expr>> hess_phi_;
  std::vector<std::vector<Expr>> grad_h_;
  std::vector<std::vector<std::vector<Expr>>> hess_h_;
  std::vector<std::vector<Expr>> grad_g_;
  std::vector<std::vector<std::vector<Expr>>> hess_g_;
};

/// Convenience wrapper constructing a fresh evaluator; prefer
/// ProblemEvaluator when evaluating more than once.
PointEval evaluate_point(const Problem& problem, const Eigen::VectorXd& z,
                         double t, double eps_act = -1.0);

// ---------------------------------------------------------------------------

/// Worst-case constraint residuals of a trajectory across all grid nodes.
struct FeasibilityReport {
  struct Worst {
    int constraint = 0;  // 0-based
    int node = 0;
    double t = 0.0;
    double value = 0.0;
  };

  double max_abs_h = 0.0;  // 0 when p = 0
  double min_g = 0.0;      // +inf when m = 0
  std::vector<Worst> worst_equality;    // per h_i, node of max |h_i|
  std::vector<Worst> worst_inequality;  // per g_j, node of min g_j
  double tol_eq = 0.0;
  double tol_ineq = 0.0;
  bool pass = false;
};

FeasibilityReport check_feasibility(const ProblemEvaluator& evaluator,
                                    const Trajectory& trajectory,
                                    double tol_eq = 1e-8, double tol_ineq = 1e-8);

}  // namespace ctkkt
