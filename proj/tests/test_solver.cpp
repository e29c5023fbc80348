#include <doctest.h>

#include <cmath>

#include "ctkkt/errors.hpp"
#include "ctkkt/solver.hpp"
#include "testutil.hpp"

using namespace ctkkt;
using ctkkt_test::load_fixture;

namespace {

Problem make_problem(const std::string& objective,
                     const std::vector<std::string>& equalities,
                     const std::vector<std::string>& inequalities, int n,
                     double T = 1.0) {
  Problem problem;
  problem.name = "test";
  problem.n = n;
  problem.horizon = T;
  problem.objective = parse_expr(objective, n);
  problem.objective_text = objective;
  for (const auto& text : equalities) {
    problem.equality.push_back(parse_expr(text, n));
    problem.equality_text.push_back(text);
  }
  for (const auto& text : inequalities) {
    problem.inequality.push_back(parse_expr(text, n));
    problem.inequality_text.push_back(text);
  }
  return problem;
}

}  // namespace

TEST_CASE("solve_pointwise: fixture optima") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator1(ex1.problem);
  SolveOptions options;
  options.seed = 1;

  for (double t : {0.0, 0.5, 1.0}) {
    const Eigen::VectorXd z = solve_pointwise(evaluator1, t, options);
    CHECK(z.cwiseAbs().maxCoeff() <= 1e-4);
  }

  const LoadResult ex2 = load_fixture("ex2.ctp");
  const ProblemEvaluator evaluator2(ex2.problem);
  const Eigen::VectorXd z2 = solve_pointwise(evaluator2, 0.25, options);
  CHECK((z2 - Eigen::VectorXd::Constant(3, 1.0)).cwiseAbs().maxCoeff() <= 1e-4);

  const Problem vertex = make_problem("-(z1 - 3)^2", {}, {}, 1);
  const ProblemEvaluator evaluator3(vertex);
  const Eigen::VectorXd z3 = solve_pointwise(evaluator3, 0.0, options);
  CHECK(std::abs(z3(0) - 3.0) <= 1e-6);
}

TEST_CASE("solve_pointwise: infeasible fixture errors with best attempt") {
  const LoadResult fixture = load_fixture("infeasible.ctp");
  const ProblemEvaluator evaluator(fixture.problem);
  SolveOptions options;
  options.starts = 4;
  try {
    solve_pointwise(evaluator, 0.0, options);
    FAIL("expected SolveError");
  } catch (const SolveError& err) {
    CHECK(err.best_infeasibility() >= 0.9);  // g1 <= -1 everywhere
  }
}

TEST_CASE("solve_trajectory: constant and time-varying problems") {
  SolveOptions options;
  options.seed = 7;
  options.starts = 8;
  const TimeGrid grid = build_grid(1.0, 9);

  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TrajectorySolveResult result = solve_trajectory(evaluator, grid, options);
  CHECK(result.all_solved);
  CHECK(result.trajectory.values.cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(std::abs(evaluator.objective_value(result.trajectory)) <= 1e-7);
  CHECK(check_feasibility(evaluator, result.trajectory, 1e-6, 1e-6).pass);

  const Problem tracking = make_problem("-(z1 - t)^2", {}, {}, 1);
  const ProblemEvaluator evaluator2(tracking);
  const TrajectorySolveResult tracked = solve_trajectory(evaluator2, grid, options);
  CHECK(tracked.all_solved);
  for (int k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(tracked.trajectory.values(k, 0) - grid.nodes(k)) <= 1e-6);
  }
}

TEST_CASE("determinism: identical seeds give bit-identical trajectories") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 7);
  SolveOptions options;
  options.seed = 12345;
  options.starts = 6;

  const TrajectorySolveResult a = solve_trajectory(evaluator, grid, options);
  const TrajectorySolveResult b = solve_trajectory(evaluator, grid, options);
  REQUIRE(a.all_solved);
  REQUIRE(b.all_solved);
  for (int k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      CHECK(a.trajectory.values(k, i) == b.trajectory.values(k, i));
    }
  }
}

TEST_CASE("monotonicity: more starts never lose the best objective") {
  // The feasible set of ex1 has a second basin near (-2,-2); best-of
  // selection must keep the better value as starts grow.
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);

  double previous = -std::numeric_limits<double>::infinity();
  for (int starts : {1, 2, 4, 8, 16}) {
    SolveOptions options;
    options.seed = 3;
    options.starts = starts;
    const Eigen::VectorXd z = solve_pointwise(evaluator, 0.0, options);
    const double phi = evaluator.evaluate_first_order(z, 0.0).phi;
    CHECK(phi >= previous - 1e-12);
    previous = phi;
  }
}

TEST_CASE("certified_solve: composition on fixtures") {
  SolveOptions options;
  options.seed = 5;
  options.starts = 8;
  const TimeGrid grid = build_grid(1.0, 9);

  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const CertifiedSolveResult result = certified_solve(evaluator, grid, options);
  CHECK(result.first_order.pass);
  CHECK(result.second_order.pass);
  CHECK_FALSE(result.refutation.has_value());
  CHECK(std::abs(result.objective) <= 1e-7);

  const LoadResult ex2 = load_fixture("ex2.ctp");
  const ProblemEvaluator evaluator2(ex2.problem);
  const CertifiedSolveResult result2 = certified_solve(evaluator2, grid, options);
  CHECK_FALSE(result2.first_order.cq_pass);
  CHECK_FALSE(result2.refutation.has_value());
  CHECK((result2.trajectory.values.rowwise() -
         Eigen::RowVector3d(1.0, 1.0, 1.0))
            .cwiseAbs()
            .maxCoeff() <= 1e-4);

  const LoadResult infeasible = load_fixture("infeasible.ctp");
  const ProblemEvaluator evaluator3(infeasible.problem);
  CHECK_THROWS_AS(certified_solve(evaluator3, grid, options), SolveError);
}
