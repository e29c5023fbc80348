#include <doctest.h>

#include <cmath>

#include "ctkkt/errors.hpp"
#include "ctkkt/improve.hpp"
#include "ctkkt/selftest.hpp"
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

TEST_CASE("increase_direction: examples") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const PointEval pe = evaluator.evaluate(Eigen::VectorXd::Zero(2), 0.0);

  const Eigen::VectorXd gamma = increase_direction(pe, 0);
  CHECK(gamma(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gamma(1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pe.grad_h.row(0).dot(gamma) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pe.grad_g.row(0).dot(gamma) == doctest::Approx(1.0).epsilon(1e-12));

  // h = z1, active g = z2: the raising direction is the second axis.
  const Problem axis = make_problem("0*z1", {"z1"}, {"z2"}, 2);
  const ProblemEvaluator evaluator2(axis);
  const PointEval pe2 = evaluator2.evaluate(Eigen::VectorXd::Zero(2), 0.0);
  const Eigen::VectorXd gamma2 = increase_direction(pe2, 0);
  CHECK(gamma2(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gamma2(1) == doctest::Approx(1.0).epsilon(1e-12));

  // Inactive constraint index is a precondition violation.
  const PointEval inside = evaluator.evaluate(Eigen::VectorXd::Constant(2, 1.0), 0.0);
  CHECK_THROWS_AS(increase_direction(inside, 0), Error);
  CHECK_THROWS_AS(increase_direction(pe, 5), Error);
}

TEST_CASE("ascent_integral: examples") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 21);

  const Trajectory origin = constant_trajectory(Eigen::VectorXd::Zero(2), grid);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(grid.size(), 2);
  CHECK(ascent_integral(evaluator, origin, ones) == doctest::Approx(0.0));

  const Trajectory at_one =
      constant_trajectory(Eigen::VectorXd::Constant(2, 1.0), grid);
  CHECK(ascent_integral(evaluator, at_one, -ones) == doctest::Approx(4.0));

  CHECK(ascent_integral(evaluator, at_one,
                        Eigen::MatrixXd::Zero(grid.size(), 2)) == 0.0);

  CHECK_THROWS_AS(
      ascent_integral(evaluator, origin, Eigen::MatrixXd::Zero(3, 2)),
      DimensionError);
}

TEST_CASE("refute_optimality: certified point yields none") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 21);
  const Trajectory origin = constant_trajectory(Eigen::VectorXd::Zero(2), grid);
  CHECK_FALSE(refute_optimality(evaluator, origin).has_value());
}

TEST_CASE("refute_optimality: non-stationary feasible point is refuted") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 21);
  const Trajectory at_one =
      constant_trajectory(Eigen::VectorXd::Constant(2, 1.0), grid);

  const auto witness = refute_optimality(evaluator, at_one);
  REQUIRE(witness.has_value());
  CHECK(witness->source == "residual_direction");
  CHECK(witness->ascent_integral > 0.0);
  CHECK(witness->objective_gain >= 0.5);
  CHECK(witness->improved_feasibility.pass);
  CHECK(witness->objective_before == doctest::Approx(-2.0));
}

TEST_CASE("refute_optimality: negative multiplier is refuted by raising g") {
  const LoadResult fixture = load_fixture("negmult.ctp");
  const ProblemEvaluator evaluator(fixture.problem);
  const TimeGrid grid = build_grid(1.0, 21);
  const Trajectory zero = constant_trajectory(Eigen::VectorXd::Zero(1), grid);

  // Stationarity at z=0 forces v = -1 < 0.
  const FirstOrderCertificate fo = first_order_certificate(evaluator, zero);
  CHECK(fo.min_multiplier == doctest::Approx(-1.0));
  CHECK_FALSE(fo.pass);

  const auto witness = refute_optimality(evaluator, zero);
  REQUIRE(witness.has_value());
  CHECK(witness->source == "negative_multiplier");
  CHECK(witness->constraint == 0);
  CHECK(witness->ascent_integral == doctest::Approx(1.0));
  CHECK(witness->objective_gain >= 0.9 * fixture.problem.horizon);
  CHECK(witness->improved_feasibility.pass);
}

TEST_CASE("refute_optimality: infeasible input is rejected") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 11);
  Eigen::VectorXd shifted(2);
  shifted << 0.1, 0.0;
  CHECK_THROWS_AS(
      refute_optimality(evaluator, constant_trajectory(shifted, grid)), Error);
}

TEST_CASE("property: raising directions satisfy the tangency conditions") {
  const SweepResult sweep = increase_direction_sweep(60, 99);
  CHECK(sweep.total == 60);
  CHECK(sweep.failures == 0);
  CHECK(sweep.max_error <= 1e-9);
}
