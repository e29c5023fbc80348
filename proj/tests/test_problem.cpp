#include <doctest.h>

#include <cmath>
#include <random>

#include "ctkkt/errors.hpp"
#include "ctkkt/problem.hpp"
#include "testutil.hpp"

using namespace ctkkt;
using ctkkt_test::load_fixture;

TEST_CASE("build_grid: nodes and trapezoid weights") {
  const TimeGrid g2 = build_grid(1.0, 2);
  CHECK(g2.nodes(0) == 0.0);
  CHECK(g2.nodes(1) == 1.0);
  CHECK(g2.weights(0) == doctest::Approx(0.5));
  CHECK(g2.weights(1) == doctest::Approx(0.5));

  const TimeGrid g201 = build_grid(1.0, 201);
  CHECK(g201.size() == 201);
  CHECK(g201.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g201.nodes(200) == 1.0);

  const TimeGrid g3 = build_grid(2.0, 3);
  CHECK(g3.nodes(1) == doctest::Approx(1.0));
  CHECK(g3.weights(0) == doctest::Approx(0.5));
  CHECK(g3.weights(1) == doctest::Approx(1.0));
  CHECK(g3.weights(2) == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_grid(1.0, 1), Error);
  CHECK_THROWS_AS(build_grid(0.0, 5), Error);
}

TEST_CASE("integrate: values and convergence order") {
  const TimeGrid grid = build_grid(1.0, 11);
  CHECK(integrate(grid, Eigen::VectorXd::Zero(11)) == 0.0);
  CHECK(integrate(build_grid(2.0, 5), Eigen::VectorXd::Constant(5, 3.0)) ==
        doctest::Approx(6.0));
  CHECK_THROWS_AS(integrate(grid, Eigen::VectorXd::Zero(7)), DimensionError);

  // integral over [0,1] of -2 t^2 dt = -2/3.
  auto quadrature = [](int N) {
    const TimeGrid g = build_grid(1.0, N);
    Eigen::VectorXd values(N);
    for (int k = 0; k < N; ++k) values(k) = -2.0 * g.nodes(k) * g.nodes(k);
    return integrate(g, values);
  };
  CHECK(quadrature(2001) == doctest::Approx(-2.0 / 3.0).epsilon(1e-6));

  // Second-order convergence: error(N) * (N-1)^2 is 1/3 for this integrand.
  for (int N : {11, 21, 41, 81, 161}) {
    const double err = std::abs(quadrature(N) - (-2.0 / 3.0));
    CHECK(err * (N - 1.0) * (N - 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  }
}

TEST_CASE("load_problem: fixtures") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  CHECK(ex1.problem.name == "ex1");
  CHECK(ex1.problem.n == 2);
  CHECK(ex1.problem.p() == 1);
  CHECK(ex1.problem.m() == 2);
  CHECK(ex1.problem.horizon == 1.0);
  REQUIRE(ex1.candidate.has_value());
  CHECK(ex1.candidate->z.size() == 2);

  const LoadResult ex2 = load_fixture("ex2.ctp");
  CHECK(ex2.problem.n == 3);
  CHECK(ex2.problem.p() == 1);
  CHECK(ex2.problem.m() == 2);
  REQUIRE(ex2.candidate.has_value());
  const TimeGrid grid = build_grid(1.0, 5);
  const Trajectory traj = sample_candidate(*ex2.candidate, grid);
  CHECK(traj.values.row(2)(0) == 1.0);
  CHECK(traj.values.row(2)(1) == 1.0);
  CHECK(traj.values.row(2)(2) == 1.0);
}

TEST_CASE("load_problem: errors") {
  // Out-of-range variable in an expression.
  const char* bad_var = R"(
[problem]
name = "bad"
n = 2
T = 1.0
objective = "z3"
)";
  try {
    load_problem(bad_var);
    FAIL("expected FormatError");
  } catch (const FormatError& err) {
    CHECK(std::string(err.what()).find("out of range") != std::string::npos);
    CHECK(err.line() == 6);
  }

  CHECK_THROWS_AS(load_problem("x = 3\n"), FormatError);  // key outside section
  CHECK_THROWS_AS(load_problem("[problem]\nname = \"a\"\nname = \"b\"\n"),
                  FormatError);  // duplicate key
  CHECK_THROWS_AS(load_problem("[problem]\n[problem]\n"), FormatError);
  CHECK_THROWS_AS(load_problem("[problem]\nname = \"a\"\nn = 1\nT = 1.0\n"),
                  FormatError);  // missing objective
  CHECK_THROWS_AS(load_problem("[weird]\n"), FormatError);

  // p > n is rejected.
  const char* too_many = R"(
[problem]
name = "p_gt_n"
n = 1
T = 1.0
objective = "z1"

[[equality]]
expr = "z1"

[[equality]]
expr = "z1 - 1"
)";
  CHECK_THROWS_AS(load_problem(too_many), FormatError);

  // Candidate length must match n.
  const char* bad_candidate = R"(
[problem]
name = "bad_cand"
n = 2
T = 1.0
objective = "z1"

[candidate]
z = ["0"]
)";
  CHECK_THROWS_AS(load_problem(bad_candidate), FormatError);
}

TEST_CASE("load/save round-trip is identity on the data model") {
  for (const char* name : {"ex1.ctp", "ex2.ctp", "negmult.ctp", "infeasible.ctp"}) {
    const LoadResult first = load_fixture(name);
    const std::string saved = save_problem(
        first.problem, first.candidate ? &*first.candidate : nullptr);
    const LoadResult second = load_problem(saved);

    CHECK(second.problem.name == first.problem.name);
    CHECK(second.problem.n == first.problem.n);
    CHECK(second.problem.horizon == first.problem.horizon);
    CHECK(second.problem.p() == first.problem.p());
    CHECK(second.problem.m() == first.problem.m());
    CHECK(second.problem.objective_text == first.problem.objective_text);
    CHECK(second.problem.equality_text == first.problem.equality_text);
    CHECK(second.problem.inequality_text == first.problem.inequality_text);
    CHECK(second.candidate.has_value() == first.candidate.has_value());
    if (first.candidate) {
      CHECK(second.candidate->z_text == first.candidate->z_text);
    }
  }
}

TEST_CASE("evaluate_point: fixture values and active sets") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);

  Eigen::VectorXd origin(2);
  origin << 0.0, 0.0;
  const PointEval at_origin = evaluator.evaluate(origin, 0.3);
  CHECK(at_origin.grad_phi(0) == 0.0);
  CHECK(at_origin.grad_phi(1) == 0.0);
  CHECK(at_origin.grad_h(0, 0) == 1.0);
  CHECK(at_origin.grad_h(0, 1) == -1.0);
  CHECK(at_origin.g(0) == 0.0);
  CHECK(at_origin.g(1) == 1.0);
  CHECK(at_origin.active == std::vector<int>{0});
  CHECK(at_origin.grad_g(0, 0) == 1.0);
  CHECK(at_origin.grad_g(0, 1) == 0.0);

  const LoadResult ex2 = load_fixture("ex2.ctp");
  const ProblemEvaluator evaluator2(ex2.problem);
  Eigen::VectorXd ones(3);
  ones << 1.0, 1.0, 1.0;
  const PointEval at_ones = evaluator2.evaluate(ones, 0.0);
  CHECK(at_ones.h(0) == 0.0);
  CHECK(at_ones.g(0) == 0.0);
  CHECK(at_ones.g(1) == 0.0);
  CHECK(at_ones.active == std::vector<int>{0, 1});

  Eigen::VectorXd inside(2);
  inside << 1.0, 1.0;
  const PointEval at_inside = evaluator.evaluate(inside, 0.0);
  CHECK(at_inside.g(0) == doctest::Approx(1.5));
  CHECK(at_inside.g(1) == doctest::Approx(2.0));
  CHECK(at_inside.active.empty());
}

TEST_CASE("property: active set is monotone in the band width") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pick_z(-1.0, 1.0);
  std::uniform_real_distribution<double> pick_eps(0.0, 2.0);

  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd z(2);
    z << pick_z(rng), pick_z(rng);
    double eps1 = pick_eps(rng);
    double eps2 = pick_eps(rng);
    if (eps1 > eps2) std::swap(eps1, eps2);
    const PointEval narrow = evaluator.evaluate(z, 0.0, eps1);
    const PointEval wide = evaluator.evaluate(z, 0.0, eps2);
    for (int j : narrow.active) {
      CHECK(std::find(wide.active.begin(), wide.active.end(), j) !=
            wide.active.end());
    }
  }
}

TEST_CASE("check_feasibility: fixtures") {
  const LoadResult ex1 = load_fixture("ex1.ctp");
  const ProblemEvaluator evaluator(ex1.problem);
  const TimeGrid grid = build_grid(1.0, 21);

  Eigen::VectorXd origin(2);
  origin << 0.0, 0.0;
  const FeasibilityReport pass_report =
      check_feasibility(evaluator, constant_trajectory(origin, grid));
  CHECK(pass_report.pass);
  CHECK(pass_report.max_abs_h == 0.0);
  CHECK(pass_report.min_g == 0.0);

  Eigen::VectorXd shifted(2);
  shifted << 0.1, 0.0;
  const FeasibilityReport fail_report =
      check_feasibility(evaluator, constant_trajectory(shifted, grid));
  CHECK_FALSE(fail_report.pass);
  CHECK(fail_report.max_abs_h == doctest::Approx(0.1));
  CHECK(fail_report.worst_equality[0].constraint == 0);

  const LoadResult ex2 = load_fixture("ex2.ctp");
  const ProblemEvaluator evaluator2(ex2.problem);
  Eigen::VectorXd ones(3);
  ones << 1.0, 1.0, 1.0;
  CHECK(check_feasibility(evaluator2, constant_trajectory(ones, grid)).pass);
}

TEST_CASE("trajectory row count must match the grid") {
  const TimeGrid grid = build_grid(1.0, 5);
  CHECK_THROWS_AS(Trajectory(grid, Eigen::MatrixXd::Zero(4, 2)), DimensionError);
}
