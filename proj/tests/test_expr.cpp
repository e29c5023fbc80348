#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ctkkt/errors.hpp"
#include "ctkkt/expr.hpp"
#include "ctkkt/selftest.hpp"

using namespace ctkkt;

namespace {

double ev(const Expr& e, std::vector<double> z, double t = 0.0) {
  return eval_expr(e, z, t);
}

}  // namespace

TEST_CASE("parse: precedence and shapes") {
  // -z1^2 - z2^2 must bind as -(z1^2) - (z2^2).
  const Expr e = parse_expr("-z1^2 - z2^2", 2);
  CHECK(ev(e, {1.0, 2.0}) == doctest::Approx(-5.0));
  CHECK(ev(e, {0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(ev(e, {2.0, -3.0}) == doctest::Approx(-13.0));

  const Expr t_only = parse_expr("t", 1);
  CHECK(t_only.kind() == ExprKind::kVarT);

  CHECK(ev(parse_expr("z1*z2 + 1", 2), {2.0, 3.0}) == doctest::Approx(7.0));

  // ^ is right-associative and tighter than unary minus.
  CHECK(ev(parse_expr("2^3^2", 1), {0.0}) == doctest::Approx(512.0));
  CHECK(ev(parse_expr("-2^2", 1), {0.0}) == doctest::Approx(-4.0));
  CHECK(ev(parse_expr("2^-1", 1), {0.0}) == doctest::Approx(0.5));

  // Whitespace-insensitive.
  CHECK(ev(parse_expr("  z1 +\t0.5 * z2 ^ 2 ", 2), {1.0, 1.0}) ==
        doctest::Approx(1.5));

  // Exponent-form literals.
  CHECK(ev(parse_expr("1.5e2 + 2E-1", 1), {0.0}) == doctest::Approx(150.2));
}

TEST_CASE("parse: errors carry offsets") {
  CHECK_THROWS_AS(parse_expr("", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("   ", 2), ParseError);

  try {
    parse_expr("z1 + q2", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 5);
  }

  try {
    parse_expr("z1 + z3", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 5);
    CHECK(std::string(err.what()).find("out of range") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_expr("z1 + ", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("(z1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("z1 z2", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("sin z1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("z0", 2), ParseError);
  // Non-constant exponents are rejected.
  CHECK_THROWS_AS(parse_expr("z1^z2", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("2^t", 1), ParseError);
  // Constant-foldable exponents are fine.
  CHECK(ev(parse_expr("z1^(1+1)", 1), {3.0}) == doctest::Approx(9.0));
}

TEST_CASE("eval: values and domain errors") {
  const Expr e1 = parse_expr("-z1^2 - z2^2", 2);
  CHECK(eval_expr(e1, std::vector<double>{0.0, 0.0}, 0.5) == 0.0);

  CHECK(ev(parse_expr("z1 + 0.5*z2^2", 2), {1.0, 1.0}) == doctest::Approx(1.5));

  const Expr e2 = parse_expr("-(z1 - 1)^2 - (z2 - 1)^2", 3);
  CHECK(ev(e2, {1.0, 1.0, 1.0}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(ev(parse_expr("log(z1)", 1), {-1.0}), EvalError);
  CHECK_THROWS_AS(ev(parse_expr("log(z1)", 1), {0.0}), EvalError);
  CHECK_THROWS_AS(ev(parse_expr("sqrt(z1)", 1), {-0.5}), EvalError);
  CHECK_THROWS_AS(ev(parse_expr("1/z1", 1), {0.0}), EvalError);
  CHECK_THROWS_AS(ev(parse_expr("z1^-1", 1), {0.0}), EvalError);
  CHECK_THROWS_AS(ev(parse_expr("z1^0.5", 1), {-1.0}), EvalError);
}

TEST_CASE("differentiate: spec examples") {
  // d/dz1(-z1^2 - z2^2) = -2 z1.
  const Expr d1 = differentiate(parse_expr("-z1^2 - z2^2", 2), VarRef::z(1));
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    CHECK(ev(d1, {x, 1.0}) == doctest::Approx(-2.0 * x));
  }

  // d/dz2(z1 + 0.5*z2^2) simplifies all the way to z2.
  const Expr d2 = differentiate(parse_expr("z1 + 0.5*z2^2", 2), VarRef::z(2));
  CHECK(identical(d2, Expr::variable_z(2)));

  // d/dz3(-z1^2 - z2^2 + z3 + 1) = 1.
  const Expr d3 =
      differentiate(parse_expr("-z1^2 - z2^2 + z3 + 1", 3), VarRef::z(3));
  CHECK(identical(d3, Expr::constant(1.0)));

  // Time derivative.
  const Expr dt = differentiate(parse_expr("sin(t)*z1", 1), VarRef::t());
  CHECK(ev(dt, {2.0}, 0.3) == doctest::Approx(2.0 * std::cos(0.3)));

  // Non-integer exponent differentiates through the exp/log lowering.
  const Expr dp = differentiate(parse_expr("z1^1.5", 1), VarRef::z(1));
  CHECK(ev(dp, {4.0}) == doctest::Approx(1.5 * std::pow(4.0, 0.5)));
}

TEST_CASE("gradient and hessian: spec examples") {
  const Expr e1 = parse_expr("-z1^2 - z2^2", 2);
  const auto H1 = hessian(e1, 2);
  for (double x : {-1.0, 0.0, 2.0}) {
    CHECK(ev(H1[0][0], {x, x}) == doctest::Approx(-2.0));
    CHECK(ev(H1[1][1], {x, x}) == doctest::Approx(-2.0));
    CHECK(ev(H1[0][1], {x, x}) == doctest::Approx(0.0));
  }

  const auto g = gradient(parse_expr("z1 - z2", 2), 2);
  CHECK(identical(g[0], Expr::constant(1.0)));
  CHECK(identical(g[1], Expr::constant(-1.0)));

  const auto H2 = hessian(parse_expr("z1*z2 + 1", 2), 2);
  CHECK(ev(H2[0][0], {5.0, 7.0}) == doctest::Approx(0.0));
  CHECK(ev(H2[0][1], {5.0, 7.0}) == doctest::Approx(1.0));
  CHECK(ev(H2[1][0], {5.0, 7.0}) == doctest::Approx(1.0));
  CHECK(ev(H2[1][1], {5.0, 7.0}) == doctest::Approx(0.0));
}

TEST_CASE("property: hessian is symmetric node-for-node") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const Expr e = random_expr(rng, n, 6);
    const auto H = hessian(e, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(identical(H[static_cast<size_t>(i)][static_cast<size_t>(j)],
                        H[static_cast<size_t>(j)][static_cast<size_t>(i)]));
      }
    }
  }
}

TEST_CASE("property: print/parse round-trip evaluates identically") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pick_z(-2.0, 2.0);
  std::uniform_real_distribution<double> pick_t(0.0, 1.0);

  int checked_points = 0;
  int expr_trials = 0;
  while (checked_points < 100 && expr_trials < 4000) {
    ++expr_trials;
    const int n = 1 + static_cast<int>(rng() % 3);
    const Expr e = random_expr(rng, n, 5);
    const Expr reparsed = parse_expr(to_string(e), n);

    std::vector<double> z(static_cast<size_t>(n));
    for (double& zi : z) zi = pick_z(rng);
    const double t = pick_t(rng);
    double v1 = 0.0;
    try {
      v1 = eval_expr(e, z, t);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(v1)) continue;
    const double v2 = eval_expr(reparsed, z, t);
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
    ++checked_points;
  }
  CHECK(checked_points == 100);
}

TEST_CASE("property: derivatives match central finite differences") {
  // Full 1000-sample sweep runs in the acceptance suite; keep the unit run
  // lighter.
  const SweepResult sweep = derivative_fd_sweep(200, 42);
  CHECK(sweep.total == 200);
  CHECK(sweep.failures == 0);
}
