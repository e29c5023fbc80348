#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ctkkt/errors.hpp"
#include "ctkkt/linalg.hpp"

using namespace ctkkt;

namespace {

// Slack-form Jacobian of the ex1 fixture at the origin.
Eigen::MatrixXd ex1_slack_jacobian() {
  Eigen::MatrixXd Y(3, 4);
  Y << 1, -1, 0, 0,
       1,  0, 0, 0,
       0,  0, 0, -2;
  return Y;
}

}  // namespace

TEST_CASE("gram_det: examples") {
  Eigen::MatrixXd row(1, 2);
  row << 1, -1;
  const GramReport r1 = gram_det(row);
  CHECK(r1.det == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r1.rank == 1);
  CHECK(r1.sign == 1);

  const GramReport r0 = gram_det(Eigen::MatrixXd::Zero(2, 4));
  CHECK(r0.det == 0.0);
  CHECK(r0.rank == 0);
  CHECK(r0.sign == 0);

  // det(Y Y') for the ex1 slack Jacobian is (2*1 - 1) * 4 = 4.
  const GramReport ry = gram_det(ex1_slack_jacobian());
  CHECK(ry.det == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(ry.rank == 3);

  CHECK_THROWS_AS(gram_det(Eigen::MatrixXd::Zero(3, 2)), DimensionError);
}

TEST_CASE("inverse_norm_bound: formula and tightness") {
  CHECK(inverse_norm_bound(6.0, 3.0, 2) == doctest::Approx(0.5));
  // diag(2,3): singular values {3,2}, inverse norm 1/2 -- bound tight.
  Eigen::MatrixXd D1 = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  CHECK(D1.inverse().operatorNorm() == doctest::Approx(0.5));

  CHECK(inverse_norm_bound(1.0, 1.0, 1) == doctest::Approx(1.0));

  CHECK(inverse_norm_bound(4.0, 2.0, 3) == doctest::Approx(1.0));
  Eigen::MatrixXd D2 = Eigen::Vector3d(2.0, 2.0, 1.0).asDiagonal();
  CHECK(D2.inverse().operatorNorm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(inverse_norm_bound(0.0, 1.0, 2), Error);
  CHECK_THROWS_AS(inverse_norm_bound(1.0, -1.0, 2), Error);
  CHECK_THROWS_AS(inverse_norm_bound(1.0, 1.0, 0), Error);
}

TEST_CASE("min_norm_lsq: examples") {
  Eigen::VectorXd b2(2);
  b2 << 3, 4;
  const Eigen::VectorXd x1 = min_norm_lsq(Eigen::MatrixXd::Identity(2, 2), b2);
  CHECK(x1(0) == doctest::Approx(3.0));
  CHECK(x1(1) == doctest::Approx(4.0));

  Eigen::VectorXd b3(3);
  b3 << 0, 1, 0;
  const Eigen::VectorXd gamma = min_norm_lsq(ex1_slack_jacobian(), b3);
  CHECK(gamma(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gamma(1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gamma(2) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(gamma(3) == doctest::Approx(0.0).epsilon(1e-10));

  Eigen::MatrixXd row(1, 2);
  row << 1, 1;
  Eigen::VectorXd b1(1);
  b1 << 2;
  const Eigen::VectorXd x3 = min_norm_lsq(row, b1);
  CHECK(x3(0) == doctest::Approx(1.0));
  CHECK(x3(1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(min_norm_lsq(row, b2), DimensionError);
}

TEST_CASE("nullspace_basis: examples") {
  Eigen::MatrixXd row(1, 2);
  row << 1, -1;
  const Eigen::MatrixXd basis1 = nullspace_basis(row);
  REQUIRE(basis1.cols() == 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(basis1(0, 0)) == doctest::Approx(inv_sqrt2));
  CHECK(basis1(0, 0) == doctest::Approx(basis1(1, 0)));

  Eigen::MatrixXd full(2, 2);
  full << 1, -1, 1, 0;
  CHECK(nullspace_basis(full).cols() == 0);

  const Eigen::MatrixXd basis3 = nullspace_basis(Eigen::MatrixXd::Zero(1, 3));
  CHECK(basis3.cols() == 3);
  CHECK((basis3.transpose() * basis3 - Eigen::MatrixXd::Identity(3, 3)).norm() <=
        1e-12);

  CHECK(nullspace_basis(Eigen::MatrixXd(0, 4)).cols() == 4);
}

TEST_CASE("max_eig_sym: examples") {
  CHECK(max_eig_sym(Eigen::Vector2d(-2.0, -2.0).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(-2.0));

  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  CHECK(max_eig_sym(flip) == doctest::Approx(1.0));

  CHECK(max_eig_sym(Eigen::MatrixXd(0, 0)) ==
        -std::numeric_limits<double>::infinity());

  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(max_eig_sym(asym), DimensionError);
}

TEST_CASE("gram_det: wide matrices accumulate in log space") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Representable determinant: det == exp(log_det).
  Eigen::MatrixXd M(25, 30);
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 30; ++j) M(i, j) = gauss(rng);
  }
  const GramReport r = gram_det(M);
  CHECK(r.sign == 1);
  CHECK(std::isfinite(r.log_det));
  CHECK(r.det == doctest::Approx(std::exp(r.log_det)));
  double sum = 0.0;
  for (int i = 0; i < 25; ++i) sum += 2.0 * std::log(r.singular_values(i));
  CHECK(r.log_det == doctest::Approx(sum));

  // Overflowing determinant: det saturates, log_det stays informative.
  const GramReport big = gram_det(1e8 * M);
  CHECK(big.sign == 1);
  CHECK(std::isfinite(big.log_det));
  CHECK(std::isinf(big.det));
  CHECK(big.log_det == doctest::Approx(sum + 50.0 * std::log(1e8)));
}

TEST_CASE("property: min_norm_lsq matches the normal-equation solve") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_r(1, 5);

  int checked = 0;
  while (checked < 500) {
    const int r = pick_r(rng);
    std::uniform_int_distribution<int> pick_c(r, r + 4);
    const int c = pick_c(rng);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    }
    if (gram_det(M).rank < r) continue;
    Eigen::VectorXd b(r);
    for (int i = 0; i < r; ++i) b(i) = gauss(rng);

    // Independent route: solve (M M') y = b directly, then x = M' y.
    const Eigen::MatrixXd gram = M * M.transpose();
    const Eigen::VectorXd y = gram.partialPivLu().solve(b);
    const Eigen::VectorXd x_direct = M.transpose() * y;

    const Eigen::VectorXd x = min_norm_lsq(M, b);
    CHECK((x - x_direct).norm() <= 1e-8 * (1.0 + x_direct.norm()));
    ++checked;
  }
}

TEST_CASE("property: inverse-norm bound on Gram matrices, no tolerance") {
  // Instances conditioned to det(MM') >= K and sigma_1 <= L for fixed
  // K < 1 < L, so the Gram matrix satisfies det >= K^2 and norm <= L^2.
  constexpr double K = 0.09;
  constexpr double L = 6.0;

  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_r(1, 6);

  int checked = 0;
  while (checked < 500) {
    const int r = pick_r(rng);
    std::uniform_int_distribution<int> pick_c(r, r + 3);
    const int c = pick_c(rng);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    }
    const GramReport report = gram_det(M);
    if (report.det < K || report.spectral_norm > L) continue;

    const double bound = inverse_norm_bound(K * K, L * L, r);
    // Explicit inverse of the Gram matrix, independent of the SVD route.
    const Eigen::MatrixXd gram = M * M.transpose();
    const double inv_norm =
        Eigen::JacobiSVD<Eigen::MatrixXd>(gram.inverse()).singularValues()(0);
    CHECK(inv_norm <= bound);
    ++checked;
  }
}

TEST_CASE("property: nullspace bases are orthonormal annihilators") {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_r(1, 4);
  std::uniform_int_distribution<int> pick_extra(0, 4);

  for (int trial = 0; trial < 300; ++trial) {
    const int r = pick_r(rng);
    const int c = r + pick_extra(rng);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    }
    const Eigen::MatrixXd basis = nullspace_basis(M);
    const double sigma1 = gram_det(M).spectral_norm;
    if (basis.cols() == 0) continue;
    CHECK((basis.transpose() * basis -
           Eigen::MatrixXd::Identity(basis.cols(), basis.cols()))
              .norm() <= 1e-10);
    CHECK((M * basis).norm() <= 1e-10 * (1.0 + sigma1));
  }
}
