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

#include "ctkkt/selftest.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ctkkt/errors.hpp"
#include "ctkkt/improve.hpp"
#include "ctkkt/linalg.hpp"
#include "ctkkt/problem.hpp"

namespace ctkkt {

Expr random_expr(std::mt19937_64& rng, int n, int max_depth) {
  std::uniform_int_distribution<int> pick_class(0, 9);
  std::uniform_int_distribution<int> pick_leaf(0, 2);
  std::uniform_int_distribution<int> pick_unary(0, 5);
  std::uniform_int_distribution<int> pick_binary(0, 4);
  std::uniform_int_distribution<int> pick_var(1, std::max(1, n));
  std::uniform_real_distribution<double> pick_const(-3.0, 3.0);
  std::uniform_int_distribution<int> pick_int_exp(-3, 3);
  std::uniform_real_distribution<double> pick_frac_exp(0.5, 2.5);

  if (max_depth <= 0 || pick_class(rng) < 3) {
    switch (pick_leaf(rng)) {
      case 0: return Expr::constant(pick_const(rng));
      case 1: return n > 0 ? Expr::variable_z(pick_var(rng)) : Expr::variable_t();
      default: return Expr::variable_t();
    }
  }
  if (pick_class(rng) < 6) {
    static constexpr ExprKind kUnary[] = {ExprKind::kNeg, ExprKind::kSin,
                                          ExprKind::kCos, ExprKind::kExp,
                                          ExprKind::kLog, ExprKind::kSqrt};
    return Expr::unary(kUnary[pick_unary(rng)], random_expr(rng, n, max_depth - 1));
  }
  static constexpr ExprKind kBinary[] = {ExprKind::kAdd, ExprKind::kSub,
                                         ExprKind::kMul, ExprKind::kDiv,
                                         ExprKind::kPow};
  const ExprKind kind = kBinary[pick_binary(rng)];
  Expr lhs = random_expr(rng, n, max_depth - 1);
  if (kind == ExprKind::kPow) {
    const bool integer_exp = pick_class(rng) < 7;
    const double c = integer_exp ? static_cast<double>(pick_int_exp(rng))
                                 : pick_frac_exp(rng);
    return Expr::binary(kind, std::move(lhs), Expr::constant(c));
  }
  return Expr::binary(kind, std::move(lhs), random_expr(rng, n, max_depth - 1));
}

namespace {

constexpr double kFdStep = 1e-6;

bool finite(double v) { return std::isfinite(v); }

// Central difference of `f` in coordinate `i` (i == -1 means t). Returns
// false when any probe leaves the expression domain or is non-finite.
bool central_diff(const Expr& e, std::vector<double>& z, double t, int i,
                  double step, double* out) {
  try {
    double f_plus = 0.0, f_minus = 0.0;
    if (i < 0) {
      f_plus = eval_expr(e, z, t + step);
      f_minus = eval_expr(e, z, t - step);
    } else {
      const double saved = z[static_cast<size_t>(i)];
      z[static_cast<size_t>(i)] = saved + step;
      f_plus = eval_expr(e, z, t);
      z[static_cast<size_t>(i)] = saved - step;
      f_minus = eval_expr(e, z, t);
      z[static_cast<size_t>(i)] = saved;
    }
    if (!finite(f_plus) || !finite(f_minus)) return false;
    *out = (f_plus - f_minus) / (2.0 * step);
    return finite(*out);
  } catch (const EvalError&) {
    return false;
  }
}

// A sample point is usable only where the finite-difference oracle itself is
// stable: probes in-domain, values bounded, and the h / 2h estimates in
// agreement. Unstable points cannot adjudicate and are resampled.
bool stable_fd(const Expr& e, std::vector<double>& z, double t, int i,
               double* fd) {
  double fd_h = 0.0, fd_2h = 0.0;
  if (!central_diff(e, z, t, i, kFdStep, &fd_h)) return false;
  if (!central_diff(e, z, t, i, 2.0 * kFdStep, &fd_2h)) return false;
  if (std::abs(fd_h) > 1e6) return false;
  if (std::abs(fd_h - fd_2h) > 3e-6 * (1.0 + std::abs(fd_h))) return false;
  *fd = fd_h;
  return true;
}

}  // namespace

SweepResult derivative_fd_sweep(int count, std::uint64_t seed) {
  SweepResult result;
  result.name = "derivative vs central finite differences";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(1, 4);
  std::uniform_real_distribution<double> pick_z(-2.0, 2.0);
  std::uniform_real_distribution<double> pick_t(0.0, 1.0);

  const long max_attempts = 60L * count;
  long attempts = 0;
  while (result.total < count && attempts < max_attempts) {
    ++attempts;
    const int n = pick_n(rng);
    const Expr e = random_expr(rng, n, 6);
    std::vector<double> z(static_cast<size_t>(n));
    for (double& zi : z) zi = pick_z(rng);
    const double t = pick_t(rng);

    try {
      const double value = eval_expr(e, z, t);
      if (!finite(value) || std::abs(value) > 1e8) continue;
    } catch (const EvalError&) {
      continue;
    }

    const std::vector<Expr> grad = gradient(e, n);
    const Expr dt = differentiate(e, VarRef::t());
    const auto hess = hessian(e, n);

    bool usable = true;
    bool sample_failed = false;
    double sample_error = 0.0;

    auto check_pair = [&](const Expr& symbolic, const Expr& target, int coord) {
      // target differentiated numerically in `coord` against `symbolic`.
      double fd = 0.0;
      if (!stable_fd(target, z, t, coord, &fd)) {
        usable = false;
        return;
      }
      double sym = 0.0;
      try {
        sym = eval_expr(symbolic, z, t);
      } catch (const EvalError&) {
        usable = false;
        return;
      }
      if (!finite(sym) || std::abs(sym) > 1e6) {
        usable = false;
        return;
      }
      const double err = std::abs(sym - fd) / (1.0 + std::abs(sym));
      sample_error = std::max(sample_error, err);
      if (err > 1e-5) sample_failed = true;
    };

    for (int i = 0; i < n && usable; ++i) {
      check_pair(grad[static_cast<size_t>(i)], e, i);
    }
    if (usable) check_pair(dt, e, -1);
    // Hessian rows: finite differences of the symbolic gradient.
    for (int i = 0; i < n && usable; ++i) {
      for (int j = 0; j < n && usable; ++j) {
        check_pair(hess[static_cast<size_t>(i)][static_cast<size_t>(j)],
                   grad[static_cast<size_t>(i)], j);
        if (!identical(hess[static_cast<size_t>(i)][static_cast<size_t>(j)],
                       hess[static_cast<size_t>(j)][static_cast<size_t>(i)])) {
          sample_failed = true;
        }
      }
    }
    if (!usable) continue;

    ++result.total;
    result.max_error = std::max(result.max_error, sample_error);
    if (sample_failed) ++result.failures;
  }
  return result;
}

SweepResult inverse_norm_bound_sweep(int count, std::uint64_t seed) {
  // Random square matrices conditioned to det >= K and spectral norm <= L;
  // the explicitly inverted matrix must respect L^(p-1)/K exactly.
  constexpr double kDetFloor = 0.05;
  constexpr double kNormCap = 8.0;

  SweepResult result;
  result.name = "inverse-norm bound on random matrices";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_p(1, 8);
  std::normal_distribution<double> gauss(0.0, 1.0);

  while (result.total < count) {
    const int p = pick_p(rng);
    Eigen::MatrixXd M(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) M(i, j) = gauss(rng);
    }
    if (M.determinant() < 0.0) M.row(0) = -M.row(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd& sigma = svd.singularValues();
    if (M.determinant() < kDetFloor || sigma(0) > kNormCap) continue;

    // Independent route: explicit inverse, then its spectral norm.
    const Eigen::MatrixXd Minv = M.inverse();
    const double inv_norm =
        Eigen::JacobiSVD<Eigen::MatrixXd>(Minv).singularValues()(0);

    const double bound = inverse_norm_bound(kDetFloor, kNormCap, p);
    ++result.total;
    if (inv_norm > bound) {
      ++result.failures;
      result.max_error = std::max(result.max_error, inv_norm - bound);
    }
  }
  return result;
}

SweepResult increase_direction_sweep(int count, std::uint64_t seed) {
  SweepResult result;
  result.name = "raising-direction tangency conditions";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(2, 6);
  std::uniform_real_distribution<double> pick_inactive(0.5, 3.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  while (result.total < count) {
    const int n = pick_n(rng);
    std::uniform_int_distribution<int> pick_p(0, std::min(2, n - 1));
    const int p = pick_p(rng);
    std::uniform_int_distribution<int> pick_qa(1, std::min(2, n - p));
    const int qa = pick_qa(rng);
    std::uniform_int_distribution<int> pick_extra(0, 2);
    const int m = qa + pick_extra(rng);

    PointEval pe;
    pe.z = Eigen::VectorXd::Zero(n);
    pe.h = Eigen::VectorXd::Zero(p);
    pe.grad_h.resize(p, n);
    pe.g.resize(m);
    pe.grad_g.resize(m, n);
    for (int i = 0; i < p; ++i) {
      for (int c = 0; c < n; ++c) pe.grad_h(i, c) = gauss(rng);
    }
    for (int j = 0; j < m; ++j) {
      for (int c = 0; c < n; ++c) pe.grad_g(j, c) = gauss(rng);
      pe.g(j) = j < qa ? 0.0 : pick_inactive(rng);
    }
    pe.eps_act = 1e-6;
    for (int j = 0; j < qa; ++j) pe.active.push_back(j);

    // Regularity: the stacked equality and active gradients must be well
    // conditioned, otherwise resample.
    Eigen::MatrixXd stacked(p + qa, n);
    stacked.topRows(p) = pe.grad_h;
    stacked.bottomRows(qa) = pe.grad_g.topRows(qa);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    if (svd.singularValues()(p + qa - 1) < 0.3) continue;

    std::uniform_int_distribution<int> pick_k(0, qa - 1);
    const int k = pick_k(rng);
    const Eigen::VectorXd direction = increase_direction(pe, k);

    double violation = 0.0;
    for (int i = 0; i < p; ++i) {
      violation = std::max(violation, std::abs(pe.grad_h.row(i).dot(direction)));
    }
    for (int j = 0; j < qa; ++j) {
      const double inner = pe.grad_g.row(j).dot(direction);
      violation = std::max(
          violation, j == k ? std::abs(inner - 1.0) : std::abs(inner));
    }

    ++result.total;
    result.max_error = std::max(result.max_error, violation);
    if (violation > 1e-9) ++result.failures;
  }
  return result;
}

}  // namespace ctkkt
