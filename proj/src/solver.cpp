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

#include "ctkkt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctkkt/errors.hpp"

namespace ctkkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64; used to derive independent per-node and per-start streams.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t node,
                          std::uint64_t start) {
  return mix(mix(seed ^ mix(node + 1)) ^ mix(start + 1));
}

// Uniform double in [-w, w] from a raw 64-bit draw.
double uniform_pm(std::uint64_t bits, double w) {
  const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0,1)
  return (2.0 * unit - 1.0) * w;
}

// Augmented-Lagrangian value and gradient for the pointwise problem at t:
// minimize -phi + sum_i [lambda_i h_i + (rho/2) h_i^2]
//              + (1/(2 rho)) sum_j [max(0, mu_j - rho g_j)^2 - mu_j^2].
struct AugLag {
  const ProblemEvaluator& evaluator;
  double t;
  Eigen::VectorXd lambda;  // p
  Eigen::VectorXd mu;      // m, >= 0
  double rho;

  double value(const FirstOrderEval& fe) const {
    double v = -fe.phi;
    for (int i = 0; i < fe.h.size(); ++i) {
      v += lambda(i) * fe.h(i) + 0.5 * rho * fe.h(i) * fe.h(i);
    }
    for (int j = 0; j < fe.g.size(); ++j) {
      const double a = std::max(0.0, mu(j) - rho * fe.g(j));
      v += (a * a - mu(j) * mu(j)) / (2.0 * rho);
    }
    return v;
  }

  Eigen::VectorXd grad(const FirstOrderEval& fe) const {
    Eigen::VectorXd g = -fe.grad_phi;
    for (int i = 0; i < fe.h.size(); ++i) {
      g += (lambda(i) + rho * fe.h(i)) * fe.grad_h.row(i).transpose();
    }
    for (int j = 0; j < fe.g.size(); ++j) {
      const double a = std::max(0.0, mu(j) - rho * fe.g(j));
      if (a > 0.0) g -= a * fe.grad_g.row(j).transpose();
    }
    return g;
  }
};

double infeasibility(const FirstOrderEval& fe) {
  double worst = 0.0;
  for (int i = 0; i < fe.h.size(); ++i) worst = std::max(worst, std::abs(fe.h(i)));
  for (int j = 0; j < fe.g.size(); ++j) worst = std::max(worst, -fe.g(j));
  return worst;
}

// Bounded-step BFGS with Armijo backtracking on a fixed augmented
// Lagrangian. Expression domain errors at a trial point reject the step.
Eigen::VectorXd minimize_inner(const AugLag& al, Eigen::VectorXd z,
                               const SolveOptions& options, bool* ok) {
  const int n = static_cast<int>(z.size());
  *ok = false;

  FirstOrderEval fe;
  try {
    fe = al.evaluator.evaluate_first_order(z, al.t);
  } catch (const EvalError&) {
    return z;
  }
  double f = al.value(fe);
  Eigen::VectorXd g = al.grad(fe);
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);

  for (int iter = 0; iter < options.inner_max_iterations; ++iter) {
    if (g.norm() <= options.inner_grad_tol) {
      *ok = true;
      return z;
    }

    Eigen::VectorXd d = -(Hinv * g);
    if (d.dot(g) >= 0.0) {
      // Lost positive definiteness; restart from steepest descent.
      Hinv.setIdentity();
      d = -g;
    }
    const double d_norm = d.norm();
    if (d_norm > options.max_step_norm) d *= options.max_step_norm / d_norm;

    const double slope = g.dot(d);
    double alpha = 1.0;
    double f_new = 0.0;
    FirstOrderEval fe_new;
    bool accepted = false;
    for (int ls = 0; ls < 45; ++ls, alpha *= 0.5) {
      const Eigen::VectorXd z_new = z + alpha * d;
      try {
        fe_new = al.evaluator.evaluate_first_order(z_new, al.t);
      } catch (const EvalError&) {
        continue;
      }
      f_new = al.value(fe_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      *ok = g.norm() <= 1e3 * options.inner_grad_tol;
      return z;
    }

    const Eigen::VectorXd z_new = z + alpha * d;
    const Eigen::VectorXd g_new = al.grad(fe_new);
    const Eigen::VectorXd s = z_new - z;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd V = I - (s * y.transpose()) / sy;
      Hinv = V * Hinv * V.transpose() + (s * s.transpose()) / sy;
    }
    z = z_new;
    f = f_new;
    g = g_new;
  }
  *ok = g.norm() <= 1e3 * options.inner_grad_tol;
  return z;
}

struct LocalCandidate {
  Eigen::VectorXd z;
  double phi = -kInf;
  double infeasibility = kInf;
};

// One full augmented-Lagrangian run from a single start.
LocalCandidate run_from_start(const ProblemEvaluator& evaluator, double t,
                              Eigen::VectorXd z, const SolveOptions& options) {
  const Problem& problem = evaluator.problem();
  AugLag al{evaluator, t, Eigen::VectorXd::Zero(problem.p()),
            Eigen::VectorXd::Zero(problem.m()), options.penalty_initial};

  LocalCandidate best;
  for (int outer = 0; outer < options.outer_iterations; ++outer) {
    bool ok = false;
    z = minimize_inner(al, std::move(z), options, &ok);

    FirstOrderEval fe;
    try {
      fe = evaluator.evaluate_first_order(z, t);
    } catch (const EvalError&) {
      break;
    }
    const double infeas = infeasibility(fe);
    if (infeas < best.infeasibility ||
        (infeas <= options.feasibility_tol &&
         best.infeasibility <= options.feasibility_tol && fe.phi > best.phi)) {
      best.z = z;
      best.phi = fe.phi;
      best.infeasibility = infeas;
    }

    for (int i = 0; i < problem.p(); ++i) al.lambda(i) += al.rho * fe.h(i);
    for (int j = 0; j < problem.m(); ++j) {
      al.mu(j) = std::max(0.0, al.mu(j) - al.rho * fe.g(j));
    }
    al.rho *= options.penalty_growth;
  }
  return best;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

}  // namespace

Eigen::VectorXd solve_pointwise(const ProblemEvaluator& evaluator, double t,
                                const SolveOptions& options,
                                std::uint64_t node_index,
                                const Eigen::VectorXd* warm_start) {
  const int n = evaluator.problem().n;

  std::optional<LocalCandidate> best;
  double best_infeasibility = kInf;

  auto consider = [&](LocalCandidate candidate) {
    if (candidate.z.size() == 0) return;
    best_infeasibility = std::min(best_infeasibility, candidate.infeasibility);
    if (candidate.infeasibility > options.feasibility_tol) return;
    if (!best) {
      best = std::move(candidate);
      return;
    }
    const double tie = options.tie_tol_rel * (1.0 + std::abs(best->phi));
    if (candidate.phi > best->phi + tie) {
      best = std::move(candidate);
    } else if (std::abs(candidate.phi - best->phi) <= tie &&
               lex_less(candidate.z, best->z)) {
      best = std::move(candidate);
    }
  };

  if (warm_start != nullptr) {
    consider(run_from_start(evaluator, t, *warm_start, options));
  }
  for (int s = 0; s < options.starts; ++s) {
    std::uint64_t state = derive_seed(options.seed, node_index,
                                      static_cast<std::uint64_t>(s));
    Eigen::VectorXd z0(n);
    for (int i = 0; i < n; ++i) {
      state = mix(state);
      z0(i) = uniform_pm(state, options.box_half_width);
    }
    consider(run_from_start(evaluator, t, std::move(z0), options));
  }

  if (!best) {
    throw SolveError("no feasible point found at t=" + std::to_string(t) +
                         "; best infeasibility " +
                         std::to_string(best_infeasibility),
                     best_infeasibility);
  }
  return best->z;
}

TrajectorySolveResult solve_trajectory(const ProblemEvaluator& evaluator,
                                       const TimeGrid& grid,
                                       const SolveOptions& options) {
  const int n = evaluator.problem().n;
  const int N = grid.size();

  TrajectorySolveResult result;
  result.solved.assign(static_cast<size_t>(N), 0);
  result.all_solved = true;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(N, n);

  Eigen::VectorXd warm;
  bool have_warm = false;
  for (int k = 0; k < N; ++k) {
    try {
      const Eigen::VectorXd z =
          solve_pointwise(evaluator, grid.nodes(k), options,
                          static_cast<std::uint64_t>(k), have_warm ? &warm : nullptr);
      values.row(k) = z.transpose();
      warm = z;
      have_warm = true;
      result.solved[static_cast<size_t>(k)] = 1;
    } catch (const SolveError& err) {
      result.all_solved = false;
      result.best_infeasibility =
          std::max(result.best_infeasibility, err.best_infeasibility());
      if (have_warm) values.row(k) = warm.transpose();
    }
  }
  result.trajectory = Trajectory(grid, std::move(values));
  return result;
}

CertifiedSolveResult certified_solve(const ProblemEvaluator& evaluator,
                                     const TimeGrid& grid,
                                     const SolveOptions& solve_options,
                                     const CertifyOptions& certify_options,
                                     const SocOptions& soc_options,
                                     const RefuteOptions& refute_options) {
  TrajectorySolveResult solved = solve_trajectory(evaluator, grid, solve_options);
  if (!solved.all_solved) {
    int failed = 0;
    for (const auto flag : solved.solved) {
      if (!flag) ++failed;
    }
    throw SolveError("solver failed at " + std::to_string(failed) + " of " +
                         std::to_string(grid.size()) + " nodes",
                     solved.best_infeasibility);
  }

  CertifiedSolveResult result;
  result.trajectory = std::move(solved.trajectory);
  result.objective = evaluator.objective_value(result.trajectory);
  result.first_order =
      first_order_certificate(evaluator, result.trajectory, certify_options);
  if (result.first_order.multipliers.has_value()) {
    result.second_order = second_order_certificate(evaluator, result.trajectory,
                                                   result.first_order, soc_options);
  }
  if (!result.first_order.pass ||
      (result.first_order.multipliers.has_value() && !result.second_order.pass)) {
    if (result.first_order.feasibility.pass) {
      result.refutation =
          refute_optimality(evaluator, result.trajectory, refute_options);
    }
  }
  return result;
}

}  // namespace ctkkt
