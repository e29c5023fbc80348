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

// Randomized self-checks runnable from the CLI: symbolic derivatives against
// central finite differences, the inverse-norm bound against explicitly
// inverted matrices, and the raising-direction conditions against direct
// inner products.

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "ctkkt/expr.hpp"

namespace ctkkt {

struct SweepResult {
  std::string name;
  int total = 0;
  int failures = 0;
  double max_error = 0.0;
  bool pass() const { return failures == 0 && total > 0; }
};

/// Random expression of depth at most `max_depth` over z1..zn and t.
Expr random_expr(std::mt19937_64& rng, int n, int max_depth);

/// Gradient and Hessian entries against central finite differences
/// (step 1e-6) at random in-domain points; relative tolerance
/// 1e-5 * (1 + |value|). Also asserts node-for-node Hessian symmetry.
SweepResult derivative_fd_sweep(int count, std::uint64_t seed);

/// Explicitly inverted random square matrices against the L^(p-1)/K bound,
/// with K and L taken from each matrix's own singular values; checked with
/// no tolerance.
SweepResult inverse_norm_bound_sweep(int count, std::uint64_t seed);

/// increase_direction on random well-conditioned active systems: tangency to
/// equalities and other active inequalities, unit raising rate on the chosen
/// one, all within 1e-9.
SweepResult increase_direction_sweep(int count, std::uint64_t seed);

}  // namespace ctkkt
