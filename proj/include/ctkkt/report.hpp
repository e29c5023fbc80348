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

// Certificate assembly and serialization. The check pipeline (feasibility,
// regularity, first order, second order, refutation on failure) produces one
// CertificateDocument; the JSON and text renderings both derive from it.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctkkt/certify.hpp"
#include "ctkkt/improve.hpp"
#include "ctkkt/problem.hpp"
#include "ctkkt/soc.hpp"

namespace ctkkt {

inline constexpr const char* kToolName = "ctkkt";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Verdict {
  kCertified,
  kCqFailed,
  kFirstOrderFailed,
  kSecondOrderFailed,
  kRefuted,
  kInfeasible,
};

const char* to_string(Verdict verdict);

/// Process exit code contract: 0 certified, 2 cq_failed, 3 first- or
/// second-order failed, 4 refuted, 5 infeasible (1 is reserved for usage/IO).
int exit_code(Verdict verdict);

struct CheckOptions {
  int grid_nodes = 201;
  CertifyOptions certify;
  SocOptions soc;
  RefuteOptions refute;
  std::vector<int> sample_nodes;  // empty selects {0, N/2, N-1}
};

struct MultiplierSample {
  int node = 0;
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

struct CertificateDocument {
  std::string problem_name;
  std::string problem_hash;  // empty when the problem did not come from a file
  int n = 0;
  int p = 0;
  int m = 0;
  double horizon = 0.0;
  int grid_nodes = 0;

  FirstOrderCertificate first_order;  // embeds the feasibility report
  std::optional<SecondOrderCertificate> second_order;
  std::optional<RefutationWitness> refutation;
  std::vector<MultiplierSample> samples;

  Verdict verdict = Verdict::kInfeasible;
  std::vector<std::string> notes;  // certification caveats
};

/// Runs the full check pipeline on a candidate trajectory.
CertificateDocument run_check(const ProblemEvaluator& evaluator,
                              const Trajectory& trajectory,
                              const CheckOptions& options = {});

nlohmann::ordered_json to_json(const CertificateDocument& document);
std::string to_text(const CertificateDocument& document);

/// Trajectory CSV with fixed column order t, z1..zn, u1..up, v1..vm.
std::string trajectory_csv(const Trajectory& trajectory,
                           const MultiplierTrajectory* multipliers);

/// FNV-1a (64-bit) of a byte string, formatted "fnv1a64:<16 hex digits>".
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace ctkkt
