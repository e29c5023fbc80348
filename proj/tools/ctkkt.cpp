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

// Command-line interface: certify or refute candidate trajectories of
// continuous-time problems, solve for candidates pointwise, and run the
// randomized self-checks.
//
// Exit codes for `check`: 0 certified, 2 cq_failed, 3 first- or second-order
// conditions failed, 4 refuted, 5 infeasible, 1 usage/IO error.
// `solve` exits 6 when the pointwise solver fails.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctkkt/errors.hpp"
#include "ctkkt/report.hpp"
#include "ctkkt/selftest.hpp"
#include "ctkkt/solver.hpp"

namespace {

using namespace ctkkt;

struct CommonFlags {
  int grid = 201;
  double tol_stat = -1.0;
  double tol_psd = 1e-8;
  double k_min = 1e-8;
  double eps_act = -1.0;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--grid", flags->grid, "Number of grid nodes")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  cmd->add_option("--tol-stat", flags->tol_stat,
                  "Absolute stationarity tolerance (default: 1e-7*(1+sup||grad phi||))");
  cmd->add_option("--tol-psd", flags->tol_psd,
                  "Relative projected-Hessian tolerance coefficient")
      ->capture_default_str();
  cmd->add_option("--kmin", flags->k_min, "Gram determinant floor for regularity")
      ->capture_default_str();
  cmd->add_option("--eps-act", flags->eps_act,
                  "Active-set band (default: 1e-6*(1+|g| scale) per point)");
  cmd->add_flag("--json", flags->json, "Emit the JSON certificate instead of text");
}

CheckOptions make_check_options(const CommonFlags& flags) {
  CheckOptions options;
  options.grid_nodes = flags.grid;
  options.certify.tol_stat = flags.tol_stat;
  options.certify.k_min = flags.k_min;
  options.certify.eps_act = flags.eps_act;
  options.soc.tol_psd_rel = flags.tol_psd;
  options.soc.eps_act = flags.eps_act;
  options.refute.eps_act = flags.eps_act;
  return options;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Splits a --candidate value on commas and parses each piece as an
// expression in t.
CandidateExprs parse_candidate_flag(const std::string& value, int n) {
  CandidateExprs candidate;
  std::string piece;
  std::istringstream stream(value);
  while (std::getline(stream, piece, ',')) {
    candidate.z_text.push_back(piece);
    candidate.z.push_back(parse_expr(piece, 0));
  }
  if (static_cast<int>(candidate.z.size()) != n) {
    throw Error("--candidate has " + std::to_string(candidate.z.size()) +
                " components but the problem has n=" + std::to_string(n));
  }
  return candidate;
}

void emit(const CertificateDocument& doc, bool json) {
  if (json) {
    std::cout << to_json(doc).dump(2) << "\n";
  } else {
    std::cout << to_text(doc);
  }
}

int cmd_check(const std::string& path, const CommonFlags& flags,
              const std::string& candidate_flag) {
  const std::string text = read_file(path);
  const LoadResult loaded = load_problem(text);

  std::optional<CandidateExprs> candidate = loaded.candidate;
  if (!candidate_flag.empty()) {
    candidate = parse_candidate_flag(candidate_flag, loaded.problem.n);
  }
  if (!candidate.has_value()) {
    throw Error("no candidate trajectory: provide one in the problem file or "
                "via --candidate");
  }

  const ProblemEvaluator evaluator(loaded.problem);
  const TimeGrid grid = build_grid(loaded.problem.horizon, flags.grid);
  const Trajectory trajectory = sample_candidate(*candidate, grid);

  CertificateDocument doc = run_check(evaluator, trajectory, make_check_options(flags));
  doc.problem_hash = fnv1a64_hex(text);
  emit(doc, flags.json);
  return exit_code(doc.verdict);
}

int cmd_solve(const std::string& path, const CommonFlags& flags,
              std::uint64_t seed, int starts, const std::string& out_path) {
  const std::string text = read_file(path);
  const LoadResult loaded = load_problem(text);
  const ProblemEvaluator evaluator(loaded.problem);
  const TimeGrid grid = build_grid(loaded.problem.horizon, flags.grid);

  const CheckOptions check_options = make_check_options(flags);
  SolveOptions solve_options;
  solve_options.seed = seed;
  solve_options.starts = starts;

  CertifiedSolveResult result;
  try {
    result = certified_solve(evaluator, grid, solve_options, check_options.certify,
                             check_options.soc, check_options.refute);
  } catch (const SolveError& err) {
    std::cerr << "solver failure: " << err.what() << "\n";
    return 6;
  }

  CertificateDocument doc;
  doc.problem_name = loaded.problem.name;
  doc.problem_hash = fnv1a64_hex(text);
  doc.n = loaded.problem.n;
  doc.p = loaded.problem.p();
  doc.m = loaded.problem.m();
  doc.horizon = loaded.problem.horizon;
  doc.grid_nodes = grid.size();
  doc.first_order = result.first_order;
  doc.second_order = result.second_order;
  doc.refutation = result.refutation;
  if (doc.first_order.pass && doc.second_order.has_value() &&
      doc.second_order->pass) {
    doc.verdict = Verdict::kCertified;
  } else if (doc.refutation.has_value()) {
    doc.verdict = Verdict::kRefuted;
  } else if (!doc.first_order.feasibility.pass) {
    doc.verdict = Verdict::kInfeasible;
  } else if (!doc.first_order.cq_pass) {
    doc.verdict = Verdict::kCqFailed;
  } else if (!doc.first_order.pass) {
    doc.verdict = Verdict::kFirstOrderFailed;
  } else {
    doc.verdict = Verdict::kSecondOrderFailed;
  }

  const MultiplierTrajectory* multipliers =
      doc.first_order.multipliers.has_value() ? &*doc.first_order.multipliers
                                              : nullptr;
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write trajectory file '" + out_path + "'");
  out << trajectory_csv(result.trajectory, multipliers);
  out.close();

  if (flags.json) {
    nlohmann::ordered_json j = to_json(doc);
    j["solve"] = {{"objective", result.objective},
                  {"trajectory_file", out_path},
                  {"seed", seed},
                  {"starts", starts}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << to_text(doc);
    std::cout << "objective: " << result.objective << "\n";
    std::cout << "trajectory written to " << out_path << "\n";
  }
  return 0;
}

int cmd_selftest() {
  const SweepResult sweeps[] = {
      derivative_fd_sweep(1000, 20260810),
      inverse_norm_bound_sweep(500, 20260811),
      increase_direction_sweep(200, 20260812),
  };
  bool all_pass = true;
  for (const SweepResult& sweep : sweeps) {
    std::cout << (sweep.pass() ? "PASS" : "FAIL") << " " << sweep.name << " ("
              << sweep.total << " samples, " << sweep.failures
              << " failures, max error " << sweep.max_error << ")\n";
    if (!sweep.pass()) all_pass = false;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify, refute or solve continuous-time optimization problems"};
  app.require_subcommand(1);

  CommonFlags check_flags;
  std::string check_path;
  std::string candidate_flag;
  CLI::App* check = app.add_subcommand(
      "check", "Certify or refute a candidate trajectory");
  check->add_option("problem", check_path, "Problem file")->required();
  add_common(check, &check_flags);
  check->add_option("--candidate", candidate_flag,
                    "Candidate z as comma-separated expressions in t");

  CommonFlags solve_flags;
  std::string solve_path;
  std::string out_path = "trajectory.csv";
  std::uint64_t seed = 0;
  int starts = 16;
  CLI::App* solve =
      app.add_subcommand("solve", "Solve pointwise and certify the result");
  solve->add_option("problem", solve_path, "Problem file")->required();
  add_common(solve, &solve_flags);
  solve->add_option("--seed", seed, "Random seed")->capture_default_str();
  solve->add_option("--starts", starts, "Random starts per node")
      ->check(CLI::Range(1, 10000))
      ->capture_default_str();
  solve->add_option("--out", out_path, "Trajectory CSV output path")
      ->capture_default_str();

  CLI::App* selftest =
      app.add_subcommand("selftest", "Run the randomized self-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(check_path, check_flags, candidate_flag);
    if (solve->parsed()) {
      return cmd_solve(solve_path, solve_flags, seed, starts, out_path);
    }
    if (selftest->parsed()) return cmd_selftest();
  } catch (const ctkkt::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
