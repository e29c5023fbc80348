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

#include "ctkkt/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctkkt/errors.hpp"

namespace ctkkt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Problem-file parsing. The format is a restricted key-value text format
// (a TOML-compatible subset): [problem] and [candidate] tables, repeated
// [[equality]] / [[inequality]] entries, string/integer/float values and
// single-line arrays of strings.

namespace {

std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

// Strips a trailing comment that starts outside of any quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

struct Value {
  enum class Type { kString, kNumber, kStringArray } type;
  std::string str;
  double num = 0.0;
  std::vector<std::string> array;
};

Value parse_value(std::string_view raw, int line_no) {
  raw = trim(raw);
  if (raw.empty()) throw FormatError("missing value", line_no);

  Value v;
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      throw FormatError("unterminated string value", line_no);
    }
    const std::string_view body = raw.substr(1, raw.size() - 2);
    if (body.find('"') != std::string_view::npos) {
      throw FormatError("unexpected '\"' inside string value", line_no);
    }
    v.type = Value::Type::kString;
    v.str = std::string(body);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      throw FormatError("array value must open and close on one line", line_no);
    }
    v.type = Value::Type::kStringArray;
    std::string_view body = trim(raw.substr(1, raw.size() - 2));
    while (!body.empty()) {
      if (body.front() != '"') {
        throw FormatError("array entries must be quoted strings", line_no);
      }
      const size_t close = body.find('"', 1);
      if (close == std::string_view::npos) {
        throw FormatError("unterminated string in array", line_no);
      }
      v.array.emplace_back(body.substr(1, close - 1));
      body = trim(body.substr(close + 1));
      if (!body.empty()) {
        if (body.front() != ',') {
          throw FormatError("expected ',' between array entries", line_no);
        }
        body = trim(body.substr(1));
        if (body.empty()) {
          throw FormatError("trailing ',' in array", line_no);
        }
      }
    }
    return v;
  }

  v.type = Value::Type::kNumber;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v.num);
  if (res.ec != std::errc() || res.ptr != raw.data() + raw.size()) {
    throw FormatError("malformed value '" + std::string(raw) + "'", line_no);
  }
  return v;
}

int require_int(const Value& v, const std::string& key, int line_no) {
  if (v.type != Value::Type::kNumber || v.num != std::floor(v.num)) {
    throw FormatError("key '" + key + "' must be an integer", line_no);
  }
  return static_cast<int>(v.num);
}

double require_number(const Value& v, const std::string& key, int line_no) {
  if (v.type != Value::Type::kNumber) {
    throw FormatError("key '" + key + "' must be a number", line_no);
  }
  return v.num;
}

std::string require_string(const Value& v, const std::string& key, int line_no) {
  if (v.type != Value::Type::kString) {
    throw FormatError("key '" + key + "' must be a quoted string", line_no);
  }
  return v.str;
}

Expr parse_field_expr(const std::string& text, int n, const std::string& what,
                      int line_no) {
  try {
    return parse_expr(text, n);
  } catch (const ParseError& err) {
    throw FormatError(what + ": " + err.what(), line_no);
  }
}

}  // namespace

LoadResult load_problem(std::string_view text) {
  enum class Section { kNone, kProblem, kEquality, kInequality, kCandidate };

  struct Pending {
    std::optional<std::string> name;
    std::optional<int> n;
    std::optional<double> horizon;
    std::optional<std::string> objective;
    int problem_line = 0;
    int objective_line = 0;
  } pending;

  struct ConstraintEntry {
    std::optional<std::string> expr;
    int line = 0;
  };
  std::vector<ConstraintEntry> equalities;
  std::vector<ConstraintEntry> inequalities;
  std::optional<std::vector<std::string>> candidate_texts;
  int candidate_line = 0;

  bool seen_problem = false;
  bool seen_candidate = false;
  Section section = Section::kNone;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    const std::string_view raw_line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::string_view line = trim(strip_comment(raw_line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[[equality]]") {
        section = Section::kEquality;
        equalities.push_back({std::nullopt, line_no});
      } else if (line == "[[inequality]]") {
        section = Section::kInequality;
        inequalities.push_back({std::nullopt, line_no});
      } else if (line == "[problem]") {
        if (seen_problem) throw FormatError("duplicate [problem] section", line_no);
        seen_problem = true;
        section = Section::kProblem;
        pending.problem_line = line_no;
      } else if (line == "[candidate]") {
        if (seen_candidate) throw FormatError("duplicate [candidate] section", line_no);
        seen_candidate = true;
        section = Section::kCandidate;
        candidate_line = line_no;
      } else {
        throw FormatError("unknown section '" + std::string(line) + "'", line_no);
      }
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("expected 'key = value'", line_no);
    }
    const std::string key{trim(line.substr(0, eq))};
    const Value value = parse_value(line.substr(eq + 1), line_no);

    switch (section) {
      case Section::kNone:
        throw FormatError("key outside of any section", line_no);
      case Section::kProblem:
        if (key == "name") {
          if (pending.name) throw FormatError("duplicate key 'name'", line_no);
          pending.name = require_string(value, key, line_no);
        } else if (key == "n") {
          if (pending.n) throw FormatError("duplicate key 'n'", line_no);
          pending.n = require_int(value, key, line_no);
        } else if (key == "T") {
          if (pending.horizon) throw FormatError("duplicate key 'T'", line_no);
          pending.horizon = require_number(value, key, line_no);
        } else if (key == "objective") {
          if (pending.objective) throw FormatError("duplicate key 'objective'", line_no);
          pending.objective = require_string(value, key, line_no);
          pending.objective_line = line_no;
        } else {
          throw FormatError("unknown key '" + key + "' in [problem]", line_no);
        }
        break;
      case Section::kEquality:
      case Section::kInequality: {
        auto& entry = section == Section::kEquality ? equalities.back()
                                                    : inequalities.back();
        if (key != "expr") {
          throw FormatError("unknown key '" + key + "' in constraint entry", line_no);
        }
        if (entry.expr) throw FormatError("duplicate key 'expr'", line_no);
        entry.expr = require_string(value, key, line_no);
        break;
      }
      case Section::kCandidate:
        if (key != "z") {
          throw FormatError("unknown key '" + key + "' in [candidate]", line_no);
        }
        if (candidate_texts) throw FormatError("duplicate key 'z'", line_no);
        if (value.type != Value::Type::kStringArray) {
          throw FormatError("candidate z must be an array of expression strings",
                            line_no);
        }
        candidate_texts = value.array;
        candidate_line = line_no;
        break;
    }
  }

  if (!seen_problem) throw FormatError("missing [problem] section", line_no);
  if (!pending.name) throw FormatError("missing key 'name'", pending.problem_line);
  if (!pending.n) throw FormatError("missing key 'n'", pending.problem_line);
  if (!pending.horizon) throw FormatError("missing key 'T'", pending.problem_line);
  if (!pending.objective) {
    throw FormatError("missing key 'objective'", pending.problem_line);
  }

  LoadResult out;
  Problem& problem = out.problem;
  problem.name = *pending.name;
  problem.n = *pending.n;
  problem.horizon = *pending.horizon;
  if (problem.n < 1) throw FormatError("n must be >= 1", pending.problem_line);
  if (!(problem.horizon > 0.0)) {
    throw FormatError("T must be > 0", pending.problem_line);
  }

  problem.objective_text = *pending.objective;
  problem.objective =
      parse_field_expr(problem.objective_text, problem.n, "objective",
                       pending.objective_line);

  for (const auto& entry : equalities) {
    if (!entry.expr) throw FormatError("constraint entry missing 'expr'", entry.line);
    problem.equality_text.push_back(*entry.expr);
    problem.equality.push_back(
        parse_field_expr(*entry.expr, problem.n, "equality expression", entry.line));
  }
  for (const auto& entry : inequalities) {
    if (!entry.expr) throw FormatError("constraint entry missing 'expr'", entry.line);
    problem.inequality_text.push_back(*entry.expr);
    problem.inequality.push_back(parse_field_expr(
        *entry.expr, problem.n, "inequality expression", entry.line));
  }

  if (problem.p() > problem.n) {
    throw FormatError("equality count p=" + std::to_string(problem.p()) +
                          " exceeds state dimension n=" + std::to_string(problem.n),
                      pending.problem_line);
  }

  if (seen_candidate) {
    if (!candidate_texts) {
      throw FormatError("[candidate] section missing key 'z'", candidate_line);
    }
    if (static_cast<int>(candidate_texts->size()) != problem.n) {
      throw FormatError(
          "candidate z has " + std::to_string(candidate_texts->size()) +
              " entries but n=" + std::to_string(problem.n),
          candidate_line);
    }
    CandidateExprs candidate;
    candidate.z_text = *candidate_texts;
    for (const std::string& entry : candidate.z_text) {
      // Candidate components are functions of t only.
      candidate.z.push_back(
          parse_field_expr(entry, 0, "candidate expression", candidate_line));
    }
    out.candidate = std::move(candidate);
  }

  return out;
}

LoadResult load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open problem file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_problem(buffer.str());
}

std::string save_problem(const Problem& problem, const CandidateExprs* candidate) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "name = \"" << problem.name << "\"\n";
  out << "n = " << problem.n << "\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  out << "T = " << fmt(problem.horizon) << "\n";
  out << "objective = \"" << problem.objective_text << "\"\n";
  for (const std::string& text : problem.equality_text) {
    out << "\n[[equality]]\nexpr = \"" << text << "\"\n";
  }
  for (const std::string& text : problem.inequality_text) {
    out << "\n[[inequality]]\nexpr = \"" << text << "\"\n";
  }
  if (candidate != nullptr) {
    out << "\n[candidate]\nz = [";
    for (size_t i = 0; i < candidate->z_text.size(); ++i) {
      if (i > 0) out << ", ";
      out << '"' << candidate->z_text[i] << '"';
    }
    out << "]\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Grid and quadrature

TimeGrid build_grid(double horizon, int node_count) {
  if (node_count < 2) throw Error("grid needs at least 2 nodes");
  if (!(horizon > 0.0)) throw Error("horizon must be > 0");

  TimeGrid grid;
  grid.horizon = horizon;
  grid.nodes.resize(node_count);
  grid.weights.resize(node_count);
  const double step = horizon / static_cast<double>(node_count - 1);
  for (int k = 0; k < node_count; ++k) {
    grid.nodes(k) = step * static_cast<double>(k);
    grid.weights(k) = step;
  }
  grid.nodes(node_count - 1) = horizon;
  grid.weights(0) = 0.5 * step;
  grid.weights(node_count - 1) = 0.5 * step;
  return grid;
}

double integrate(const TimeGrid& grid, const Eigen::VectorXd& node_values) {
  if (node_values.size() != grid.nodes.size()) {
    throw DimensionError("integrate: " + std::to_string(node_values.size()) +
                         " values for " + std::to_string(grid.nodes.size()) +
                         " nodes");
  }
  double sum = 0.0;
  for (int k = 0; k < node_values.size(); ++k) {
    sum += grid.weights(k) * node_values(k);
  }
  return sum;
}

Trajectory::Trajectory(TimeGrid grid_in, Eigen::MatrixXd values_in)
    : grid(std::move(grid_in)), values(std::move(values_in)) {
  if (values.rows() != grid.nodes.size()) {
    throw DimensionError("trajectory has " + std::to_string(values.rows()) +
                         " rows for a grid of " +
                         std::to_string(grid.nodes.size()) + " nodes");
  }
}

Trajectory sample_candidate(const CandidateExprs& candidate, const TimeGrid& grid) {
  const int n = static_cast<int>(candidate.z.size());
  Eigen::MatrixXd values(grid.size(), n);
  for (int k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      values(k, i) = eval_expr(candidate.z[static_cast<size_t>(i)], {}, grid.nodes(k));
    }
  }
  Trajectory trajectory(grid, std::move(values));
  trajectory.defining = candidate;
  return trajectory;
}

Trajectory constant_trajectory(const Eigen::VectorXd& z0, const TimeGrid& grid) {
  Eigen::MatrixXd values(grid.size(), z0.size());
  values.rowwise() = z0.transpose();
  return Trajectory(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Pointwise evaluation

bool PointEval::is_active(int j) const {
  return std::binary_search(active.begin(), active.end(), j);
}

ProblemEvaluator::ProblemEvaluator(Problem problem) : problem_(std::move(problem)) {
  const int n = problem_.n;
  grad_phi_ = gradient(problem_.objective, n);
  hess_phi_ = hessian(problem_.objective, n);
  for (const Expr& h : problem_.equality) {
    grad_h_.push_back(gradient(h, n));
    hess_h_.push_back(hessian(h, n));
  }
  for (const Expr& g : problem_.inequality) {
    grad_g_.push_back(gradient(g, n));
    hess_g_.push_back(hessian(g, n));
  }
}

namespace {

Eigen::VectorXd eval_vector(const std::vector<Expr>& exprs,
                            std::span<const double> z, double t) {
  Eigen::VectorXd out(static_cast<int>(exprs.size()));
  for (size_t i = 0; i < exprs.size(); ++i) {
    out(static_cast<int>(i)) = eval_expr(exprs[i], z, t);
  }
  return out;
}

Eigen::MatrixXd eval_matrix(const std::vector<std::vector<Expr>>& exprs,
                            std::span<const double> z, double t) {
  const int rows = static_cast<int>(exprs.size());
  const int cols = rows > 0 ? static_cast<int>(exprs[0].size()) : 0;
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) = eval_expr(exprs[static_cast<size_t>(i)][static_cast<size_t>(j)], z, t);
    }
  }
  return out;
}

}  // namespace

PointEval ProblemEvaluator::evaluate(const Eigen::VectorXd& z, double t,
                                     double eps_act) const {
  if (z.size() != problem_.n) {
    throw DimensionError("evaluate: state has " + std::to_string(z.size()) +
                         " entries but n=" + std::to_string(problem_.n));
  }
  const std::span<const double> zs(z.data(), static_cast<size_t>(z.size()));
  const int n = problem_.n;
  const int p = problem_.p();
  const int m = problem_.m();

  PointEval pe;
  pe.t = t;
  pe.z = z;
  pe.phi = eval_expr(problem_.objective, zs, t);
  pe.grad_phi = eval_vector(grad_phi_, zs, t);
  pe.hess_phi = eval_matrix(hess_phi_, zs, t);

  pe.h.resize(p);
  pe.grad_h.resize(p, n);
  pe.hess_h.reserve(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) {
    try {
      pe.h(i) = eval_expr(problem_.equality[static_cast<size_t>(i)], zs, t);
      pe.grad_h.row(i) = eval_vector(grad_h_[static_cast<size_t>(i)], zs, t);
      pe.hess_h.push_back(eval_matrix(hess_h_[static_cast<size_t>(i)], zs, t));
    } catch (const EvalError& err) {
      throw EvalError("equality constraint " + std::to_string(i + 1) + ": " +
                          err.what(),
                      -1);
    }
  }

  pe.g.resize(m);
  pe.grad_g.resize(m, n);
  pe.hess_g.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    try {
      pe.g(j) = eval_expr(problem_.inequality[static_cast<size_t>(j)], zs, t);
      pe.grad_g.row(j) = eval_vector(grad_g_[static_cast<size_t>(j)], zs, t);
      pe.hess_g.push_back(eval_matrix(hess_g_[static_cast<size_t>(j)], zs, t));
    } catch (const EvalError& err) {
      throw EvalError("inequality constraint " + std::to_string(j + 1) + ": " +
                          err.what(),
                      -1);
    }
  }

  if (eps_act < 0.0) {
    const double g_scale = m > 0 ? pe.g.cwiseAbs().maxCoeff() : 0.0;
    eps_act = 1e-6 * (1.0 + g_scale);
  }
  pe.eps_act = eps_act;
  for (int j = 0; j < m; ++j) {
    if (pe.g(j) <= eps_act) pe.active.push_back(j);
  }
  return pe;
}

FirstOrderEval ProblemEvaluator::evaluate_first_order(const Eigen::VectorXd& z,
                                                      double t) const {
  const std::span<const double> zs(z.data(), static_cast<size_t>(z.size()));
  FirstOrderEval fe;
  fe.phi = eval_expr(problem_.objective, zs, t);
  fe.grad_phi = eval_vector(grad_phi_, zs, t);
  const int p = problem_.p();
  const int m = problem_.m();
  fe.h.resize(p);
  fe.grad_h.resize(p, problem_.n);
  for (int i = 0; i < p; ++i) {
    fe.h(i) = eval_expr(problem_.equality[static_cast<size_t>(i)], zs, t);
    fe.grad_h.row(i) = eval_vector(grad_h_[static_cast<size_t>(i)], zs, t);
  }
  fe.g.resize(m);
  fe.grad_g.resize(m, problem_.n);
  for (int j = 0; j < m; ++j) {
    fe.g(j) = eval_expr(problem_.inequality[static_cast<size_t>(j)], zs, t);
    fe.grad_g.row(j) = eval_vector(grad_g_[static_cast<size_t>(j)], zs, t);
  }
  return fe;
}

double ProblemEvaluator::objective_value(const Trajectory& trajectory) const {
  const int N = trajectory.grid.size();
  Eigen::VectorXd values(N);
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd z = trajectory.values.row(k).transpose();
    const std::span<const double> zs(z.data(), static_cast<size_t>(z.size()));
    values(k) = eval_expr(problem_.objective, zs, trajectory.grid.nodes(k));
  }
  return integrate(trajectory.grid, values);
}

PointEval evaluate_point(const Problem& problem, const Eigen::VectorXd& z,
                         double t, double eps_act) {
  return ProblemEvaluator(problem).evaluate(z, t, eps_act);
}

// ---------------------------------------------------------------------------

FeasibilityReport check_feasibility(const ProblemEvaluator& evaluator,
                                    const Trajectory& trajectory, double tol_eq,
                                    double tol_ineq) {
  const Problem& problem = evaluator.problem();
  const int p = problem.p();
  const int m = problem.m();
  const int N = trajectory.grid.size();

  FeasibilityReport report;
  report.tol_eq = tol_eq;
  report.tol_ineq = tol_ineq;
  report.max_abs_h = 0.0;
  report.min_g = kInf;  // stays +inf when m = 0
  report.worst_equality.resize(static_cast<size_t>(p));
  report.worst_inequality.resize(static_cast<size_t>(m));
  for (int i = 0; i < p; ++i) report.worst_equality[static_cast<size_t>(i)].constraint = i;
  for (int j = 0; j < m; ++j) report.worst_inequality[static_cast<size_t>(j)].constraint = j;

  bool first = true;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd z = trajectory.values.row(k).transpose();
    const double t = trajectory.grid.nodes(k);
    const std::span<const double> zs(z.data(), static_cast<size_t>(z.size()));
    for (int i = 0; i < p; ++i) {
      const double value = eval_expr(problem.equality[static_cast<size_t>(i)], zs, t);
      auto& worst = report.worst_equality[static_cast<size_t>(i)];
      if (first || std::abs(value) > std::abs(worst.value)) {
        worst.node = k;
        worst.t = t;
        worst.value = value;
      }
      report.max_abs_h = std::max(report.max_abs_h, std::abs(value));
    }
    for (int j = 0; j < m; ++j) {
      const double value = eval_expr(problem.inequality[static_cast<size_t>(j)], zs, t);
      auto& worst = report.worst_inequality[static_cast<size_t>(j)];
      if (first || value < worst.value) {
        worst.node = k;
        worst.t = t;
        worst.value = value;
      }
      report.min_g = std::min(report.min_g, value);
    }
    first = false;
  }

  report.pass = report.max_abs_h <= tol_eq && report.min_g >= -tol_ineq;
  return report;
}

}  // namespace ctkkt
