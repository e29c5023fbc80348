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

#include "ctkkt/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ctkkt {

using nlohmann::ordered_json;

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kCertified: return "certified";
    case Verdict::kCqFailed: return "cq_failed";
    case Verdict::kFirstOrderFailed: return "first_order_failed";
    case Verdict::kSecondOrderFailed: return "second_order_failed";
    case Verdict::kRefuted: return "refuted";
    case Verdict::kInfeasible: return "infeasible";
  }
  return "?";
}

int exit_code(Verdict verdict) {
  switch (verdict) {
    case Verdict::kCertified: return 0;
    case Verdict::kCqFailed: return 2;
    case Verdict::kFirstOrderFailed: return 3;
    case Verdict::kSecondOrderFailed: return 3;
    case Verdict::kRefuted: return 4;
    case Verdict::kInfeasible: return 5;
  }
  return 1;
}

CertificateDocument run_check(const ProblemEvaluator& evaluator,
                              const Trajectory& trajectory,
                              const CheckOptions& options) {
  const Problem& problem = evaluator.problem();

  CertificateDocument doc;
  doc.problem_name = problem.name;
  doc.n = problem.n;
  doc.p = problem.p();
  doc.m = problem.m();
  doc.horizon = problem.horizon;
  doc.grid_nodes = trajectory.grid.size();
  doc.notes = {
      "conditions are checked on a finite grid; violations confined to sets "
      "that miss every node are not detectable",
      "smoothness and modulus-of-continuity hypotheses are assumed of the "
      "problem expressions, not verified",
  };

  doc.first_order = first_order_certificate(evaluator, trajectory, options.certify);
  if (!doc.first_order.feasibility.pass) {
    doc.verdict = Verdict::kInfeasible;
    return doc;
  }

  doc.second_order = second_order_certificate(evaluator, trajectory,
                                              doc.first_order, options.soc);

  if (doc.first_order.multipliers.has_value()) {
    std::vector<int> nodes = options.sample_nodes;
    if (nodes.empty()) {
      nodes = {0, trajectory.grid.size() / 2, trajectory.grid.size() - 1};
    }
    for (int node : nodes) {
      if (node < 0 || node >= trajectory.grid.size()) continue;
      MultiplierSample sample;
      sample.node = node;
      sample.t = trajectory.grid.nodes(node);
      sample.u = doc.first_order.multipliers->u.row(node).transpose();
      sample.v = doc.first_order.multipliers->v.row(node).transpose();
      doc.samples.push_back(std::move(sample));
    }
  }

  if (doc.first_order.pass && doc.second_order->pass) {
    doc.verdict = Verdict::kCertified;
    return doc;
  }

  doc.refutation = refute_optimality(evaluator, trajectory, options.refute);
  if (doc.refutation.has_value()) {
    doc.verdict = Verdict::kRefuted;
  } else if (!doc.first_order.cq_pass) {
    doc.verdict = Verdict::kCqFailed;
  } else if (!doc.first_order.pass) {
    doc.verdict = Verdict::kFirstOrderFailed;
  } else {
    doc.verdict = Verdict::kSecondOrderFailed;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // +/-inf and NaN have no JSON representation
}

ordered_json vec(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(num(v(i)));
  return arr;
}

ordered_json feasibility_json(const FeasibilityReport& report) {
  ordered_json j;
  j["pass"] = report.pass;
  j["max_abs_h"] = num(report.max_abs_h);
  j["min_g"] = num(report.min_g);
  j["tol_eq"] = report.tol_eq;
  j["tol_ineq"] = report.tol_ineq;
  auto worst = [](const std::vector<FeasibilityReport::Worst>& entries) {
    ordered_json arr = ordered_json::array();
    for (const auto& w : entries) {
      arr.push_back({{"constraint", w.constraint + 1},
                     {"node", w.node},
                     {"t", num(w.t)},
                     {"value", num(w.value)}});
    }
    return arr;
  };
  j["worst_equality"] = worst(report.worst_equality);
  j["worst_inequality"] = worst(report.worst_inequality);
  return j;
}

ordered_json cq_json(const CQReport& report) {
  ordered_json j;
  j["kind"] = to_string(report.kind);
  j["pass"] = report.pass;
  j["vacuous"] = report.vacuous;
  j["infimum_det"] = num(report.infimum);
  j["k_min"] = report.k_min;
  j["worst_node"] = report.worst_node;
  j["worst_t"] = num(report.worst_t);
  j["rank_min"] = report.rank_min;
  j["rank_max"] = report.rank_max;
  if (!report.node_active_count.empty()) {
    int amin = report.node_active_count.front();
    int amax = amin;
    for (int c : report.node_active_count) {
      amin = std::min(amin, c);
      amax = std::max(amax, c);
    }
    j["active_count_min"] = amin;
    j["active_count_max"] = amax;
  }
  return j;
}

ordered_json first_order_json(const FirstOrderCertificate& cert) {
  ordered_json j;
  j["pass"] = cert.pass;
  j["max_stationarity_residual"] = num(cert.max_stationarity_residual);
  j["max_complementarity"] = num(cert.max_complementarity);
  j["min_multiplier"] = num(cert.min_multiplier);
  j["sup_norm_u"] = num(cert.sup_norm_u);
  j["sup_norm_v"] = num(cert.sup_norm_v);
  j["multiplier_bound"] = num(cert.multiplier_bound);
  j["bound_holds"] = cert.bound_holds;
  j["tol_stat"] = num(cert.tol_stat);
  j["tol_comp"] = num(cert.tol_comp);
  j["tol_sign"] = num(cert.tol_sign);
  j["sup_grad_phi"] = num(cert.sup_grad_phi);
  j["nonunique_nodes"] = cert.nonunique_nodes;
  j["stationarity_pass"] = cert.stationarity_pass;
  j["sign_pass"] = cert.sign_pass;
  j["complementarity_pass"] = cert.complementarity_pass;
  return j;
}

ordered_json second_order_json(const SecondOrderCertificate& cert) {
  ordered_json j;
  j["pass"] = cert.pass;
  j["worst_eigenvalue"] = num(cert.worst_eigenvalue);
  j["worst_node"] = cert.worst_node;
  j["worst_t"] = num(cert.worst_t);
  j["tol_psd"] = num(cert.tol_psd);
  j["checked_nodes"] = cert.checked_nodes;
  j["vacuous_nodes"] = cert.vacuous_nodes;
  j["skipped_nodes"] = cert.skipped_nodes;
  j["active_set_sensitive_nodes"] = cert.active_set_sensitive_nodes;
  return j;
}

ordered_json refutation_json(const RefutationWitness& witness) {
  ordered_json j;
  j["source"] = witness.source;
  j["constraint"] =
      witness.constraint >= 0 ? ordered_json(witness.constraint + 1) : nullptr;
  j["ascent_integral"] = num(witness.ascent_integral);
  j["step"] = num(witness.step);
  j["objective_before"] = num(witness.objective_before);
  j["objective_after"] = num(witness.objective_after);
  j["objective_gain"] = num(witness.objective_gain);
  j["direction_sup_norm"] = num(witness.direction_sup_norm);
  j["improved_feasible"] = witness.improved_feasibility.pass;
  return j;
}

}  // namespace

ordered_json to_json(const CertificateDocument& doc) {
  ordered_json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["problem"] = {{"name", doc.problem_name},
                  {"hash", doc.problem_hash.empty()
                               ? ordered_json(nullptr)
                               : ordered_json(doc.problem_hash)},
                  {"n", doc.n},
                  {"p", doc.p},
                  {"m", doc.m},
                  {"T", num(doc.horizon)}};
  j["grid"] = {{"nodes", doc.grid_nodes}, {"T", num(doc.horizon)}};
  j["feasibility"] = feasibility_json(doc.first_order.feasibility);

  if (doc.first_order.feasibility.pass) {
    j["cq"] = {{"h4", cq_json(doc.first_order.h4)},
               {"h7", cq_json(doc.first_order.h7)},
               {"licq_active", cq_json(doc.first_order.licq_active)}};
    ordered_json fo = first_order_json(doc.first_order);
    ordered_json samples = ordered_json::array();
    for (const auto& sample : doc.samples) {
      samples.push_back({{"node", sample.node},
                         {"t", num(sample.t)},
                         {"u", vec(sample.u)},
                         {"v", vec(sample.v)}});
    }
    fo["samples"] = std::move(samples);
    j["first_order"] = std::move(fo);
  } else {
    j["cq"] = nullptr;
    j["first_order"] = nullptr;
  }

  j["second_order"] = doc.second_order.has_value()
                          ? second_order_json(*doc.second_order)
                          : ordered_json(nullptr);
  j["refutation"] = doc.refutation.has_value()
                        ? refutation_json(*doc.refutation)
                        : ordered_json(nullptr);
  j["verdict"] = to_string(doc.verdict);
  j["notes"] = doc.notes;
  return j;
}

// ---------------------------------------------------------------------------
// Text

namespace {

const char* pass_str(bool pass) { return pass ? "pass" : "FAIL"; }

void cq_text(std::ostringstream& out, const CQReport& report) {
  out << "  " << to_string(report.kind) << ": ";
  if (report.vacuous) {
    out << "vacuous pass (no constraint rows)\n";
    return;
  }
  out << pass_str(report.pass) << ", inf det(Gram) = " << report.infimum
      << " (floor " << report.k_min << ")"
      << ", rank " << report.rank_min;
  if (report.rank_max != report.rank_min) out << ".." << report.rank_max;
  out << ", worst node " << report.worst_node << " (t=" << report.worst_t << ")\n";
}

}  // namespace

std::string to_text(const CertificateDocument& doc) {
  std::ostringstream out;
  out.precision(12);
  out << kToolName << " " << kToolVersion << " certificate\n";
  out << "problem: " << doc.problem_name << " (n=" << doc.n << ", p=" << doc.p
      << ", m=" << doc.m << ", T=" << doc.horizon << ")";
  if (!doc.problem_hash.empty()) out << " [" << doc.problem_hash << "]";
  out << "\ngrid: " << doc.grid_nodes << " nodes\n";

  const FeasibilityReport& feas = doc.first_order.feasibility;
  out << "feasibility: " << pass_str(feas.pass) << ", max|h| = " << feas.max_abs_h
      << ", min g = " << feas.min_g << "\n";

  if (feas.pass) {
    out << "regularity:\n";
    cq_text(out, doc.first_order.h4);
    cq_text(out, doc.first_order.h7);
    cq_text(out, doc.first_order.licq_active);

    const FirstOrderCertificate& fo = doc.first_order;
    out << "first order: " << pass_str(fo.pass)
        << ", max stationarity residual = " << fo.max_stationarity_residual
        << " (tol " << fo.tol_stat << ")\n";
    out << "  max |v_j g_j| = " << fo.max_complementarity
        << ", min v = " << fo.min_multiplier << ", sup||u|| = " << fo.sup_norm_u
        << ", sup||v|| = " << fo.sup_norm_v << "\n";
    out << "  multiplier bound = " << fo.multiplier_bound
        << (fo.bound_holds ? " (holds)" : " (VIOLATED)") << "\n";
    if (fo.nonunique_nodes > 0) {
      out << "  multipliers non-unique at " << fo.nonunique_nodes << " node(s)\n";
    }
  }

  if (doc.second_order.has_value()) {
    const SecondOrderCertificate& soc = *doc.second_order;
    out << "second order: " << pass_str(soc.pass) << ", worst eigenvalue = "
        << soc.worst_eigenvalue << " over " << soc.checked_nodes
        << " checked node(s), " << soc.vacuous_nodes << " vacuous, "
        << soc.skipped_nodes << " skipped\n";
  }

  if (doc.refutation.has_value()) {
    const RefutationWitness& w = *doc.refutation;
    out << "refutation: source " << w.source;
    if (w.constraint >= 0) out << " (g" << w.constraint + 1 << ")";
    out << ", step " << w.step << ", objective " << w.objective_before << " -> "
        << w.objective_after << " (gain " << w.objective_gain << ")\n";
  }

  out << "verdict: " << to_string(doc.verdict) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& trajectory,
                           const MultiplierTrajectory* multipliers) {
  const int N = trajectory.grid.size();
  const int n = static_cast<int>(trajectory.values.cols());
  const int p = multipliers ? static_cast<int>(multipliers->u.cols()) : 0;
  const int m = multipliers ? static_cast<int>(multipliers->v.cols()) : 0;

  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",z" << i;
  for (int i = 1; i <= p; ++i) out << ",u" << i;
  for (int j = 1; j <= m; ++j) out << ",v" << j;
  out << "\n";

  char buf[64];
  auto fmt = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
  };
  for (int k = 0; k < N; ++k) {
    fmt(trajectory.grid.nodes(k));
    for (int i = 0; i < n; ++i) {
      out << ',';
      fmt(trajectory.values(k, i));
    }
    for (int i = 0; i < p; ++i) {
      out << ',';
      fmt(multipliers->u(k, i));
    }
    for (int j = 0; j < m; ++j) {
      out << ',';
      fmt(multipliers->v(k, j));
    }
    out << "\n";
  }
  return out.str();
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xf];
    hash >>= 4;
  }
  buf[16] = '\0';
  return std::string("fnv1a64:") + buf;
}

}  // namespace ctkkt
