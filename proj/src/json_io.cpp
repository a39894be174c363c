#include "aggreg/json_io.hpp"

#include <fstream>

#include "aggreg/csv_io.hpp"

namespace aggreg::io {

using nlohmann::json;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const SolverMeta& m) {
  json j;
  j["mode"] = to_string(m.mode);
  j["iters"] = m.iters;
  j["converged"] = m.converged;
  j["projected"] = m.projected;
  j["monotone"] = m.monotone;
  j["enumerated"] = m.enumerated;
  j["frozen_columns"] = m.frozen_columns;
  j["radius_identifiable"] = m.radius_identifiable ? json(*m.radius_identifiable) : json(nullptr);
  j["radius_rate_compatible"] = m.radius_rate_compatible ? json(*m.radius_rate_compatible) : json(nullptr);
  return j;
}

json to_json(const FitResult& r) {
  json j;
  j["weights"] = r.weights.coeffs();
  j["support"] = r.weights.support();
  j["sparsity"] = r.weights.sparsity();
  j["objective"] = r.objective;
  j["rss"] = r.rss;
  j["penalty"] = r.penalty;
  j["converged"] = r.solver_meta.converged;
  j["solver_meta"] = to_json(r.solver_meta);
  return j;
}

json to_json(const OracleResult& r) {
  json j;
  j["kind"] = to_string(r.kind);
  j["weights"] = r.weights.coeffs();
  j["support"] = r.weights.support();
  j["risk"] = r.risk;
  j["certificate"] = r.certificate;
  j["iters"] = r.iters;
  j["converged"] = r.converged;
  return j;
}

json to_json(const HardInstance& inst) {
  json j;
  j["kind"] = to_string(inst.kind);
  j["n"] = inst.design.n();
  j["M"] = inst.design.m();
  j["gamma"] = inst.gamma;
  j["sigma"] = inst.sigma;
  j["card"] = inst.truth_set.size();
  if (inst.kind == HardKind::MSHard) {
    j["block_size"] = inst.block_size;
  } else {
    j["code_words"] = inst.code_words;
    j["two_point_fallback"] = inst.two_point_fallback;
  }
  j["kl_max"] = inst.kl_max;
  j["kl_budget"] = inst.kl_budget;
  j["separation_min"] = inst.separation_min;
  j["separation_max"] = inst.separation_max;
  return j;
}

json to_json(const MinimaxResult& r) {
  json j;
  j["mean_risk"] = r.mean_risk;
  j["mc_se"] = r.mc_se;
  j["max_mean"] = r.max_mean;
  j["max_se"] = r.max_se;
  j["worst_truth"] = r.worst_truth;
  return j;
}

json to_json(const SlopeFit& s) {
  json j;
  j["slope"] = s.slope;
  j["intercept"] = s.intercept;
  j["halfwidth"] = s.halfwidth;
  j["excluded"] = s.excluded;
  return j;
}

void write_summary_csv(std::ostream& out, const ExperimentResult& res) {
  out << kSummaryHeader << '\n';
  for (const auto& r : res.summary)
    out << r.n << ',' << r.m_dict << ',' << to_string(r.kind) << ',' << format_double(r.mean_excess) << ','
        << format_double(r.mc_se) << ',' << format_double(r.psi_rate) << ',' << format_double(r.ratio) << '\n';
}

void write_reps_csv(std::ostream& out, const ExperimentResult& res) {
  out << kRepsHeader << '\n';
  for (const auto& r : res.records) {
    out << r.n << ',' << r.m_dict << ',' << r.rep_index << ',' << format_double(r.risk) << ','
        << format_double(r.excess_ms) << ',' << format_double(r.excess_c) << ',' << format_double(r.excess_l) << ','
        << format_double(r.oracle_risks[0]) << ',' << format_double(r.oracle_risks[1]) << ','
        << format_double(r.oracle_risks[2]) << ',' << r.sparsity << ',' << to_string(r.fit_meta.mode) << ','
        << r.fit_meta.iters << ',' << (r.fit_meta.converged ? 1 : 0) << ',' << (r.fit_meta.projected ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << ',' << csv_field(r.error) << '\n';
  }
}

void write_rate_table_csv(std::ostream& out, const std::vector<std::size_t>& n_list,
                          const std::vector<std::size_t>& m_list) {
  out << kRateTableHeader << '\n';
  for (std::size_t n : n_list)
    for (std::size_t m : m_list) {
      out << n << ',' << m;
      for (auto v : {RateVariant::base, RateVariant::tilde, RateVariant::bar})
        for (auto k : {RateKind::MS, RateKind::C, RateKind::L}) out << ',' << format_double(psi_rate(n, m, k, v));
      out << '\n';
    }
}

void write_truths_csv(std::ostream& out, const HardInstance& inst) {
  const std::size_t card = inst.truth_set.size();
  for (std::size_t t = 0; t < card; ++t) out << (t ? "," : "") << 'g' << t;
  out << '\n';
  for (std::size_t i = 0; i < inst.design.n(); ++i) {
    for (std::size_t t = 0; t < card; ++t) out << (t ? "," : "") << format_double(inst.truth_set[t][i]);
    out << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
  if (!f) throw InvalidInput("failed writing " + path);
}

}  // namespace aggreg::io
