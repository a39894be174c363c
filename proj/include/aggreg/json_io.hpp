#pragma once

// Machine-readable outputs. CSV numbers use format_double (round-trip exact),
// so identical results always produce identical bytes.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aggreg/aggregators.hpp"
#include "aggreg/hardness.hpp"
#include "aggreg/harness.hpp"
#include "aggreg/oracles.hpp"

namespace aggreg::io {

nlohmann::json to_json(const SolverMeta& m);
nlohmann::json to_json(const FitResult& r);
nlohmann::json to_json(const OracleResult& r);
// Sidecar: {kind, gamma, sigma, block_size or code_words, kl_max, kl_budget, separation_min, ...}.
nlohmann::json to_json(const HardInstance& inst);
nlohmann::json to_json(const MinimaxResult& r);
nlohmann::json to_json(const SlopeFit& s);

inline const char* kSummaryHeader = "n,M,kind,mean_excess,mc_se,psi_rate,ratio";
inline const char* kRepsHeader =
    "n,M,rep_index,risk,excess_ms,excess_c,excess_l,oracle_ms,oracle_c,oracle_l,sparsity,solver_mode,iters,"
    "converged,projected,failed,error";
inline const char* kRateTableHeader = "n,M,MS_base,C_base,L_base,MS_tilde,C_tilde,L_tilde,MS_bar,C_bar,L_bar";

void write_summary_csv(std::ostream& out, const ExperimentResult& res);
void write_reps_csv(std::ostream& out, const ExperimentResult& res);
void write_rate_table_csv(std::ostream& out, const std::vector<std::size_t>& n_list,
                          const std::vector<std::size_t>& m_list);
// One column per truth, header g0..g{N-1}.
void write_truths_csv(std::ostream& out, const HardInstance& inst);

// Writes text to path, throwing InvalidInput when the file cannot be created.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace aggreg::io
