#pragma once

// Synthetic experiments: data generation, Monte Carlo replication with the
// three oracle baselines, rate tables, and rate-slope diagnostics.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggreg/aggregators.hpp"
#include "aggreg/core.hpp"
#include "aggreg/oracles.hpp"

namespace aggreg {

// Raised for configuration problems (as opposed to malformed data).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class RateKind { MS, C, L };
enum class RateVariant { base, tilde, bar };

std::string to_string(RateKind k);
std::string to_string(RateVariant v);

// base:  MS (log M)/n, L M/n, C M/n or sqrt(log(1 + M/sqrt n)/n) (first branch when M <= sqrt n).
// tilde: random-design rates; log factors use M v n.
// bar:   L1-penalty rates; log factors use M v n, C uses sqrt(log M / n) above sqrt n.
double psi_rate(std::size_t n, std::size_t m_dict, RateKind kind, RateVariant variant = RateVariant::base);

enum class DictionaryKind { OrthonormalCosine, IndicatorBlocks, PointMass, RandomBounded, UserCsv };
enum class TruthKind { InDictionary, ConvexCombo, LinearCombo, OutsideSpan };
enum class DesignKind { FixedGrid, RandomUniform };

std::string to_string(DictionaryKind k);
std::string to_string(TruthKind k);
std::string to_string(DesignKind k);

struct TruthSpec {
  TruthKind kind = TruthKind::InDictionary;
  std::size_t index = 0;        // in-dictionary
  std::vector<double> weights;  // convex-combo / linear-combo
  bool uniform = false;         // convex-combo with weight 1/M on every column
  double amplitude = 1.0;       // outside-span: amplitude * sin(2 pi frequency x)
  double frequency = 1.0;
};

struct ExperimentConfig {
  std::vector<std::size_t> n_grid{100};
  std::size_t m_dict = 10;
  // When positive, M = m_sqrt_multiple * ceil(sqrt(n)) for each n.
  std::size_t m_sqrt_multiple = 0;
  DictionaryKind dictionary = DictionaryKind::OrthonormalCosine;
  TruthSpec truth;
  double sigma = 1.0;
  PenaltySpec penalty;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  DesignKind design = DesignKind::FixedGrid;
  std::size_t holdout_size = 100000;
  std::string user_csv;  // user-csv dictionary: design CSV path
  HardFitOptions hard_options;
  SoftFitOptions soft_options;
  ConvexSolverConfig convex_options;

  std::size_t m_for(std::size_t n) const;
  // Throws ConfigError.
  void validate() const;
};

struct Dataset {
  std::vector<double> x;  // design points in [0, 1]
  DesignMatrix design;
  TargetVector targets;
};

// Deterministic in (cfg.seed, n, rep).
Dataset gen_data(const ExperimentConfig& cfg, std::size_t n, std::size_t rep);

struct ReplicationRecord {
  std::size_t n = 0;
  std::size_t m_dict = 0;
  std::size_t rep_index = 0;
  double risk = 0.0;  // aggregate risk
  double excess_ms = 0.0;
  double excess_c = 0.0;
  double excess_l = 0.0;
  std::array<double, 3> oracle_risks{};  // MS, C, L
  std::size_t sparsity = 0;
  SolverMeta fit_meta;
  bool failed = false;
  std::string error;
};

struct SummaryRow {
  std::size_t n = 0;
  std::size_t m_dict = 0;
  RateKind kind = RateKind::MS;
  double mean_excess = 0.0;
  double mc_se = 0.0;
  double psi_rate = 0.0;
  double ratio = 0.0;
  std::size_t reps_ok = 0;
  std::size_t reps_failed = 0;
};

struct ExperimentResult {
  std::vector<ReplicationRecord> records;  // n-major, then rep order
  std::vector<SummaryRow> summary;         // n-major, then MS, C, L
  RateVariant variant = RateVariant::base;
  bool partial = false;  // some replication failed
};

// Rate variant matching the configured regime: tilde for random design,
// bar for the L1 penalty, base otherwise.
RateVariant rate_variant_for(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

struct RatePoint {
  double n = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // 1.96 * MC-propagated standard error
  std::vector<std::size_t> excluded;  // indices with nonpositive mean
};

// OLS of log(mean) on log(n). Needs at least 3 distinct n after exclusions.
SlopeFit rate_slope(const std::vector<RatePoint>& points);

// The summary rows of one kind as slope input.
std::vector<RatePoint> rate_points(const ExperimentResult& res, RateKind kind);

struct EventAConfig {
  std::size_t n = 100;
  std::size_t m_dict = 10;
  double sigma = 1.0;
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  double multiplier = kDefaultL1Multiplier;
  DictionaryKind dictionary = DictionaryKind::OrthonormalCosine;
};

struct EventAResult {
  std::size_t failures = 0;
  std::size_t reps = 0;
  double frequency = 0.0;
  double mc_se = 0.0;
  double bound = 0.0;
};

// Union bound on P(some 2|V_j| > r_j) for a threshold multiplier c:
// M * 4 / (sqrt(2 pi) c sqrt(L)) * exp(-c^2 L / 8), L = 2 log M + log n.
double event_a_bound(std::size_t n, std::size_t m_dict, double multiplier = kDefaultL1Multiplier);

// Frequency over noise draws of the event that some V_j = <f_j, W>_n
// exceeds half its L1 weight.
EventAResult event_a_diagnostic(const EventAConfig& cfg, Exec exec = Exec::parallel);

}  // namespace aggreg
