#pragma once

// Lower-bound machinery: provably hard instance families for model-selection
// and linear aggregation, the Gaussian KL identity for fixed designs, a
// greedy binary code with guaranteed pairwise Hamming distance, and the
// chi-square deviation bound.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aggreg/core.hpp"

namespace aggreg {

// P{Z_d - d >= x sqrt(2d)} <= exp(-x^2 / (2 (1 + x sqrt(2/d)))) for Z_d ~ chi^2_d.
double chi2_tail_bound(std::size_t d, double x);

// (n / (2 sigma^2)) ||f - g||_n^2: KL divergence between the Gaussian
// observation laws with means f and g.
double kl_gaussian_fixed_design(std::span<const double> f, std::span<const double> g, double sigma);

struct BinaryCode {
  std::size_t length = 0;
  std::size_t target_distance = 0;
  std::vector<std::uint64_t> words;  // bit j = coordinate j
  std::size_t min_distance = 0;      // verified over all pairs
};

// Greedy lexicographic code: scan {0,1}^M in counting order and keep every
// word at distance >= target from all kept words. The default target is
// ceil(M/8). max_words = 0 scans the whole cube; otherwise the scan stops
// once that many words are kept. Requires 8 <= M <= 63.
BinaryCode vg_code(std::size_t length, std::optional<std::size_t> target_distance = std::nullopt,
                   std::size_t max_words = 0);

// Smallest pairwise Hamming distance among the words, by exhaustive check.
// Returns length + 1 for fewer than two words.
std::size_t code_min_distance(std::span<const std::uint64_t> words, std::size_t length);

enum class HardKind { MSHard, LHard };

std::string to_string(HardKind k);

struct HardInstance {
  HardKind kind = HardKind::MSHard;
  DesignMatrix design;
  std::vector<std::vector<double>> truth_set;
  double gamma = 0.0;
  double sigma = 1.0;
  double kl_budget = 0.0;  // log(card) / 16
  double kl_max = 0.0;
  double separation_min = 0.0;
  double separation_max = 0.0;
  std::size_t block_size = 0;             // MS-hard
  std::vector<std::uint64_t> code_words;  // L-hard with M >= 8
  bool two_point_fallback = false;        // L-hard with M < 8
};

struct CapacityError : InvalidInput {
  using InvalidInput::InvalidInput;
};

// M indicator columns gamma * 1{i in S_j} on disjoint blocks of size
// floor(log M) v 1; the truths are the columns themselves.
HardInstance make_ms_hard(std::size_t n, std::size_t m_dict, double sigma);

// Point-mass columns gamma * 1{i = j}; truths are binary combinations
// selected by vg_code (M >= 8) or the two-point set {0, gamma/sqrt(n)} (M < 8).
// max_truths = 0 picks max(64, ceil(2^(M/8))).
HardInstance make_l_hard(std::size_t n, std::size_t m_dict, double sigma, std::size_t max_truths = 0);

// Maps (design, observations) to fitted values at the design points.
using Estimator = std::function<std::vector<double>(const DesignMatrix&, std::span<const double>)>;

struct MinimaxResult {
  std::vector<double> mean_risk;  // per truth
  std::vector<double> mc_se;      // per truth
  double max_mean = 0.0;
  double max_se = 0.0;
  std::size_t worst_truth = 0;
};

struct EstimatorFailure : std::runtime_error {
  EstimatorFailure(const std::string& what, std::size_t truth, std::size_t rep)
      : std::runtime_error(what), truth(truth), rep(rep) {}
  std::size_t truth;
  std::size_t rep;
};

// Worst-case mean risk ||T_n - g||_n^2 of one estimator over the truth set.
MinimaxResult minimax_eval(const HardInstance& inst, const Estimator& estimator, std::size_t reps,
                           std::uint64_t seed, std::optional<double> sigma_override = std::nullopt,
                           Exec exec = Exec::parallel);

}  // namespace aggreg
