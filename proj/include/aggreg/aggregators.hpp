#pragma once

// Penalized least-squares aggregation:
//
//   lambda_hat = argmin  S_hat(lambda) + pen(lambda)
//
// with either the sparsity penalty
//   pen(lambda) = K1 (M(lambda)/n) log(1 + D / (M(lambda) v 1)),  D = M or M v n,
// or the weighted L1 penalty sum_j r_{n,j} |lambda_j| whose weights scale with
// the empirical column norms.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aggreg/core.hpp"

namespace aggreg {

enum class PenaltyKind { HardThreshold, SoftThresholdL1 };

std::string to_string(PenaltyKind k);

inline const double kDefaultL1Multiplier = 2.0 * std::sqrt(2.0);

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::HardThreshold;
  double k1 = 2.0;
  bool use_max_mn = false;
  double sigma = 1.0;
  // L1-ball radius for the hard penalty, L2-ball radius for the L1 penalty.
  std::optional<double> t_radius;
  double l1_multiplier = kDefaultL1Multiplier;

  // Throws InvalidInput when a constant is out of range.
  void validate() const;

  static PenaltySpec hard(double k1, bool use_max_mn = false, std::optional<double> t = std::nullopt);
  static PenaltySpec soft(double sigma, std::optional<double> t = std::nullopt);
};

enum class SolverMode { ExactExhaustive, ExactOrthonormal, GreedyForward, CoordinateDescent, ProjectedProximal };

std::string to_string(SolverMode m);

struct SolverMeta {
  SolverMode mode = SolverMode::ExactExhaustive;
  std::size_t iters = 0;
  bool converged = true;
  // Hard penalty with t_radius: the fitted weights were rescaled onto the L1 ball.
  bool projected = false;
  // L1 solvers: objective never increased between sweeps.
  bool monotone = true;
  double enumerated = 0.0;
  std::vector<std::size_t> frozen_columns;
  // Radius diagnostics for the constrained L1 fit: T^2 xi_min > 2 L^2 and
  // T <= log(M v n)^(1/4). Both are reported, neither is enforced.
  std::optional<bool> radius_identifiable;
  std::optional<bool> radius_rate_compatible;
};

struct FitResult {
  WeightVector weights;
  double objective = 0.0;
  double rss = 0.0;
  double penalty = 0.0;
  SolverMeta solver_meta;
};

inline constexpr double kDefaultSubsetBudget = 1048576.0;  // 2^20

struct HardFitOptions {
  double budget = kDefaultSubsetBudget;
  bool allow_greedy = true;
  // Use the sorted-coefficient solution when Psi_n is the identity.
  bool orthonormal_shortcut = true;
  Exec exec = Exec::parallel;
};

struct SoftFitOptions {
  double tol = 1e-10;
  std::size_t max_iters = 100000;
};

double penalty_hard(std::size_t sparsity, std::size_t m_dict, std::size_t n, double k1, bool use_max_mn);

// r_{n,j} = multiplier * sigma * ||f_j||_n * sqrt((2 log M + log n) / n).
std::vector<double> l1_weights(const DesignMatrix& d, double sigma, double multiplier = kDefaultL1Multiplier);

inline double soft_threshold_scalar(double z, double r) {
  const double a = std::abs(z) - r;
  if (a <= 0.0) return 0.0;
  return z > 0.0 ? a : -a;
}

double penalty_value(const DesignMatrix& d, const WeightVector& w, const PenaltySpec& spec);

double penalized_objective(const DesignMatrix& d, std::span<const double> y, const WeightVector& w,
                           const PenaltySpec& spec);

FitResult fit_hard_threshold(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
                             const HardFitOptions& opts = {});

FitResult fit_soft_threshold(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
                             const SoftFitOptions& opts = {});

// Dispatches on spec.kind.
FitResult fit(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
              const HardFitOptions& hard = {}, const SoftFitOptions& soft = {});

// Plug-in noise level from the full-model residuals, sqrt(RSS * n / (n - rank)).
// Provided for callers; nothing in the library uses it implicitly.
double estimate_sigma(const DesignMatrix& d, std::span<const double> y);

}  // namespace aggreg
