#pragma once

// Deterministic battery of numerical checks of the probabilistic and
// information-theoretic inequalities the library relies on.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aggreg {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;  // measured must not exceed bound (slack included)
  std::string detail;
};

struct ChiSquareTail {
  double tail = 0.0;   // Monte Carlo estimate of P{Z_d - d >= x sqrt(2d)}
  double bound = 0.0;  // analytic bound
  double slack = 0.0;  // 3 binomial standard errors at the bound
  std::size_t draws = 0;
};

using ChiSquareBoundFn = std::function<double(std::size_t, double)>;

ChiSquareTail chi2_tail_monte_carlo(std::size_t d, double x, std::size_t draws, std::uint64_t seed,
                                    const ChiSquareBoundFn& bound);

struct MaureyTrials {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // max over trials of grid risk - (simplex risk + L^2/m)
};

// Random bounded designs with 2 <= M <= max_m and grid resolution 1 <= m <= max_grid.
MaureyTrials maurey_trials(std::size_t trials, std::size_t max_m, std::size_t max_grid, std::uint64_t seed,
                           double slack = 1e-6);

struct CheckOptions {
  std::uint64_t seed = 20070101;
  std::size_t chi2_draws = 1000000;
  std::size_t event_a_reps = 100000;
  std::size_t maurey_trials = 1000;
  // "chi2-bound" replaces the chi-square bound by one with a wrong constant.
  std::string inject_fault;
};

std::vector<CheckResult> run_checks(const CheckOptions& opts);

}  // namespace aggreg
