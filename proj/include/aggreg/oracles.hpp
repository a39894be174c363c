#pragma once

// Oracle weights against a known target: best single dictionary element
// (MS), best point of the simplex {lambda >= 0, sum lambda <= 1} (C), best
// linear combination (L), and the best point of the rational grid
// {k/m : k_j >= 0 integer, sum k_j <= m}.

#include <cstddef>
#include <span>
#include <string>

#include "aggreg/core.hpp"

namespace aggreg {

enum class OracleKind { MS, C, L, MaureyGrid };

std::string to_string(OracleKind k);

struct OracleResult {
  OracleKind kind = OracleKind::MS;
  WeightVector weights;
  double risk = 0.0;         // ||f_lambda - f||_n^2
  double certificate = 0.0;  // C: duality gap; L: normal-equation residual; else 0
  std::size_t iters = 0;
  bool converged = true;
};

struct ConvexSolverConfig {
  std::size_t max_iters = 100000;
  double gap_tol = 1e-9;
};

OracleResult ms_oracle(const DesignMatrix& d, std::span<const double> f_vals);

// Minimum-norm least squares via the spectral pseudo-inverse of Psi_n;
// eigenvalues below tol * xi_max are dropped.
OracleResult linear_oracle(const DesignMatrix& d, std::span<const double> f_vals, double tol = 1e-10);

// Away-step Frank-Wolfe with exact line search over conv{0, e_1, ..., e_M}.
// The returned risk is within `certificate` of the simplex minimum.
OracleResult convex_oracle(const DesignMatrix& d, std::span<const double> f_vals,
                           const ConvexSolverConfig& cfg = {});

// Same solver in Gram form: minimizes const - 2 c'lambda + lambda' Psi lambda.
// Exposed for callers that already hold Psi_n and c.
struct SimplexQpResult {
  std::vector<double> weights;
  double gap = 0.0;
  std::size_t iters = 0;
  bool converged = false;
};
SimplexQpResult simplex_qp(const std::vector<double>& psi, std::span<const double> c, std::size_t m,
                           const ConvexSolverConfig& cfg);

inline constexpr double kDefaultGridBudget = 1e6;

// Number of grid points, C(M + m, m), as a double.
double maurey_grid_size(std::size_t m_dict, std::size_t m);

// Exhaustive grid search. Throws BudgetExceeded when the grid is larger
// than budget.
OracleResult maurey_grid_oracle(const DesignMatrix& d, std::span<const double> f_vals, std::size_t m,
                                double budget = kDefaultGridBudget);

// sqrt(n log 2 / log(1 + M / sqrt(n))); only defined for M > sqrt(n).
double x_n_m(std::size_t n, std::size_t m_dict);

}  // namespace aggreg
