#pragma once

// Small dense symmetric routines. Matrices are row-major std::vector<double>.

#include <cstddef>
#include <span>
#include <vector>

namespace aggreg::linalg {

struct SymmetricEigen {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // row-major m x m, column k is the k-th eigenvector
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops to
// tol times the Frobenius norm of the input (or below tol for a zero matrix).
SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t m, double tol = 1e-10,
                            int max_sweeps = 100);

// Minimum-norm solution of a x = b for symmetric positive semidefinite a,
// discarding eigenvalues below rel_tol * largest eigenvalue.
std::vector<double> psd_pseudo_solve(const std::vector<double>& a, std::size_t m,
                                     std::span<const double> b, double rel_tol = 1e-10);

// a * x for row-major m x m.
std::vector<double> sym_matvec(const std::vector<double>& a, std::size_t m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace aggreg::linalg
