#pragma once

// Best-subset kernels for least squares in Gram form.
//
// For a support S the least-squares fit explains c_S' Psi_S^+ c_S of the
// response energy, so RSS(S) = ||y||_n^2 - explained(S). The exhaustive
// kernel walks all 2^M subsets depth-first, appending one column at a time
// to a Cholesky factor, which costs O(|S|^2) per visited subset.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aggreg/core.hpp"

namespace aggreg::kernels {

struct SizeBest {
  double explained = 0.0;
  std::vector<std::size_t> support;  // ascending
  bool found = false;
};

// Total number of supports visited by the exhaustive scan, 2^M as a double.
double enumeration_count(std::size_t m);

// Entry s holds the size-s support with the largest explained energy.
// Ties go to the lexicographically smallest support. The serial and
// parallel paths return identical results, bit for bit.
std::vector<SizeBest> best_subsets_by_size(const std::vector<double>& psi, std::span<const double> c,
                                           std::size_t m, Exec exec = Exec::parallel);

// Forward stepwise: at each step add the column with the largest gain.
std::vector<SizeBest> greedy_forward(const std::vector<double>& psi, std::span<const double> c, std::size_t m);

// Relative pivot below which an appended column counts as linearly dependent.
inline constexpr double kDependentPivot = 1e-10;

}  // namespace aggreg::kernels
