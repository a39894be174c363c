#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aggreg/core.hpp"
#include "aggreg/harness.hpp"

namespace testutil {

inline aggreg::DesignMatrix random_design(std::size_t n, std::size_t m, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n * m);
  for (auto& x : v) x = u(eng);
  return aggreg::DesignMatrix(n, m, std::move(v), scale);
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = z(eng);
  return v;
}

// Empirically orthonormal cosine dictionary on the midpoint grid.
inline aggreg::DesignMatrix orthonormal_design(std::size_t n, std::size_t m) {
  aggreg::ExperimentConfig cfg;
  cfg.n_grid = {n};
  cfg.m_dict = m;
  cfg.sigma = 0.0;
  return aggreg::gen_data(cfg, n, 0).design;
}

// y with prescribed inner products z_j = <y, f_j>_n on an orthonormal design.
inline std::vector<double> with_coordinates(const aggreg::DesignMatrix& d, const std::vector<double>& z) {
  return aggreg::combine(d, z);
}

}  // namespace testutil
