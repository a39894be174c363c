#include "aggreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aggreg/core.hpp"

namespace aggreg::linalg {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> sym_matvec(const std::vector<double>& a, std::size_t m, std::span<const double> x) {
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) y[i] = dot({a.data() + i * m, m}, x);
  return y;
}

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t m, double tol, int max_sweeps) {
  if (a.size() != m * m) throw InvalidInput("jacobi_eigen: matrix size mismatch");
  SymmetricEigen out;
  std::vector<double> v(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;

  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);

  const auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) s += 2.0 * a[p * m + q] * a[p * m + q];
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol * std::max(fro, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a[p * m + q];
        if (apq == 0.0) continue;
        const double app = a[p * m + p];
        const double aqq = a[q * m + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k * m + p];
          const double akq = a[k * m + q];
          a[k * m + p] = c * akp - s * akq;
          a[k * m + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p * m + k];
          const double aqk = a[q * m + k];
          a[p * m + k] = c * apk - s * aqk;
          a[q * m + k] = s * apk + c * aqk;
        }
        a[p * m + q] = a[q * m + p] = 0.0;

        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v[k * m + p];
          const double vkq = v[k * m + q];
          v[k * m + p] = c * vkp - s * vkq;
          v[k * m + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  out.sweeps = sweep;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * m + x] < a[y * m + y]; });
  out.values.resize(m);
  out.vectors.assign(m * m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    out.values[k] = a[order[k] * m + order[k]];
    for (std::size_t i = 0; i < m; ++i) out.vectors[i * m + k] = v[i * m + order[k]];
  }
  return out;
}

std::vector<double> psd_pseudo_solve(const std::vector<double>& a, std::size_t m,
                                     std::span<const double> b, double rel_tol) {
  const auto eig = jacobi_eigen(a, m, 1e-14);
  std::vector<double> x(m, 0.0);
  const double top = eig.values.empty() ? 0.0 : eig.values.back();
  if (!(top > 0.0)) return x;
  for (std::size_t k = 0; k < m; ++k) {
    const double e = eig.values[k];
    if (e <= rel_tol * top) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < m; ++i) proj += eig.vectors[i * m + k] * b[i];
    proj /= e;
    for (std::size_t i = 0; i < m; ++i) x[i] += proj * eig.vectors[i * m + k];
  }
  return x;
}

}  // namespace aggreg::linalg
