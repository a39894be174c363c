#include "aggreg/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aggreg/linalg.hpp"

namespace aggreg {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a << " vs " << b << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

DesignMatrix::DesignMatrix(std::size_t n, std::size_t m, std::vector<double> values, double bound_l)
    : n_(n), m_(m), values_(std::move(values)), bound_l_(bound_l) {
  if (n_ < 1) throw InvalidInput("design matrix needs n >= 1");
  if (m_ < 2) throw InvalidInput("design matrix needs a dictionary of size M >= 2");
  if (values_.size() != n_ * m_) {
    std::ostringstream os;
    os << "design matrix holds " << values_.size() << " values, expected n*M = " << n_ * m_;
    throw InvalidInput(os.str());
  }
  if (!(bound_l_ > 0.0) || !std::isfinite(bound_l_)) throw InvalidInput("bound_l must be positive and finite");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (!std::isfinite(v) || std::abs(v) > bound_l_) {
      std::ostringstream os;
      os << "design entry (" << k % n_ << "," << k / n_ << ") = " << v << " violates bound_l = " << bound_l_;
      throw InvalidInput(os.str());
    }
  }
}

DesignMatrix DesignMatrix::with_inferred_bound(std::size_t n, std::size_t m, std::vector<double> values,
                                               double floor) {
  double l = std::isfinite(floor) ? std::max(0.0, floor) : 0.0;
  for (double v : values) l = std::max(l, std::abs(v));
  // An all-zero dictionary still needs a positive bound.
  if (l == 0.0) l = 1.0;
  DesignMatrix d(n, m, std::move(values), l);
  d.bound_inferred_ = true;
  return d;
}

void TargetVector::validate(const DesignMatrix& d) const {
  require_same_length(f_vals.size(), d.n(), "targets f");
  require_same_length(y_vals.size(), d.n(), "targets y");
  for (std::size_t i = 0; i < f_vals.size(); ++i) {
    if (!std::isfinite(f_vals[i]) || !std::isfinite(y_vals[i])) throw InvalidInput("non-finite target value");
    if (std::abs(f_vals[i]) > d.bound_l()) {
      std::ostringstream os;
      os << "f(X_" << i << ") = " << f_vals[i] << " exceeds bound_l = " << d.bound_l();
      throw InvalidInput(os.str());
    }
  }
}

WeightVector::WeightVector(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  for (std::size_t j = 0; j < coeffs_.size(); ++j)
    if (coeffs_[j] != 0.0) support_.push_back(j);
}

WeightVector WeightVector::vertex(std::size_t m, std::size_t j) {
  if (j >= m) throw InvalidInput("vertex index out of range");
  std::vector<double> c(m, 0.0);
  c[j] = 1.0;
  return WeightVector(std::move(c));
}

double empirical_norm_sq(std::span<const double> vals) {
  if (vals.empty()) throw InvalidInput("empirical norm of an empty vector");
  double s = 0.0;
  for (double v : vals) s += v * v;
  return s / static_cast<double>(vals.size());
}

double empirical_inner(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "empirical inner product");
  if (a.empty()) throw InvalidInput("empirical inner product of empty vectors");
  return linalg::dot(a, b) / static_cast<double>(a.size());
}

std::vector<double> combine(const DesignMatrix& d, std::span<const double> coeffs) {
  require_same_length(coeffs.size(), d.m(), "combine weights");
  std::vector<double> out(d.n(), 0.0);
  for (std::size_t j = 0; j < d.m(); ++j) {
    const double c = coeffs[j];
    if (c == 0.0) continue;
    const auto col = d.column(j);
    for (std::size_t i = 0; i < d.n(); ++i) out[i] += c * col[i];
  }
  return out;
}

double rss(const DesignMatrix& d, std::span<const double> y, std::span<const double> coeffs) {
  require_same_length(y.size(), d.n(), "rss observations");
  auto fit = combine(d, coeffs);
  double s = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double r = y[i] - fit[i];
    s += r * r;
  }
  return s / static_cast<double>(d.n());
}

std::vector<double> gram_matrix(const DesignMatrix& d, Exec exec) {
  const std::size_t m = d.m();
  const double inv_n = 1.0 / static_cast<double>(d.n());
  std::vector<double> psi(m * m, 0.0);
  const auto entry = [&](std::size_t j, std::size_t k) {
    return linalg::dot(d.column(j), d.column(k)) * inv_n;
  };
  if (exec == Exec::serial) {
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = j; k < m; ++k) psi[j * m + k] = psi[k * m + j] = entry(j, k);
  } else {
    const auto mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t jj = 0; jj < mm; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      for (std::size_t k = j; k < m; ++k) psi[j * m + k] = psi[k * m + j] = entry(j, k);
    }
  }
  return psi;
}

GramInfo gram(const DesignMatrix& d, double tol_eig, Exec exec) {
  GramInfo g;
  g.m = d.m();
  g.tol_eig = tol_eig;
  g.psi = gram_matrix(d, exec);
  const auto eig = linalg::jacobi_eigen(g.psi, g.m, tol_eig);
  g.xi_min = eig.values.front();
  g.xi_max = eig.values.back();
  return g;
}

std::vector<double> cross_moments(const DesignMatrix& d, std::span<const double> y) {
  require_same_length(y.size(), d.n(), "cross moments");
  std::vector<double> c(d.m());
  const double inv_n = 1.0 / static_cast<double>(d.n());
  for (std::size_t j = 0; j < d.m(); ++j) c[j] = linalg::dot(d.column(j), y) * inv_n;
  return c;
}

}  // namespace aggreg
