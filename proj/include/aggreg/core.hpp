#pragma once

// Domain types and empirical-norm algebra shared by every module.
//
// A dictionary f_1..f_M only exists here through its evaluations on the
// design points X_1..X_n, stored column-major so that column j is the
// vector (f_j(X_1), ..., f_j(X_n)).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggreg {

// Error taxonomy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch broadly.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  BudgetExceeded(const std::string& what, double count, double budget)
      : std::runtime_error(what), count(count), budget(budget) {}
  double count;
  double budget;
};

// Selects the serial reference kernel or the OpenMP one. Both produce
// bit-identical results; the serial path exists for testing.
enum class Exec { serial, parallel };

class DesignMatrix {
 public:
  DesignMatrix() = default;

  // values is column-major, size n * m. Every |entry| must be <= bound_l.
  DesignMatrix(std::size_t n, std::size_t m, std::vector<double> values, double bound_l);

  // bound_l taken as the largest absolute entry and flagged as inferred.
  // bound_l = max(floor, max |entry|), or 1 when that is zero; flagged as inferred.
  static DesignMatrix with_inferred_bound(std::size_t n, std::size_t m, std::vector<double> values,
                                          double floor = 0.0);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  double bound_l() const { return bound_l_; }
  bool bound_inferred() const { return bound_inferred_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * n_, n_};
  }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
  double bound_l_ = 0.0;
  bool bound_inferred_ = false;
};

// Known truth f(X_i) alongside the observations Y_i = f(X_i) + W_i.
struct TargetVector {
  std::vector<double> f_vals;
  std::vector<double> y_vals;

  // Throws InvalidInput on a length mismatch or |f| > bound_l.
  void validate(const DesignMatrix& d) const;
};

class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> coeffs);
  static WeightVector zeros(std::size_t m) { return WeightVector(std::vector<double>(m, 0.0)); }
  static WeightVector vertex(std::size_t m, std::size_t j);

  std::size_t size() const { return coeffs_.size(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](std::size_t j) const { return coeffs_[j]; }

  // J(lambda), ascending.
  const std::vector<std::size_t>& support() const { return support_; }
  // M(lambda) = |J(lambda)|.
  std::size_t sparsity() const { return support_.size(); }

 private:
  std::vector<double> coeffs_;
  std::vector<std::size_t> support_;
};

// Empirical Gram matrix Psi_n with its extreme eigenvalues.
struct GramInfo {
  std::size_t m = 0;
  std::vector<double> psi;  // row-major m x m
  double xi_min = 0.0;
  double xi_max = 0.0;
  double tol_eig = 1e-10;

  double at(std::size_t j, std::size_t k) const { return psi[j * m + k]; }
};

// (1/n) sum vals[i]^2.
double empirical_norm_sq(std::span<const double> vals);

// <a, b>_n = (1/n) sum a[i] b[i].
double empirical_inner(std::span<const double> a, std::span<const double> b);

// (f_lambda(X_1), ..., f_lambda(X_n)).
std::vector<double> combine(const DesignMatrix& d, std::span<const double> coeffs);
inline std::vector<double> combine(const DesignMatrix& d, const WeightVector& w) {
  return combine(d, std::span<const double>(w.coeffs()));
}

// Residual sum of squares (1/n) sum (y_i - f_lambda(X_i))^2.
double rss(const DesignMatrix& d, std::span<const double> y, std::span<const double> coeffs);
inline double rss(const DesignMatrix& d, std::span<const double> y, const WeightVector& w) {
  return rss(d, y, std::span<const double>(w.coeffs()));
}

// Psi_n only, no eigenvalues.
std::vector<double> gram_matrix(const DesignMatrix& d, Exec exec = Exec::parallel);

GramInfo gram(const DesignMatrix& d, double tol_eig = 1e-10, Exec exec = Exec::parallel);

// c_j = <y, f_j>_n.
std::vector<double> cross_moments(const DesignMatrix& d, std::span<const double> y);

}  // namespace aggreg
