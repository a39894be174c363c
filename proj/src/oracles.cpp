#include "aggreg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aggreg/linalg.hpp"

namespace aggreg {

std::string to_string(OracleKind k) {
  switch (k) {
    case OracleKind::MS: return "MS";
    case OracleKind::C: return "C";
    case OracleKind::L: return "L";
    case OracleKind::MaureyGrid: return "MaureyGrid";
  }
  return "?";
}

namespace {

void check_target(const DesignMatrix& d, std::span<const double> f) {
  if (f.size() != d.n()) throw InvalidInput("target length does not match the design");
}

double risk_of(const DesignMatrix& d, std::span<const double> f, std::span<const double> coeffs) {
  return rss(d, f, coeffs);
}

}  // namespace

OracleResult ms_oracle(const DesignMatrix& d, std::span<const double> f_vals) {
  check_target(d, f_vals);
  std::size_t best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  std::vector<double> diff(d.n());
  for (std::size_t j = 0; j < d.m(); ++j) {
    const auto col = d.column(j);
    for (std::size_t i = 0; i < d.n(); ++i) diff[i] = col[i] - f_vals[i];
    const double r = empirical_norm_sq(diff);
    if (r < best_risk) {
      best_risk = r;
      best = j;
    }
  }
  OracleResult out;
  out.kind = OracleKind::MS;
  out.weights = WeightVector::vertex(d.m(), best);
  out.risk = best_risk;
  out.iters = d.m();
  return out;
}

OracleResult linear_oracle(const DesignMatrix& d, std::span<const double> f_vals, double tol) {
  check_target(d, f_vals);
  const std::size_t m = d.m();
  const auto psi = gram_matrix(d);
  const auto c = cross_moments(d, f_vals);
  auto lambda = linalg::psd_pseudo_solve(psi, m, c, tol);

  const auto psi_lambda = linalg::sym_matvec(psi, m, lambda);
  double res = 0.0;
  for (std::size_t j = 0; j < m; ++j) res += (psi_lambda[j] - c[j]) * (psi_lambda[j] - c[j]);

  OracleResult out;
  out.kind = OracleKind::L;
  out.risk = risk_of(d, f_vals, lambda);
  out.weights = WeightVector(std::move(lambda));
  out.certificate = std::sqrt(res);
  out.iters = 1;
  return out;
}

SimplexQpResult simplex_qp(const std::vector<double>& psi, std::span<const double> c, std::size_t m,
                           const ConvexSolverConfig& cfg) {
  if (!(cfg.gap_tol > 0.0)) throw InvalidInput("gap_tol must be positive");
  // Atom j < m is the vertex e_j; atom m is the origin.
  std::vector<double> alpha(m + 1, 0.0);
  alpha[m] = 1.0;
  std::vector<double> lambda(m, 0.0);
  std::vector<double> p(m, 0.0);  // Psi * lambda
  std::vector<double> g(m, 0.0);
  std::vector<double> psi_d(m, 0.0);

  SimplexQpResult out;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (;; ++it) {
    if (it % 64 == 0) p = linalg::sym_matvec(psi, m, lambda);
    for (std::size_t j = 0; j < m; ++j) g[j] = 2.0 * (p[j] - c[j]);
    const double g_lambda = linalg::dot(g, lambda);

    std::size_t s = m;
    double g_s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (g[j] < g_s) {
        g_s = g[j];
        s = j;
      }
    gap = g_lambda - g_s;
    if (gap <= cfg.gap_tol || it >= cfg.max_iters) break;

    std::size_t a = m;
    double g_a = -std::numeric_limits<double>::infinity();
    if (alpha[m] > 0.0) g_a = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (alpha[j] > 0.0 && g[j] > g_a) {
        g_a = g[j];
        a = j;
      }
    const double away_gap = g_a - g_lambda;

    const bool fw_step = gap >= away_gap;
    double gamma_max = 1.0;
    if (fw_step) {
      for (std::size_t j = 0; j < m; ++j) psi_d[j] = (s < m ? psi[j * m + s] : 0.0) - p[j];
    } else {
      gamma_max = alpha[a] / (1.0 - alpha[a]);
      for (std::size_t j = 0; j < m; ++j) psi_d[j] = p[j] - (a < m ? psi[j * m + a] : 0.0);
    }
    // d = s - lambda (FW) or lambda - a (away), expressed through atoms.
    // d = v_s - lambda (FW step) or lambda - v_a (away step), v_m = 0.
    const double g_d = fw_step ? (g_s - g_lambda) : (g_lambda - g_a);
    const double lambda_psi_d = linalg::dot(lambda, psi_d);
    const double d_psi_d = fw_step ? (s < m ? psi_d[s] : 0.0) - lambda_psi_d
                                   : lambda_psi_d - (a < m ? psi_d[a] : 0.0);
    double gamma = gamma_max;
    if (d_psi_d > 0.0) gamma = std::clamp(-g_d / (2.0 * d_psi_d), 0.0, gamma_max);
    if (gamma == 0.0) {
      // No progress possible along d; the gap is as small as floating point allows.
      break;
    }

    if (fw_step) {
      for (auto& x : alpha) x *= (1.0 - gamma);
      alpha[s] += gamma;
    } else {
      for (auto& x : alpha) x *= (1.0 + gamma);
      alpha[a] -= gamma;
      if (gamma == gamma_max) alpha[a] = 0.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
      lambda[j] = alpha[j];
      p[j] += gamma * psi_d[j];
    }
  }

  // Exact simplex feasibility.
  double sum = 0.0;
  for (auto& x : lambda) {
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (sum > 1.0 && sum <= 1.0 + 1e-12)
    for (auto& x : lambda) x /= sum;

  p = linalg::sym_matvec(psi, m, lambda);
  for (std::size_t j = 0; j < m; ++j) g[j] = 2.0 * (p[j] - c[j]);
  const double g_min = std::min(0.0, *std::min_element(g.begin(), g.end()));
  out.gap = std::max(0.0, linalg::dot(g, lambda) - g_min);
  out.weights = std::move(lambda);
  out.iters = it;
  out.converged = out.gap <= cfg.gap_tol;
  return out;
}

OracleResult convex_oracle(const DesignMatrix& d, std::span<const double> f_vals, const ConvexSolverConfig& cfg) {
  check_target(d, f_vals);
  const auto psi = gram_matrix(d);
  const auto c = cross_moments(d, f_vals);
  auto qp = simplex_qp(psi, c, d.m(), cfg);
  OracleResult out;
  out.kind = OracleKind::C;
  out.risk = risk_of(d, f_vals, qp.weights);
  out.weights = WeightVector(std::move(qp.weights));
  out.certificate = qp.gap;
  out.iters = qp.iters;
  out.converged = qp.converged;
  return out;
}

double maurey_grid_size(std::size_t m_dict, std::size_t m) {
  // C(M + m, m) computed in floating point; exact well beyond any usable budget.
  double r = 1.0;
  for (std::size_t k = 1; k <= m; ++k) r = r * static_cast<double>(m_dict + k) / static_cast<double>(k);
  return std::round(r);
}

namespace {

struct GridSearch {
  const std::vector<double>& psi;
  const std::vector<double>& c;
  std::size_t m_dict;
  double inv_m;
  std::vector<std::size_t> k;
  std::vector<std::vector<double>> p_stack;  // Psi * lambda over assigned coordinates
  std::vector<std::size_t> best_k;
  double best_q = std::numeric_limits<double>::infinity();

  void run(std::size_t j, std::size_t remaining, double q) {
    if (j == m_dict) {
      if (q < best_q) {
        best_q = q;
        best_k = k;
      }
      return;
    }
    const auto& p = p_stack[j];
    auto& next = p_stack[j + 1];
    for (std::size_t v = 0; v <= remaining; ++v) {
      const double lj = static_cast<double>(v) * inv_m;
      k[j] = v;
      const double dq = lj * (2.0 * p[j] + lj * psi[j * m_dict + j] - 2.0 * c[j]);
      for (std::size_t t = 0; t < m_dict; ++t) next[t] = p[t] + lj * psi[t * m_dict + j];
      run(j + 1, remaining - v, q + dq);
    }
    k[j] = 0;
  }
};

}  // namespace

OracleResult maurey_grid_oracle(const DesignMatrix& d, std::span<const double> f_vals, std::size_t m,
                                double budget) {
  check_target(d, f_vals);
  if (m < 1) throw InvalidInput("grid resolution m must be >= 1");
  const double count = maurey_grid_size(d.m(), m);
  if (count > budget) {
    std::ostringstream os;
    os << "grid of " << count << " points exceeds the budget of " << budget;
    throw BudgetExceeded(os.str(), count, budget);
  }
  const auto psi = gram_matrix(d);
  const auto c = cross_moments(d, f_vals);
  GridSearch gs{psi, c, d.m(), 1.0 / static_cast<double>(m), std::vector<std::size_t>(d.m(), 0),
                std::vector<std::vector<double>>(d.m() + 1, std::vector<double>(d.m(), 0.0)), {}};
  gs.run(0, m, 0.0);

  std::vector<double> lambda(d.m());
  for (std::size_t j = 0; j < d.m(); ++j) lambda[j] = static_cast<double>(gs.best_k[j]) / static_cast<double>(m);
  OracleResult out;
  out.kind = OracleKind::MaureyGrid;
  out.risk = risk_of(d, f_vals, lambda);
  out.weights = WeightVector(std::move(lambda));
  out.iters = static_cast<std::size_t>(count);
  return out;
}

double x_n_m(std::size_t n, std::size_t m_dict) {
  if (n < 1) throw InvalidInput("x_n_m needs n >= 1");
  if (m_dict * m_dict <= n) throw DomainError("x_n_m is only used when M > sqrt(n)");
  const double nn = static_cast<double>(n);
  return std::sqrt(nn * std::log(2.0) / std::log1p(static_cast<double>(m_dict) / std::sqrt(nn)));
}

}  // namespace aggreg
