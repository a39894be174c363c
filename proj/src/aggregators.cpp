#include "aggreg/aggregators.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "aggreg/linalg.hpp"
#include "aggreg/subset_search.hpp"

namespace aggreg {

std::string to_string(PenaltyKind k) {
  return k == PenaltyKind::HardThreshold ? "hard" : "soft";
}

std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::ExactExhaustive: return "exact-exhaustive";
    case SolverMode::ExactOrthonormal: return "exact-orthonormal";
    case SolverMode::GreedyForward: return "greedy-forward";
    case SolverMode::CoordinateDescent: return "coordinate-descent";
    case SolverMode::ProjectedProximal: return "projected-proximal";
  }
  return "?";
}

void PenaltySpec::validate() const {
  if (kind == PenaltyKind::HardThreshold && !(k1 > 0.0 && std::isfinite(k1)))
    throw InvalidInput("hard-threshold penalty needs k1 > 0");
  if (kind == PenaltyKind::SoftThresholdL1) {
    if (!(sigma > 0.0 && std::isfinite(sigma))) throw InvalidInput("L1 penalty needs sigma > 0");
    if (!(l1_multiplier > 0.0 && std::isfinite(l1_multiplier))) throw InvalidInput("L1 multiplier must be > 0");
  }
  if (t_radius && !(*t_radius >= 0.0 && std::isfinite(*t_radius))) throw InvalidInput("t_radius must be >= 0");
}

PenaltySpec PenaltySpec::hard(double k1, bool use_max_mn, std::optional<double> t) {
  PenaltySpec s;
  s.kind = PenaltyKind::HardThreshold;
  s.k1 = k1;
  s.use_max_mn = use_max_mn;
  s.t_radius = t;
  return s;
}

PenaltySpec PenaltySpec::soft(double sigma, std::optional<double> t) {
  PenaltySpec s;
  s.kind = PenaltyKind::SoftThresholdL1;
  s.sigma = sigma;
  s.t_radius = t;
  return s;
}

double penalty_hard(std::size_t sparsity, std::size_t m_dict, std::size_t n, double k1, bool use_max_mn) {
  if (sparsity > m_dict) throw InvalidInput("sparsity exceeds the dictionary size");
  if (n < 1) throw InvalidInput("penalty needs n >= 1");
  if (sparsity == 0) return 0.0;
  const double dim = static_cast<double>(use_max_mn ? std::max(m_dict, n) : m_dict);
  const double s = static_cast<double>(sparsity);
  return k1 * (s / static_cast<double>(n)) * std::log1p(dim / s);
}

std::vector<double> l1_weights(const DesignMatrix& d, double sigma, double multiplier) {
  if (!(sigma > 0.0)) throw InvalidInput("l1_weights needs sigma > 0");
  const double n = static_cast<double>(d.n());
  const double rate = std::sqrt((2.0 * std::log(static_cast<double>(d.m())) + std::log(n)) / n);
  std::vector<double> r(d.m());
  for (std::size_t j = 0; j < d.m(); ++j)
    r[j] = multiplier * sigma * std::sqrt(empirical_norm_sq(d.column(j))) * rate;
  return r;
}

double penalty_value(const DesignMatrix& d, const WeightVector& w, const PenaltySpec& spec) {
  if (w.size() != d.m()) throw InvalidInput("weight vector length does not match the dictionary");
  if (spec.kind == PenaltyKind::HardThreshold)
    return penalty_hard(w.sparsity(), d.m(), d.n(), spec.k1, spec.use_max_mn);
  const auto r = l1_weights(d, spec.sigma, spec.l1_multiplier);
  double p = 0.0;
  for (std::size_t j : w.support()) p += r[j] * std::abs(w[j]);
  return p;
}

double penalized_objective(const DesignMatrix& d, std::span<const double> y, const WeightVector& w,
                           const PenaltySpec& spec) {
  return rss(d, y, w) + penalty_value(d, w, spec);
}

namespace {

FitResult finish(const DesignMatrix& d, std::span<const double> y, std::vector<double> lambda,
                 const PenaltySpec& spec, SolverMeta meta) {
  FitResult out;
  out.weights = WeightVector(std::move(lambda));
  out.rss = rss(d, y, out.weights);
  out.penalty = penalty_value(d, out.weights, spec);
  out.objective = out.rss + out.penalty;
  out.solver_meta = std::move(meta);
  return out;
}

bool is_identity(const std::vector<double>& psi, std::size_t m, double tol) {
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      if (std::abs(psi[j * m + k] - (j == k ? 1.0 : 0.0)) > tol) return false;
  return true;
}

std::vector<kernels::SizeBest> orthonormal_best(std::span<const double> c, std::size_t m) {
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(c[a]) > std::abs(c[b]); });
  std::vector<kernels::SizeBest> best(m + 1);
  best[0] = {0.0, {}, true};
  double acc = 0.0;
  for (std::size_t s = 1; s <= m; ++s) {
    acc += c[order[s - 1]] * c[order[s - 1]];
    std::vector<std::size_t> support(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(support.begin(), support.end());
    best[s] = {acc, std::move(support), true};
  }
  return best;
}

}  // namespace

FitResult fit_hard_threshold(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
                             const HardFitOptions& opts) {
  spec.validate();
  if (spec.kind != PenaltyKind::HardThreshold) throw InvalidInput("fit_hard_threshold needs a hard-threshold spec");
  if (y.size() != d.n()) throw InvalidInput("observation length does not match the design");
  const std::size_t m = d.m();
  const auto psi = gram_matrix(d, opts.exec);
  const auto c = cross_moments(d, y);
  const double yy = empirical_norm_sq(y);

  SolverMeta meta;
  std::vector<kernels::SizeBest> best;
  const bool orthonormal = opts.orthonormal_shortcut && is_identity(psi, m, 1e-10);
  const double count = kernels::enumeration_count(m);
  if (orthonormal) {
    meta.mode = SolverMode::ExactOrthonormal;
    meta.enumerated = static_cast<double>(m + 1);
    best = orthonormal_best(c, m);
  } else if (count <= opts.budget) {
    meta.mode = SolverMode::ExactExhaustive;
    meta.enumerated = count;
    best = kernels::best_subsets_by_size(psi, c, m, opts.exec);
  } else if (opts.allow_greedy) {
    meta.mode = SolverMode::GreedyForward;
    meta.enumerated = static_cast<double>(m * (m + 1) / 2);
    best = kernels::greedy_forward(psi, c, m);
  } else {
    std::ostringstream os;
    os << "exhaustive search over " << count << " supports exceeds the budget of " << opts.budget;
    throw BudgetExceeded(os.str(), count, opts.budget);
  }
  meta.iters = best.size();

  std::size_t chosen = 0;
  double chosen_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s <= m; ++s) {
    if (!best[s].found) continue;
    const double v = (yy - best[s].explained) + penalty_hard(s, m, d.n(), spec.k1, spec.use_max_mn);
    if (v < chosen_value) {
      chosen_value = v;
      chosen = s;
    }
  }

  const auto& support = best[chosen].support;
  std::vector<double> lambda(m, 0.0);
  if (!support.empty()) {
    const std::size_t k = support.size();
    std::vector<double> sub(k * k);
    std::vector<double> rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
      rhs[a] = c[support[a]];
      for (std::size_t b = 0; b < k; ++b) sub[a * k + b] = psi[support[a] * m + support[b]];
    }
    const auto coef = orthonormal ? rhs : linalg::psd_pseudo_solve(sub, k, rhs, 1e-10);
    for (std::size_t a = 0; a < k; ++a) lambda[support[a]] = coef[a];
  }

  if (spec.t_radius) {
    double l1 = 0.0;
    for (double v : lambda) l1 += std::abs(v);
    if (l1 > *spec.t_radius) {
      const double scale = *spec.t_radius / l1;
      for (auto& v : lambda) v *= scale;
      meta.projected = true;
    }
  }
  return finish(d, y, std::move(lambda), spec, std::move(meta));
}

FitResult fit_soft_threshold(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
                             const SoftFitOptions& opts) {
  spec.validate();
  if (spec.kind != PenaltyKind::SoftThresholdL1) throw InvalidInput("fit_soft_threshold needs an L1 spec");
  if (y.size() != d.n()) throw InvalidInput("observation length does not match the design");
  const std::size_t m = d.m();
  const auto r = l1_weights(d, spec.sigma, spec.l1_multiplier);
  const auto psi = gram_matrix(d);
  const auto c = cross_moments(d, y);
  const double yy = empirical_norm_sq(y);

  SolverMeta meta;
  std::vector<bool> frozen(m, false);
  for (std::size_t j = 0; j < m; ++j)
    if (!(psi[j * m + j] > 0.0)) {
      frozen[j] = true;
      meta.frozen_columns.push_back(j);
    }

  std::vector<double> lambda(m, 0.0);
  std::vector<double> p(m, 0.0);
  const auto objective = [&] {
    double v = yy;
    for (std::size_t j = 0; j < m; ++j) v += lambda[j] * (p[j] - 2.0 * c[j]) + r[j] * std::abs(lambda[j]);
    return v;
  };
  double prev = objective();
  const auto track = [&] {
    const double cur = objective();
    if (cur > prev + 1e-12 * (1.0 + std::abs(prev))) meta.monotone = false;
    prev = cur;
  };

  meta.converged = false;
  if (!spec.t_radius) {
    meta.mode = SolverMode::CoordinateDescent;
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
      double max_delta = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (frozen[j]) continue;
        const double pjj = psi[j * m + j];
        const double rho = c[j] - (p[j] - pjj * lambda[j]);
        const double next = soft_threshold_scalar(rho, 0.5 * r[j]) / pjj;
        const double delta = next - lambda[j];
        if (delta == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) p[k] += delta * psi[k * m + j];
        lambda[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
      track();
      meta.iters = sweep;
      if (max_delta <= opts.tol) {
        meta.converged = true;
        break;
      }
    }
  } else {
    meta.mode = SolverMode::ProjectedProximal;
    const auto eig = linalg::jacobi_eigen(psi, m, 1e-12);
    const double xi_min = eig.values.front();
    const double xi_max = eig.values.back();
    if (!(xi_min > 1e-12 * std::max(xi_max, 1.0))) {
      std::ostringstream os;
      os << "constrained L1 fit needs a positive definite Gram matrix, smallest eigenvalue is " << xi_min;
      throw PreconditionError(os.str());
    }
    const double t = *spec.t_radius;
    const double l = d.bound_l();
    meta.radius_identifiable = t * t * xi_min > 2.0 * l * l;
    meta.radius_rate_compatible =
        t <= std::pow(std::log(static_cast<double>(std::max(m, d.n()))), 0.25);

    const double step = 1.0 / (2.0 * xi_max);
    std::vector<double> next(m);
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
      double norm2 = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (frozen[j]) {
          next[j] = 0.0;
          continue;
        }
        const double u = lambda[j] - step * 2.0 * (p[j] - c[j]);
        next[j] = soft_threshold_scalar(u, step * r[j]);
        norm2 += next[j] * next[j];
      }
      const double norm = std::sqrt(norm2);
      if (norm > t) {
        const double scale = t / norm;
        for (auto& v : next) v *= scale;
      }
      double max_delta = 0.0;
      for (std::size_t j = 0; j < m; ++j) max_delta = std::max(max_delta, std::abs(next[j] - lambda[j]));
      lambda = next;
      p = linalg::sym_matvec(psi, m, lambda);
      track();
      meta.iters = it;
      if (max_delta <= opts.tol) {
        meta.converged = true;
        break;
      }
    }
  }
  return finish(d, y, std::move(lambda), spec, std::move(meta));
}

FitResult fit(const DesignMatrix& d, std::span<const double> y, const PenaltySpec& spec,
              const HardFitOptions& hard, const SoftFitOptions& soft) {
  if (spec.kind == PenaltyKind::HardThreshold) return fit_hard_threshold(d, y, spec, hard);
  return fit_soft_threshold(d, y, spec, soft);
}

double estimate_sigma(const DesignMatrix& d, std::span<const double> y) {
  const auto psi = gram_matrix(d);
  const auto c = cross_moments(d, y);
  const auto lambda = linalg::psd_pseudo_solve(psi, d.m(), c, 1e-10);
  const auto eig = linalg::jacobi_eigen(psi, d.m(), 1e-12);
  std::size_t rank = 0;
  for (double e : eig.values)
    if (e > 1e-10 * eig.values.back()) ++rank;
  if (d.n() <= rank) throw InvalidInput("estimate_sigma needs n larger than the dictionary rank");
  const double res = rss(d, y, lambda);
  return std::sqrt(res * static_cast<double>(d.n()) / static_cast<double>(d.n() - rank));
}

}  // namespace aggreg
