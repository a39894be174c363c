#include "aggreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "aggreg/csv_io.hpp"
#include "aggreg/rng.hpp"

namespace aggreg {

std::string to_string(RateKind k) {
  switch (k) {
    case RateKind::MS: return "MS";
    case RateKind::C: return "C";
    case RateKind::L: return "L";
  }
  return "?";
}

std::string to_string(RateVariant v) {
  switch (v) {
    case RateVariant::base: return "base";
    case RateVariant::tilde: return "tilde";
    case RateVariant::bar: return "bar";
  }
  return "?";
}

std::string to_string(DictionaryKind k) {
  switch (k) {
    case DictionaryKind::OrthonormalCosine: return "orthonormal-cosine";
    case DictionaryKind::IndicatorBlocks: return "indicator-blocks";
    case DictionaryKind::PointMass: return "point-mass";
    case DictionaryKind::RandomBounded: return "random-bounded";
    case DictionaryKind::UserCsv: return "user-csv";
  }
  return "?";
}

std::string to_string(TruthKind k) {
  switch (k) {
    case TruthKind::InDictionary: return "in-dictionary";
    case TruthKind::ConvexCombo: return "convex-combo";
    case TruthKind::LinearCombo: return "linear-combo";
    case TruthKind::OutsideSpan: return "outside-span";
  }
  return "?";
}

std::string to_string(DesignKind k) { return k == DesignKind::FixedGrid ? "fixed-grid" : "random-uniform"; }

double psi_rate(std::size_t n, std::size_t m_dict, RateKind kind, RateVariant variant) {
  if (n < 1) throw InvalidInput("psi_rate needs n >= 1");
  if (m_dict < 2) throw InvalidInput("psi_rate needs M >= 2");
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m_dict);
  const double big = std::max(mm, nn);
  const bool small_m = m_dict * m_dict <= n;  // M <= sqrt(n), equality on the first branch
  switch (variant) {
    case RateVariant::base:
      switch (kind) {
        case RateKind::MS: return std::log(mm) / nn;
        case RateKind::L: return mm / nn;
        case RateKind::C: return small_m ? mm / nn : std::sqrt(std::log1p(mm / std::sqrt(nn)) / nn);
      }
      break;
    case RateVariant::tilde:
      switch (kind) {
        case RateKind::MS: return std::log(big) / nn;
        case RateKind::L: return mm / nn * std::log1p(big / mm);
        case RateKind::C: return small_m ? mm * std::log(nn) / nn : std::sqrt(std::log1p(big / std::sqrt(nn)) / nn);
      }
      break;
    case RateVariant::bar:
      switch (kind) {
        case RateKind::MS: return std::log(big) / nn;
        case RateKind::L: return mm * std::log(big) / nn;
        case RateKind::C: return small_m ? mm * std::log(nn) / nn : std::sqrt(std::log(mm) / nn);
      }
      break;
  }
  throw InvalidInput("unknown rate kind");
}

std::size_t ExperimentConfig::m_for(std::size_t n) const {
  if (m_sqrt_multiple > 0)
    return m_sqrt_multiple * static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return m_dict;
}

void ExperimentConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("sigma must be finite and >= 0");
  try {
    penalty.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("penalty: ") + e.what());
  }
  if (design == DesignKind::RandomUniform) {
    if (holdout_size < 1) throw ConfigError("holdout_size must be >= 1");
    if (dictionary == DictionaryKind::PointMass || dictionary == DictionaryKind::UserCsv)
      throw ConfigError(to_string(dictionary) + " dictionary needs the fixed-grid design");
  }
  if (dictionary == DictionaryKind::UserCsv && user_csv.empty())
    throw ConfigError("user-csv dictionary needs a design CSV path");
  for (double w : truth.weights)
    if (!std::isfinite(w)) throw ConfigError("truth weights must be finite");
  if (truth.kind == TruthKind::ConvexCombo && !truth.uniform) {
    double sum = 0.0;
    for (double w : truth.weights) {
      if (w < 0.0) throw ConfigError("convex-combo weights must be nonnegative");
      sum += w;
    }
    if (sum > 1.0 + 1e-12) throw ConfigError("convex-combo weights must sum to at most 1");
  }
  if (truth.kind == TruthKind::OutsideSpan && (!std::isfinite(truth.amplitude) || !std::isfinite(truth.frequency)))
    throw ConfigError("outside-span amplitude and frequency must be finite");
  for (std::size_t n : n_grid) {
    if (n < 1) throw ConfigError("sample sizes must be >= 1");
    const std::size_t m = m_for(n);
    if (m < 2) throw ConfigError("dictionary size must be >= 2");
    if (design == DesignKind::FixedGrid &&
        (dictionary == DictionaryKind::OrthonormalCosine || dictionary == DictionaryKind::PointMass) && m > n)
      throw ConfigError(to_string(dictionary) + " dictionary needs M <= n on the fixed grid");
    if (truth.kind == TruthKind::InDictionary && truth.index >= m) {
      std::ostringstream os;
      os << "truth index " << truth.index << " is out of range for M = " << m;
      throw ConfigError(os.str());
    }
    if ((truth.kind == TruthKind::ConvexCombo || truth.kind == TruthKind::LinearCombo) && !truth.uniform &&
        truth.weights.size() > m) {
      std::ostringstream os;
      os << "truth weights reference column " << truth.weights.size() - 1 << " but M = " << m;
      throw ConfigError(os.str());
    }
  }
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Instance {
  std::vector<double> x;
  DesignMatrix design;
  std::vector<double> f;
};

std::vector<double> design_points(const ExperimentConfig& cfg, std::size_t n, std::uint64_t stream,
                                  std::size_t tag) {
  std::vector<double> x(n);
  if (cfg.design == DesignKind::FixedGrid && stream == static_cast<std::uint64_t>(rng::Stream::design)) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return x;
  }
  auto eng = rng::engine(cfg.seed, static_cast<rng::Stream>(stream), n, tag);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& v : x) v = unif(eng);
  return x;
}

// Modified Gram-Schmidt in the empirical inner product, two passes.
void orthonormalize(std::vector<double>& values, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) {
    double* v = values.data() + j * n;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        const double* q = values.data() + k * n;
        double ip = 0.0;
        for (std::size_t i = 0; i < n; ++i) ip += v[i] * q[i];
        ip /= nn;
        for (std::size_t i = 0; i < n; ++i) v[i] -= ip * q[i];
      }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm / nn);
    if (norm < 1e-10) throw InvalidInput("cosine dictionary is rank deficient on this design");
    for (std::size_t i = 0; i < n; ++i) v[i] /= norm;
  }
}

DesignMatrix dictionary_at(const ExperimentConfig& cfg, std::size_t m, const std::vector<double>& x,
                           bool empirical_orthonormal) {
  const std::size_t n = x.size();
  std::vector<double> values(n * m, 0.0);
  switch (cfg.dictionary) {
    case DictionaryKind::OrthonormalCosine: {
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
          values[j * n + i] = j == 0 ? 1.0 : std::sqrt(2.0) * std::cos(kPi * static_cast<double>(j) * x[i]);
      if (empirical_orthonormal) {
        orthonormalize(values, n, m);
        return DesignMatrix::with_inferred_bound(n, m, std::move(values));
      }
      return DesignMatrix(n, m, std::move(values), std::sqrt(2.0));
    }
    case DictionaryKind::IndicatorBlocks: {
      for (std::size_t i = 0; i < n; ++i) {
        const auto j = std::min(m - 1, static_cast<std::size_t>(x[i] * static_cast<double>(m)));
        values[j * n + i] = 1.0;
      }
      return DesignMatrix(n, m, std::move(values), 1.0);
    }
    case DictionaryKind::PointMass: {
      for (std::size_t j = 0; j < m; ++j) values[j * n + j] = 1.0;
      return DesignMatrix(n, m, std::move(values), 1.0);
    }
    case DictionaryKind::RandomBounded: {
      // f_j(x) = cos(a_j x + b_j), frequencies and phases fixed by the seed.
      auto eng = rng::engine(cfg.seed, rng::Stream::dictionary, m);
      std::uniform_real_distribution<double> freq(0.0, 2.0 * kPi * static_cast<double>(m));
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      for (std::size_t j = 0; j < m; ++j) {
        const double a = freq(eng);
        const double b = phase(eng);
        for (std::size_t i = 0; i < n; ++i) values[j * n + i] = std::cos(a * x[i] + b);
      }
      return DesignMatrix(n, m, std::move(values), 1.0);
    }
    case DictionaryKind::UserCsv: {
      auto d = io::read_design_csv(cfg.user_csv);
      if (d.n() != n || d.m() != m) {
        std::ostringstream os;
        os << "user design is " << d.n() << "x" << d.m() << ", config needs " << n << "x" << m;
        throw InvalidInput(os.str());
      }
      return d;
    }
  }
  throw InvalidInput("unknown dictionary kind");
}

std::vector<double> truth_at(const ExperimentConfig& cfg, const DesignMatrix& d, const std::vector<double>& x) {
  const std::size_t m = d.m();
  const auto& t = cfg.truth;
  switch (t.kind) {
    case TruthKind::InDictionary: {
      if (t.index >= m) throw InvalidInput("truth index exceeds the dictionary size");
      const auto col = d.column(t.index);
      return {col.begin(), col.end()};
    }
    case TruthKind::ConvexCombo:
    case TruthKind::LinearCombo: {
      std::vector<double> w(m, 0.0);
      if (t.uniform) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(m));
      } else {
        if (t.weights.size() > m) throw InvalidInput("truth weights reference a column beyond M");
        std::copy(t.weights.begin(), t.weights.end(), w.begin());
      }
      return combine(d, w);
    }
    case TruthKind::OutsideSpan: {
      std::vector<double> f(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) f[i] = t.amplitude * std::sin(2.0 * kPi * t.frequency * x[i]);
      return f;
    }
  }
  throw InvalidInput("unknown truth kind");
}

Instance make_instance(const ExperimentConfig& cfg, std::size_t n, std::size_t rep) {
  Instance inst;
  inst.x = design_points(cfg, n, static_cast<std::uint64_t>(rng::Stream::design), rep);
  inst.design = dictionary_at(cfg, cfg.m_for(n), inst.x, cfg.design == DesignKind::FixedGrid);
  inst.f = truth_at(cfg, inst.design, inst.x);
  return inst;
}

// Noise-free evaluation sample for population risks under the uniform law.
Instance make_holdout(const ExperimentConfig& cfg, std::size_t n) {
  Instance inst;
  inst.x = design_points(cfg, cfg.holdout_size, static_cast<std::uint64_t>(rng::Stream::holdout), n);
  inst.design = dictionary_at(cfg, cfg.m_for(n), inst.x, false);
  inst.f = truth_at(cfg, inst.design, inst.x);
  return inst;
}

std::vector<double> add_noise(const ExperimentConfig& cfg, const std::vector<double>& f, std::size_t n,
                              std::size_t rep) {
  std::vector<double> y(f);
  if (cfg.sigma == 0.0) return y;
  auto eng = rng::engine(cfg.seed, rng::Stream::noise, n, rep);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : y) v += cfg.sigma * normal(eng);
  return y;
}

void mean_and_se(const std::vector<double>& v, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

Dataset gen_data(const ExperimentConfig& cfg, std::size_t n, std::size_t rep) {
  cfg.validate();
  auto inst = make_instance(cfg, n, rep);
  Dataset ds;
  ds.targets.y_vals = add_noise(cfg, inst.f, n, rep);
  ds.targets.f_vals = std::move(inst.f);
  ds.x = std::move(inst.x);
  ds.design = std::move(inst.design);
  return ds;
}

RateVariant rate_variant_for(const ExperimentConfig& cfg) {
  if (cfg.design == DesignKind::RandomUniform) return RateVariant::tilde;
  if (cfg.penalty.kind == PenaltyKind::SoftThresholdL1) return RateVariant::bar;
  return RateVariant::base;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec) {
  cfg.validate();
  ExperimentResult out;
  out.variant = rate_variant_for(cfg);
  HardFitOptions hard = cfg.hard_options;
  // Parallelism lives in the replication loop; per-replication kernels run
  // serially (the kernels are bit-identical either way).
  hard.exec = Exec::serial;

  for (std::size_t n : cfg.n_grid) {
    const std::size_t m = cfg.m_for(n);
    const bool fixed = cfg.design == DesignKind::FixedGrid;
    // Risk is measured against (eval.design, eval.f): the design itself for
    // the fixed grid, a noise-free hold-out sample otherwise.
    const Instance eval = fixed ? make_instance(cfg, n, 0) : make_holdout(cfg, n);
    const std::array<double, 3> oracle{ms_oracle(eval.design, eval.f).risk,
                                       convex_oracle(eval.design, eval.f, cfg.convex_options).risk,
                                       linear_oracle(eval.design, eval.f).risk};

    std::vector<ReplicationRecord> recs(cfg.reps);
    const auto run_rep = [&](std::size_t r) {
      auto& rec = recs[r];
      rec.n = n;
      rec.m_dict = m;
      rec.rep_index = r;
      rec.oracle_risks = oracle;
      try {
        FitResult fr;
        if (fixed) {
          const auto y = add_noise(cfg, eval.f, n, r);
          fr = fit(eval.design, y, cfg.penalty, hard, cfg.soft_options);
        } else {
          const auto inst = make_instance(cfg, n, r);
          const auto y = add_noise(cfg, inst.f, n, r);
          fr = fit(inst.design, y, cfg.penalty, hard, cfg.soft_options);
        }
        rec.risk = rss(eval.design, eval.f, fr.weights);
        rec.excess_ms = rec.risk - oracle[0];
        rec.excess_c = rec.risk - oracle[1];
        rec.excess_l = rec.risk - oracle[2];
        rec.sparsity = fr.weights.sparsity();
        rec.fit_meta = std::move(fr.solver_meta);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    };

    const auto count = static_cast<std::ptrdiff_t>(cfg.reps);
    if (exec == Exec::serial) {
      for (std::ptrdiff_t r = 0; r < count; ++r) run_rep(static_cast<std::size_t>(r));
    } else {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t r = 0; r < count; ++r) run_rep(static_cast<std::size_t>(r));
    }

    for (RateKind kind : {RateKind::MS, RateKind::C, RateKind::L}) {
      std::vector<double> vals;
      std::size_t failed = 0;
      for (const auto& rec : recs) {
        if (rec.failed) {
          ++failed;
          continue;
        }
        vals.push_back(kind == RateKind::MS ? rec.excess_ms : kind == RateKind::C ? rec.excess_c : rec.excess_l);
      }
      SummaryRow row;
      row.n = n;
      row.m_dict = m;
      row.kind = kind;
      mean_and_se(vals, row.mean_excess, row.mc_se);
      row.psi_rate = psi_rate(n, m, kind, out.variant);
      row.ratio = row.mean_excess / row.psi_rate;
      row.reps_ok = vals.size();
      row.reps_failed = failed;
      if (failed > 0) out.partial = true;
      out.summary.push_back(row);
    }
    for (auto& rec : recs) out.records.push_back(std::move(rec));
  }
  return out;
}

SlopeFit rate_slope(const std::vector<RatePoint>& points) {
  SlopeFit fit;
  std::vector<double> lx, ly, lse;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (!(p.n > 0.0)) throw InvalidInput("rate_slope needs positive sample sizes");
    if (!(p.mean > 0.0)) {
      fit.excluded.push_back(k);
      continue;
    }
    lx.push_back(std::log(p.n));
    ly.push_back(std::log(p.mean));
    lse.push_back(p.se / p.mean);  // delta method for log(mean)
  }
  std::set<double> distinct(lx.begin(), lx.end());
  if (distinct.size() < 3) throw InvalidInput("rate_slope needs at least 3 distinct n with positive mean excess");

  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double var = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double w = (lx[i] - mx) / sxx;
    var += w * w * lse[i] * lse[i];
  }
  fit.halfwidth = 1.96 * std::sqrt(var);
  return fit;
}

std::vector<RatePoint> rate_points(const ExperimentResult& res, RateKind kind) {
  std::vector<RatePoint> pts;
  for (const auto& row : res.summary)
    if (row.kind == kind) pts.push_back({static_cast<double>(row.n), row.mean_excess, row.mc_se});
  return pts;
}

double event_a_bound(std::size_t n, std::size_t m_dict, double multiplier) {
  if (n < 1 || m_dict < 2) throw InvalidInput("event_a_bound needs n >= 1 and M >= 2");
  if (!(multiplier > 0.0)) throw InvalidInput("event_a_bound needs a positive multiplier");
  const double big_l = 2.0 * std::log(static_cast<double>(m_dict)) + std::log(static_cast<double>(n));
  return static_cast<double>(m_dict) * 4.0 / (std::sqrt(2.0 * kPi) * multiplier * std::sqrt(big_l)) *
         std::exp(-multiplier * multiplier * big_l / 8.0);
}

EventAResult event_a_diagnostic(const EventAConfig& ec, Exec exec) {
  if (ec.reps < 1) throw InvalidInput("event_a_diagnostic needs reps >= 1");
  if (!(ec.sigma >= 0.0)) throw InvalidInput("event_a_diagnostic needs sigma >= 0");
  ExperimentConfig cfg;
  cfg.n_grid = {ec.n};
  cfg.m_dict = ec.m_dict;
  cfg.dictionary = ec.dictionary;
  cfg.sigma = ec.sigma;
  cfg.seed = ec.seed;
  cfg.truth = TruthSpec{};
  cfg.validate();
  const auto inst = make_instance(cfg, ec.n, 0);
  const auto& d = inst.design;
  // Weights are linear in sigma; sigma = 0 gives zero thresholds and zero V_j.
  auto r = l1_weights(d, 1.0, ec.multiplier);
  for (auto& v : r) v *= ec.sigma;
  const std::size_t n = d.n();
  const std::size_t m = d.m();

  std::vector<unsigned char> failed(ec.reps, 0);
  const auto run_rep = [&](std::size_t rep) {
    auto eng = rng::engine(ec.seed, rng::Stream::noise, n, rep);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> w(n);
    for (auto& v : w) v = ec.sigma * normal(eng);
    for (std::size_t j = 0; j < m; ++j) {
      const auto col = d.column(j);
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += col[i] * w[i];
      v /= static_cast<double>(n);
      if (2.0 * std::abs(v) > r[j]) {
        failed[rep] = 1;
        return;
      }
    }
  };
  const auto count = static_cast<std::ptrdiff_t>(ec.reps);
  if (exec == Exec::serial) {
    for (std::ptrdiff_t k = 0; k < count; ++k) run_rep(static_cast<std::size_t>(k));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) run_rep(static_cast<std::size_t>(k));
  }

  EventAResult res;
  res.reps = ec.reps;
  for (auto f : failed) res.failures += f;
  res.frequency = static_cast<double>(res.failures) / static_cast<double>(ec.reps);
  res.mc_se = std::sqrt(res.frequency * (1.0 - res.frequency) / static_cast<double>(ec.reps));
  res.bound = event_a_bound(n, m, ec.multiplier);
  return res;
}

}  // namespace aggreg
