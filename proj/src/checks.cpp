#include "aggreg/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aggreg/core.hpp"
#include "aggreg/hardness.hpp"
#include "aggreg/harness.hpp"
#include "aggreg/oracles.hpp"
#include "aggreg/rng.hpp"

namespace aggreg {

ChiSquareTail chi2_tail_monte_carlo(std::size_t d, double x, std::size_t draws, std::uint64_t seed,
                                    const ChiSquareBoundFn& bound) {
  if (draws < 1) throw InvalidInput("chi2_tail_monte_carlo needs draws >= 1");
  const double dd = static_cast<double>(d);
  const double level = dd + x * std::sqrt(2.0 * dd);
  // Fixed-size blocks with their own streams keep the count thread-count independent.
  constexpr std::size_t kBlock = 65536;
  const std::size_t blocks = (draws + kBlock - 1) / kBlock;
  std::vector<std::size_t> hits(blocks, 0);
  const auto count = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    auto eng = rng::engine(seed, rng::Stream::check, d * 1000003ULL + static_cast<std::uint64_t>(x * 1000.0),
                           static_cast<std::uint64_t>(b));
    std::chi_squared_distribution<double> chi(dd);
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(draws, lo + kBlock);
    std::size_t h = 0;
    for (std::size_t k = lo; k < hi; ++k)
      if (chi(eng) >= level) ++h;
    hits[static_cast<std::size_t>(b)] = h;
  }
  std::size_t total = 0;
  for (auto h : hits) total += h;
  ChiSquareTail out;
  out.draws = draws;
  out.tail = static_cast<double>(total) / static_cast<double>(draws);
  out.bound = bound(d, x);
  out.slack = 3.0 * std::sqrt(out.bound * (1.0 - out.bound) / static_cast<double>(draws));
  return out;
}

MaureyTrials maurey_trials(std::size_t trials, std::size_t max_m, std::size_t max_grid, std::uint64_t seed,
                           double slack) {
  if (max_m < 2 || max_grid < 1) throw InvalidInput("maurey_trials needs max_m >= 2 and max_grid >= 1");
  MaureyTrials out;
  out.trials = trials;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<double> margins(trials, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    auto eng = rng::engine(seed, rng::Stream::check, 0x4d41ULL, static_cast<std::uint64_t>(t));
    std::uniform_int_distribution<std::size_t> pick_m(2, max_m);
    std::uniform_int_distribution<std::size_t> pick_grid(1, max_grid);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::size_t m_dict = pick_m(eng);
    const std::size_t grid = pick_grid(eng);
    const std::size_t n = 24;
    std::vector<double> values(n * m_dict);
    for (auto& v : values) v = unif(eng);
    const DesignMatrix d(n, m_dict, std::move(values), 1.0);
    std::vector<double> f(n);
    for (auto& v : f) v = 1.5 * unif(eng);
    const double bound_l = d.bound_l();
    const auto simplex = convex_oracle(d, f);
    const auto grid_best = maurey_grid_oracle(d, f, grid);
    margins[static_cast<std::size_t>(t)] =
        grid_best.risk - (simplex.risk + bound_l * bound_l / static_cast<double>(grid));
  }
  for (double mg : margins) {
    out.worst_margin = std::max(out.worst_margin, mg);
    if (mg > slack) ++out.violations;
  }
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult make(std::string name, double measured, double bound, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.bound = bound;
  r.pass = measured <= bound;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

std::vector<CheckResult> run_checks(const CheckOptions& opts) {
  if (!opts.inject_fault.empty() && opts.inject_fault != "chi2-bound")
    throw InvalidInput("unknown fault '" + opts.inject_fault + "'");
  std::vector<CheckResult> out;

  ChiSquareBoundFn bound = [](std::size_t d, double x) { return chi2_tail_bound(d, x); };
  if (opts.inject_fault == "chi2-bound")
    bound = [](std::size_t d, double x) {
      return std::exp(-x * x / (0.2 * (1.0 + x * std::sqrt(2.0 / static_cast<double>(d)))));
    };
  for (std::size_t d : {1, 5, 20, 100})
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
      const auto t = chi2_tail_monte_carlo(d, x, opts.chi2_draws, opts.seed, bound);
      out.push_back(make("chi2-tail-bound d=" + std::to_string(d) + " x=" + fmt(x), t.tail, t.bound + t.slack,
                         "tail=" + fmt(t.tail) + " bound=" + fmt(t.bound) + " slack=" + fmt(t.slack)));
    }

  {
    const auto m = maurey_trials(opts.maurey_trials, 6, 5, opts.seed);
    out.push_back(make("maurey-grid", static_cast<double>(m.violations), 0.0,
                       std::to_string(m.trials) + " trials, worst margin " + fmt(m.worst_margin)));
  }

  {
    EventAConfig ec;
    ec.reps = opts.event_a_reps;
    ec.seed = opts.seed;
    const auto r = event_a_diagnostic(ec);
    const double slack = 3.0 * std::sqrt(r.bound * (1.0 - r.bound) / static_cast<double>(r.reps));
    out.push_back(make("event-a-union-bound n=100 M=10", r.frequency, r.bound + slack,
                       std::to_string(r.failures) + "/" + std::to_string(r.reps) + " failures, bound=" +
                           fmt(r.bound) + " slack=" + fmt(slack)));
  }

  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{16, 4}, {64, 16}, {256, 32}}) {
    const auto inst = make_ms_hard(n, m, 1.0);
    const double expected = 2.0 * inst.gamma * inst.gamma * static_cast<double>(inst.block_size) / static_cast<double>(n);
    const double spread = std::max(std::abs(inst.separation_min - expected), std::abs(inst.separation_max - expected));
    out.push_back(make("kl-budget-ms n=" + std::to_string(n) + " M=" + std::to_string(m), inst.kl_max,
                       inst.kl_budget * (1.0 + 1e-12), "separation spread " + fmt(spread)));
    out.push_back(make("ms-hard-separation n=" + std::to_string(n) + " M=" + std::to_string(m), spread,
                       1e-15 + 1e-12 * expected, "expected " + fmt(expected)));
  }

  for (std::size_t m : {2, 8, 16, 24}) {
    const auto inst = make_l_hard(64, m, 1.0);
    out.push_back(make("kl-budget-l n=64 M=" + std::to_string(m), inst.kl_max, inst.kl_budget * (1.0 + 1e-12),
                       "card " + std::to_string(inst.truth_set.size())));
  }

  for (std::size_t m : {8, 16}) {
    const auto code = vg_code(m);
    const double floor_card = std::exp2(static_cast<double>(m) / 8.0);
    out.push_back(make("vg-code-distance M=" + std::to_string(m),
                       static_cast<double>(code.target_distance), static_cast<double>(code.min_distance),
                       "card " + std::to_string(code.words.size()) + " >= " + fmt(floor_card)));
    out.push_back(make("vg-code-cardinality M=" + std::to_string(m), floor_card,
                       static_cast<double>(code.words.size()), ""));
  }
  return out;
}

}  // namespace aggreg
