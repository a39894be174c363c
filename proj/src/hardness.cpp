#include "aggreg/hardness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "aggreg/rng.hpp"

namespace aggreg {

double chi2_tail_bound(std::size_t d, double x) {
  if (d < 1) throw InvalidInput("chi2_tail_bound needs d >= 1");
  if (!(x > 0.0)) throw InvalidInput("chi2_tail_bound needs x > 0");
  const double dd = static_cast<double>(d);
  return std::exp(-x * x / (2.0 * (1.0 + x * std::sqrt(2.0 / dd))));
}

double kl_gaussian_fixed_design(std::span<const double> f, std::span<const double> g, double sigma) {
  if (f.size() != g.size()) throw InvalidInput("kl: length mismatch");
  if (!(sigma > 0.0)) throw InvalidInput("kl: sigma must be > 0");
  std::vector<double> diff(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) diff[i] = f[i] - g[i];
  const double n = static_cast<double>(f.size());
  return n / (2.0 * sigma * sigma) * empirical_norm_sq(diff);
}

std::string to_string(HardKind k) { return k == HardKind::MSHard ? "MS-hard" : "L-hard"; }

namespace {

constexpr std::size_t kBitsetMaxLength = 26;

// Calls visit(mask) for every mask of exactly r set bits among `length`.
template <typename Visit>
bool for_each_flip(std::size_t length, std::size_t r, Visit&& visit) {
  if (r == 0) return visit(std::uint64_t{0});
  if (r > length) return true;
  std::vector<std::size_t> idx(r);
  for (std::size_t k = 0; k < r; ++k) idx[k] = k;
  while (true) {
    std::uint64_t mask = 0;
    for (std::size_t k : idx) mask |= std::uint64_t{1} << k;
    if (!visit(mask)) return false;
    std::size_t k = r;
    while (k > 0 && idx[k - 1] == length - r + (k - 1)) --k;
    if (k == 0) return true;
    ++idx[k - 1];
    for (std::size_t t = k; t < r; ++t) idx[t] = idx[t - 1] + 1;
  }
}

double ball_volume(std::size_t length, std::size_t radius) {
  double v = 0.0;
  double binom = 1.0;
  for (std::size_t r = 0; r <= radius && r <= length; ++r) {
    v += binom;
    binom = binom * static_cast<double>(length - r) / static_cast<double>(r + 1);
  }
  return v;
}

}  // namespace

BinaryCode vg_code(std::size_t length, std::optional<std::size_t> target_distance, std::size_t max_words) {
  if (length < 8) throw DomainError("vg_code needs M >= 8; use the two-point construction for smaller M");
  if (length > 63) throw InvalidInput("vg_code supports M <= 63");
  const std::size_t dist = target_distance.value_or((length + 7) / 8);
  if (dist < 1 || dist > length) throw InvalidInput("target distance must lie in [1, M]");

  BinaryCode code;
  code.length = length;
  code.target_distance = dist;
  const std::uint64_t end = std::uint64_t{1} << length;
  const auto full = [&] { return max_words != 0 && code.words.size() >= max_words; };

  if (length <= kBitsetMaxLength) {
    // Mark the radius-(dist-1) ball of every accepted word; a candidate is
    // accepted iff it is unmarked.
    std::vector<bool> covered(static_cast<std::size_t>(end), false);
    for (std::uint64_t w = 0; w < end && !full(); ++w) {
      if (covered[static_cast<std::size_t>(w)]) continue;
      code.words.push_back(w);
      for (std::size_t r = 0; r < dist; ++r)
        for_each_flip(length, r, [&](std::uint64_t mask) {
          covered[static_cast<std::size_t>(w ^ mask)] = true;
          return true;
        });
    }
  } else {
    if (max_words == 0) throw InvalidInput("vg_code with M > 26 needs a max_words cap");
    for (std::uint64_t w = 0; w < end && !full(); ++w) {
      bool ok = true;
      for (std::uint64_t kept : code.words)
        if (static_cast<std::size_t>(std::popcount(w ^ kept)) < dist) {
          ok = false;
          break;
        }
      if (ok) code.words.push_back(w);
    }
  }

  code.min_distance = code_min_distance(code.words, length);
  if (code.min_distance < dist) throw std::logic_error("vg_code produced words closer than the target distance");
  if (!target_distance && max_words == 0) {
    const double floor_card = std::exp2(static_cast<double>(length) / 8.0);
    if (static_cast<double>(code.words.size()) < floor_card)
      throw std::logic_error("vg_code cardinality fell below 2^(M/8)");
  }
  return code;
}

std::size_t code_min_distance(std::span<const std::uint64_t> words, std::size_t length) {
  const std::size_t none = length + 1;
  if (words.size() < 2) return none;
  const double pairs = 0.5 * static_cast<double>(words.size()) * static_cast<double>(words.size() - 1);

  // Pairwise popcounts unless a ball search is clearly cheaper.
  if (length > kBitsetMaxLength || pairs <= 64.0 * static_cast<double>(words.size()) * ball_volume(length, 2)) {
    std::size_t best = none;
    const auto count = static_cast<std::ptrdiff_t>(words.size());
#pragma omp parallel for schedule(dynamic) reduction(min : best)
    for (std::ptrdiff_t a = 0; a < count; ++a)
      for (std::ptrdiff_t b = a + 1; b < count; ++b)
        best = std::min<std::size_t>(best, static_cast<std::size_t>(std::popcount(words[a] ^ words[b])));
    return best;
  }

  // Membership bitmap; the minimum distance is the smallest r such that some
  // word has a member at exactly distance r.
  std::vector<bool> member(std::size_t{1} << length, false);
  for (auto w : words) member[static_cast<std::size_t>(w)] = true;
  for (std::size_t r = 1; r <= length; ++r) {
    bool hit = false;
    for (auto w : words) {
      for_each_flip(length, r, [&](std::uint64_t mask) {
        if (member[static_cast<std::size_t>(w ^ mask)]) hit = true;
        return !hit;
      });
      if (hit) return r;
    }
  }
  return none;
}

namespace {

void record_pairwise(HardInstance& inst) {
  const auto& truths = inst.truth_set;
  inst.kl_max = 0.0;
  inst.separation_min = std::numeric_limits<double>::infinity();
  inst.separation_max = 0.0;
  std::vector<double> diff(inst.design.n());
  for (std::size_t a = 0; a < truths.size(); ++a)
    for (std::size_t b = a + 1; b < truths.size(); ++b) {
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = truths[a][i] - truths[b][i];
      const double sep = empirical_norm_sq(diff);
      inst.separation_min = std::min(inst.separation_min, sep);
      inst.separation_max = std::max(inst.separation_max, sep);
      inst.kl_max = std::max(inst.kl_max, kl_gaussian_fixed_design(truths[a], truths[b], inst.sigma));
    }
  inst.kl_budget = std::log(static_cast<double>(truths.size())) / 16.0;
}

}  // namespace

HardInstance make_ms_hard(std::size_t n, std::size_t m_dict, double sigma) {
  if (m_dict < 2) throw InvalidInput("MS-hard instance needs M >= 2");
  if (!(sigma > 0.0)) throw InvalidInput("MS-hard instance needs sigma > 0");
  const double log_m = std::log(static_cast<double>(m_dict));
  const std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(log_m)));
  if (m_dict * block > n) {
    std::ostringstream os;
    os << "MS-hard instance needs M log M <= n: " << m_dict << " blocks of size " << block << " exceed n = " << n;
    throw CapacityError(os.str());
  }
  // KL between two truths is gamma^2 * block / sigma^2; keep it <= log(M)/16.
  double gamma = sigma / 4.0;
  if (static_cast<double>(block) > log_m) gamma *= std::sqrt(log_m / static_cast<double>(block));

  std::vector<double> values(n * m_dict, 0.0);
  for (std::size_t j = 0; j < m_dict; ++j)
    for (std::size_t i = j * block; i < (j + 1) * block; ++i) values[j * n + i] = gamma;

  HardInstance inst;
  inst.kind = HardKind::MSHard;
  inst.design = DesignMatrix(n, m_dict, std::move(values), gamma);
  inst.gamma = gamma;
  inst.sigma = sigma;
  inst.block_size = block;
  for (std::size_t j = 0; j < m_dict; ++j) {
    const auto col = inst.design.column(j);
    inst.truth_set.emplace_back(col.begin(), col.end());
  }
  record_pairwise(inst);
  return inst;
}

HardInstance make_l_hard(std::size_t n, std::size_t m_dict, double sigma, std::size_t max_truths) {
  if (m_dict < 2) throw InvalidInput("L-hard instance needs M >= 2");
  if (m_dict > n) throw CapacityError("L-hard instance needs M <= n");
  if (!(sigma > 0.0)) throw InvalidInput("L-hard instance needs sigma > 0");

  HardInstance inst;
  inst.kind = HardKind::LHard;
  inst.sigma = sigma;

  if (m_dict < 8) {
    // Two truths, 0 and the constant gamma/sqrt(n): KL = gamma^2 / (2 sigma^2).
    inst.two_point_fallback = true;
    const double gamma = sigma * std::sqrt(std::log(2.0) / 8.0);
    const double level = gamma / std::sqrt(static_cast<double>(n));
    std::vector<double> values(n * m_dict, 0.0);
    for (std::size_t i = 0; i < n; ++i) values[n + i] = level;
    for (std::size_t j = 2; j < m_dict; ++j) values[j * n + j] = gamma;
    inst.design = DesignMatrix(n, m_dict, std::move(values), gamma);
    inst.gamma = gamma;
    inst.truth_set.emplace_back(n, 0.0);
    inst.truth_set.emplace_back(n, level);
    record_pairwise(inst);
    return inst;
  }

  const std::size_t floor_card = static_cast<std::size_t>(std::ceil(std::exp2(static_cast<double>(m_dict) / 8.0)));
  const std::size_t cap = max_truths != 0 ? max_truths : std::max<std::size_t>(64, floor_card);
  auto code = vg_code(m_dict, std::nullopt, cap);
  if (code.words.size() < std::min(cap, floor_card))
    throw std::logic_error("greedy code is smaller than 2^(M/8)");

  std::size_t d_max = 0;
  for (std::size_t a = 0; a < code.words.size(); ++a)
    for (std::size_t b = a + 1; b < code.words.size(); ++b)
      d_max = std::max<std::size_t>(d_max, static_cast<std::size_t>(std::popcount(code.words[a] ^ code.words[b])));
  const double card = static_cast<double>(code.words.size());
  const double gamma = sigma * std::sqrt(std::log(card) / (8.0 * static_cast<double>(d_max)));

  std::vector<double> values(n * m_dict, 0.0);
  for (std::size_t j = 0; j < m_dict; ++j) values[j * n + j] = gamma;
  inst.design = DesignMatrix(n, m_dict, std::move(values), gamma);
  inst.gamma = gamma;
  for (auto w : code.words) {
    std::vector<double> g(n, 0.0);
    for (std::size_t j = 0; j < m_dict; ++j)
      if ((w >> j) & 1U) g[j] = gamma;
    inst.truth_set.push_back(std::move(g));
  }
  inst.code_words = std::move(code.words);
  record_pairwise(inst);
  return inst;
}

MinimaxResult minimax_eval(const HardInstance& inst, const Estimator& estimator, std::size_t reps,
                           std::uint64_t seed, std::optional<double> sigma_override, Exec exec) {
  if (reps < 1) throw InvalidInput("minimax_eval needs reps >= 1");
  const double sigma = sigma_override.value_or(inst.sigma);
  if (!(sigma >= 0.0)) throw InvalidInput("noise level must be >= 0");
  const std::size_t truths = inst.truth_set.size();
  const std::size_t n = inst.design.n();
  const std::size_t total = truths * reps;
  std::vector<double> risks(total, 0.0);
  std::vector<std::string> errors(total);

  const auto run_one = [&](std::size_t idx) {
    const std::size_t t = idx / reps;
    const std::size_t r = idx % reps;
    const auto& g = inst.truth_set[t];
    auto eng = rng::engine(seed, rng::Stream::noise, t, r);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g[i] + sigma * normal(eng);
    try {
      const auto fitted = estimator(inst.design, y);
      if (fitted.size() != n) throw InvalidInput("estimator returned the wrong number of fitted values");
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = fitted[i] - g[i];
      risks[idx] = empirical_norm_sq(diff);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
      if (errors[idx].empty()) errors[idx] = "unknown error";
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(total);
  if (exec == Exec::serial) {
    for (std::ptrdiff_t k = 0; k < count; ++k) run_one(static_cast<std::size_t>(k));
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) run_one(static_cast<std::size_t>(k));
  }

  for (std::size_t idx = 0; idx < total; ++idx)
    if (!errors[idx].empty()) {
      std::ostringstream os;
      os << "estimator failed on truth " << idx / reps << ", replication " << idx % reps << ": " << errors[idx];
      throw EstimatorFailure(os.str(), idx / reps, idx % reps);
    }

  MinimaxResult out;
  out.mean_risk.resize(truths);
  out.mc_se.resize(truths);
  for (std::size_t t = 0; t < truths; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) sum += risks[t * reps + r];
    const double mean = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) ss += (risks[t * reps + r] - mean) * (risks[t * reps + r] - mean);
    out.mean_risk[t] = mean;
    out.mc_se[t] = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
    if (t == 0 || mean > out.max_mean) {
      out.max_mean = mean;
      out.max_se = out.mc_se[t];
      out.worst_truth = t;
    }
  }
  return out;
}

}  // namespace aggreg
