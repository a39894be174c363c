#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "aggreg/hardness.hpp"
#include "aggreg/oracles.hpp"
#include "helpers.hpp"
#include "reference/reference.hpp"

using namespace aggreg;

namespace {

double sep(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST_SUITE("hardness") {
  TEST_CASE("chi-square bound examples") {
    CHECK(chi2_tail_bound(1, 1.0) == doctest::Approx(0.81293).epsilon(1e-5));
    CHECK(chi2_tail_bound(7, 1e-9) == doctest::Approx(1.0).epsilon(1e-12));
    // Exact tail for d = 1: P{|Z| >= sqrt(1 + sqrt 2)}.
    const double exact = 2.0 * ref::normal_sf(std::sqrt(1.0 + std::sqrt(2.0)));
    CHECK(exact == doctest::Approx(0.12025).epsilon(1e-4));
    CHECK(chi2_tail_bound(1, 1.0) >= exact);
    CHECK_THROWS_AS(chi2_tail_bound(0, 1.0), InvalidInput);
  }

  TEST_CASE("chi-square bound decreases in x") {
    for (std::size_t d : {1, 5, 20, 100})
      for (double x = 0.1; x < 6.0; x += 0.1) CHECK(chi2_tail_bound(d, x + 0.1) < chi2_tail_bound(d, x));
  }

  TEST_CASE("gaussian kl") {
    const auto f = testutil::random_vector(16, 1);
    CHECK(kl_gaussian_fixed_design(f, f, 1.0) == 0.0);
    std::vector<double> g = f;
    g[3] += 2.0;
    // n/(2 sigma^2) * (4/n) = 2 / sigma^2.
    CHECK(kl_gaussian_fixed_design(f, g, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(kl_gaussian_fixed_design(f, g, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("vg code small cases") {
    const auto all = vg_code(8, 1);
    CHECK(all.words.size() == 256);
    const auto pair = vg_code(8, 8);
    CHECK(pair.words == std::vector<std::uint64_t>{0, 255});
    CHECK(pair.min_distance == 8);
    CHECK_THROWS_AS(vg_code(7), DomainError);
  }

  TEST_CASE("vg code cardinalities equal the lexicode dimensions") {
    // Greedy lexicographic codes are linear: distance 2 gives the even-weight
    // code (2^(M-1) words), distance 3 the shortened Hamming code
    // (2^(M - ceil(log2(M+1))) words).
    const auto c16 = vg_code(16);
    CHECK(c16.target_distance == 2);
    CHECK(c16.words.size() == 32768);
    CHECK(c16.min_distance == 2);
    const auto c24 = vg_code(24);
    CHECK(c24.target_distance == 3);
    CHECK(c24.words.size() == 524288);
    CHECK(c24.min_distance >= 3);
    CHECK(static_cast<double>(c24.words.size()) >= std::exp2(3.0));
  }

  TEST_CASE("vg code words are pairwise separated (independent check)") {
    const auto c = vg_code(12, 4);
    for (std::size_t a = 0; a < c.words.size(); ++a)
      for (std::size_t b = a + 1; b < c.words.size(); ++b) CHECK(std::popcount(c.words[a] ^ c.words[b]) >= 4);
    CHECK(code_min_distance(c.words, 12) == c.min_distance);
    CHECK(code_min_distance(std::vector<std::uint64_t>{5}, 12) == 13);
  }

  TEST_CASE("vg code with a word cap") {
    const auto c = vg_code(40, 5, 50);
    CHECK(c.words.size() == 50);
    CHECK(c.min_distance >= 5);
  }

  TEST_CASE("ms-hard examples") {
    const auto inst = make_ms_hard(16, 4, 1.0);
    CHECK(inst.block_size == 1);
    CHECK(inst.gamma == 0.25);
    CHECK(inst.separation_min == doctest::Approx(0.0078125).epsilon(1e-15));
    CHECK(inst.separation_max == inst.separation_min);
    CHECK_THROWS_AS(make_ms_hard(8, 8, 1.0), CapacityError);
    try {
      make_ms_hard(8, 8, 1.0);
    } catch (const CapacityError& e) {
      CHECK(std::string(e.what()).find("M log M <= n") != std::string::npos);
    }
  }

  TEST_CASE("ms-hard separations and kl budget") {
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{16, 4}, {64, 16}, {256, 32}, {200, 20}, {40, 2}}) {
      const auto inst = make_ms_hard(n, m, 1.3);
      const double expected = 2.0 * inst.gamma * inst.gamma * static_cast<double>(inst.block_size) / static_cast<double>(n);
      double kl_max = 0.0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
          CHECK(sep(inst.truth_set[a], inst.truth_set[b]) == doctest::Approx(expected).epsilon(1e-14));
          kl_max = std::max(kl_max, kl_gaussian_fixed_design(inst.truth_set[a], inst.truth_set[b], 1.3));
        }
      CHECK(kl_max <= std::log(static_cast<double>(m)) / 16.0 * (1.0 + 1e-12));
      CHECK(inst.kl_max == doctest::Approx(kl_max).epsilon(1e-12));
    }
  }

  TEST_CASE("l-hard separations and kl budget") {
    for (std::size_t m : {2, 5, 8, 12, 16}) {
      const auto inst = make_l_hard(64, m, 0.8);
      const std::size_t card = inst.truth_set.size();
      CHECK(card >= 2);
      double kl_max = 0.0;
      for (std::size_t a = 0; a < card; ++a)
        for (std::size_t b = a + 1; b < card; ++b) {
          const double s = sep(inst.truth_set[a], inst.truth_set[b]);
          CHECK(s > 0.0);
          if (!inst.two_point_fallback) {
            const auto ham = std::popcount(inst.code_words[a] ^ inst.code_words[b]);
            CHECK(s == doctest::Approx(inst.gamma * inst.gamma * ham / 64.0).epsilon(1e-13));
          }
          kl_max = std::max(kl_max, kl_gaussian_fixed_design(inst.truth_set[a], inst.truth_set[b], 0.8));
        }
      CHECK(kl_max <= std::log(static_cast<double>(card)) / 16.0 * (1.0 + 1e-12));
      CHECK(inst.two_point_fallback == (m < 8));
    }
    CHECK_THROWS_AS(make_l_hard(10, 11, 1.0), CapacityError);
  }

  TEST_CASE("l-hard two-point fallback") {
    const auto inst = make_l_hard(16, 2, 1.0);
    REQUIRE(inst.truth_set.size() == 2);
    for (double v : inst.truth_set[0]) CHECK(v == 0.0);
    for (double v : inst.truth_set[1]) CHECK(v == doctest::Approx(inst.gamma / 4.0).epsilon(1e-15));
  }

  TEST_CASE("minimax: noiseless interpolation has zero risk") {
    const auto inst = make_ms_hard(64, 16, 1.0);
    const Estimator identity = [](const DesignMatrix&, std::span<const double> y) {
      return std::vector<double>(y.begin(), y.end());
    };
    const auto r = minimax_eval(inst, identity, 3, 1, 0.0);
    CHECK(r.max_mean == 0.0);
    const Estimator ms = [](const DesignMatrix& d, std::span<const double> y) {
      return combine(d, ms_oracle(d, y).weights);
    };
    CHECK(minimax_eval(inst, ms, 2, 1, 0.0).max_mean == 0.0);
  }

  TEST_CASE("minimax: identity estimator risk equals the noise variance") {
    const auto inst = make_ms_hard(64, 16, 1.0);
    const Estimator identity = [](const DesignMatrix&, std::span<const double> y) {
      return std::vector<double>(y.begin(), y.end());
    };
    const auto r = minimax_eval(inst, identity, 200, 5);
    for (std::size_t t = 0; t < r.mean_risk.size(); ++t)
      CHECK(std::abs(r.mean_risk[t] - 1.0) <= 5.0 * r.mc_se[t]);
    const auto s = minimax_eval(inst, identity, 200, 5, std::nullopt, Exec::serial);
    CHECK(s.mean_risk == r.mean_risk);
    CHECK(s.max_mean == r.max_mean);
  }

  TEST_CASE("minimax: estimator failures carry their indices") {
    const auto inst = make_ms_hard(64, 16, 1.0);
    const Estimator flaky = [&](const DesignMatrix&, std::span<const double> y) -> std::vector<double> {
      // Truth 3 has its block at indices [3b, 4b): detect it through the noiseless response.
      if (y[3 * inst.block_size] != 0.0) throw std::runtime_error("boom");
      return std::vector<double>(y.begin(), y.end());
    };
    try {
      minimax_eval(inst, flaky, 2, 1, 0.0);
      FAIL("expected a failure");
    } catch (const EstimatorFailure& e) {
      CHECK(e.truth == 3);
      CHECK(e.rep == 0);
    }
  }
}
