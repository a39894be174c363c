#include <doctest.h>

#include <cmath>
#include <vector>

#include "aggreg/harness.hpp"
#include "helpers.hpp"

using namespace aggreg;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_grid = {64, 128};
  cfg.m_dict = 6;
  cfg.truth.kind = TruthKind::InDictionary;
  cfg.truth.index = 2;
  cfg.reps = 8;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("psi rate examples") {
    CHECK(psi_rate(100, 10, RateKind::MS) == doctest::Approx(0.0230259).epsilon(1e-6));
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{100, 10}, {7, 300}, {1000, 2}})
      CHECK(psi_rate(n, m, RateKind::L) == static_cast<double>(m) / static_cast<double>(n));
    // Boundary M = sqrt n uses the M/n branch.
    CHECK(psi_rate(100, 10, RateKind::C) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(psi_rate(100, 11, RateKind::C) == doctest::Approx(std::sqrt(std::log(1.0 + 1.1) / 100.0)).epsilon(1e-14));
    CHECK(psi_rate(100, 10, RateKind::MS, RateVariant::tilde) == doctest::Approx(std::log(100.0) / 100.0).epsilon(1e-14));
    CHECK(psi_rate(400, 10, RateKind::C, RateVariant::bar) == doctest::Approx(10.0 * std::log(400.0) / 400.0).epsilon(1e-14));
    CHECK(psi_rate(100, 50, RateKind::C, RateVariant::bar) == doctest::Approx(std::sqrt(std::log(50.0) / 100.0)).epsilon(1e-14));
  }

  TEST_CASE("psi rates are positive") {
    for (std::size_t n : {1, 10, 1000})
      for (std::size_t m : {2, 30, 5000})
        for (auto k : {RateKind::MS, RateKind::C, RateKind::L})
          for (auto v : {RateVariant::base, RateVariant::tilde, RateVariant::bar}) CHECK(psi_rate(n, m, k, v) > 0.0);
  }

  TEST_CASE("gen_data examples") {
    auto cfg = small_config();
    cfg.sigma = 0.0;
    const auto a = gen_data(cfg, 64, 0);
    CHECK(a.targets.y_vals == a.targets.f_vals);

    cfg.sigma = 1.0;
    const auto b1 = gen_data(cfg, 64, 5);
    const auto b2 = gen_data(cfg, 64, 5);
    CHECK(b1.targets.y_vals == b2.targets.y_vals);
    CHECK(std::vector<double>(b1.design.values().begin(), b1.design.values().end()) ==
          std::vector<double>(b2.design.values().begin(), b2.design.values().end()));
    CHECK(gen_data(cfg, 64, 6).targets.y_vals != b1.targets.y_vals);

    const auto ortho = testutil::orthonormal_design(256, 8);
    const auto g = gram(ortho);
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(g.at(j, k) - (j == k ? 1.0 : 0.0)) <= 1e-10);
  }

  TEST_CASE("gen_data: every dictionary kind respects its bound") {
    for (auto kind : {DictionaryKind::OrthonormalCosine, DictionaryKind::IndicatorBlocks, DictionaryKind::PointMass,
                      DictionaryKind::RandomBounded}) {
      auto cfg = small_config();
      cfg.dictionary = kind;
      const auto data = gen_data(cfg, 64, 0);
      CHECK(data.design.m() == 6);
      for (double v : data.design.values()) CHECK(std::abs(v) <= data.design.bound_l());
      CHECK_NOTHROW(data.targets.validate(data.design));
    }
  }

  TEST_CASE("gen_data: truth kinds") {
    auto cfg = small_config();
    cfg.sigma = 0.0;
    cfg.truth.kind = TruthKind::ConvexCombo;
    cfg.truth.uniform = true;
    auto d = gen_data(cfg, 64, 0);
    const auto expect = combine(d.design, std::vector<double>(6, 1.0 / 6.0));
    for (std::size_t i = 0; i < 64; ++i) CHECK(d.targets.f_vals[i] == doctest::Approx(expect[i]).epsilon(1e-14));

    cfg.truth.kind = TruthKind::OutsideSpan;
    cfg.truth.amplitude = 0.5;
    cfg.truth.frequency = 3.0;
    d = gen_data(cfg, 64, 0);
    for (std::size_t i = 0; i < 64; ++i)
      CHECK(d.targets.f_vals[i] == doctest::Approx(0.5 * std::sin(2.0 * M_PI * 3.0 * d.x[i])).epsilon(1e-14));
  }

  TEST_CASE("config validation") {
    auto cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.reps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.truth.kind = TruthKind::ConvexCombo;
    cfg.truth.weights = {0.7, 0.7, 0, 0, 0, 0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.truth.weights = {0.5, -0.1, 0, 0, 0, 0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.truth.index = 6;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.dictionary = DictionaryKind::PointMass;
    cfg.design = DesignKind::RandomUniform;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("m_for scales with sqrt n") {
    ExperimentConfig cfg;
    cfg.m_sqrt_multiple = 4;
    CHECK(cfg.m_for(100) == 40);
    CHECK(cfg.m_for(101) == 44);
    cfg.m_sqrt_multiple = 0;
    CHECK(cfg.m_for(101) == cfg.m_dict);
  }

  TEST_CASE("run_experiment: in-dictionary truth") {
    const auto res = run_experiment(small_config());
    REQUIRE(res.records.size() == 16);
    CHECK_FALSE(res.partial);
    for (const auto& r : res.records) {
      CHECK(r.oracle_risks[0] <= 1e-28);
      CHECK(r.excess_ms == doctest::Approx(r.risk).epsilon(1e-12));
      // Nesting: MS >= C - tol >= L - tol.
      CHECK(r.oracle_risks[0] >= r.oracle_risks[1] - 1e-9);
      CHECK(r.oracle_risks[1] >= r.oracle_risks[2] - 1e-8);
      CHECK(r.excess_l >= -1e-10);
    }
    REQUIRE(res.summary.size() == 6);
    CHECK(res.summary[0].kind == RateKind::MS);
    CHECK(res.summary[0].reps_ok == 8);
  }

  TEST_CASE("run_experiment: linear-combo truth inside the span") {
    auto cfg = small_config();
    cfg.truth.kind = TruthKind::LinearCombo;
    cfg.truth.weights = {0.5, -0.3, 0.2, 0.0, 0.1, -0.4};
    const auto res = run_experiment(cfg);
    for (const auto& r : res.records) CHECK(r.oracle_risks[2] <= 1e-10);
  }

  TEST_CASE("run_experiment: serial and parallel are bit-identical") {
    for (auto design : {DesignKind::FixedGrid, DesignKind::RandomUniform}) {
      auto cfg = small_config();
      cfg.design = design;
      cfg.holdout_size = 2000;
      cfg.penalty = PenaltySpec::soft(1.0);
      const auto a = run_experiment(cfg, Exec::serial);
      const auto b = run_experiment(cfg, Exec::parallel);
      REQUIRE(a.records.size() == b.records.size());
      for (std::size_t k = 0; k < a.records.size(); ++k) {
        CHECK(a.records[k].risk == b.records[k].risk);
        CHECK(a.records[k].oracle_risks == b.records[k].oracle_risks);
      }
      for (std::size_t k = 0; k < a.summary.size(); ++k) CHECK(a.summary[k].mean_excess == b.summary[k].mean_excess);
      CHECK(a.variant == (design == DesignKind::RandomUniform ? RateVariant::tilde : RateVariant::bar));
    }
  }

  TEST_CASE("rate slope examples") {
    std::vector<RatePoint> p;
    for (double n : {100.0, 200.0, 400.0, 800.0}) p.push_back({n, 3.0 / n, 0.01 / n});
    const auto s = rate_slope(p);
    CHECK(std::abs(s.slope + 1.0) <= 1e-12);
    CHECK(s.halfwidth > 0.0);
    for (auto& q : p) q.mean = 3.0 / std::sqrt(q.n);
    CHECK(rate_slope(p).slope == doctest::Approx(-0.5).epsilon(1e-12));
    p[1].mean = -1.0;
    const auto ex = rate_slope(p);
    CHECK(ex.excluded == std::vector<std::size_t>{1});
    CHECK(ex.slope == doctest::Approx(-0.5).epsilon(1e-12));
    p[2].mean = 0.0;
    CHECK_THROWS_AS(rate_slope(p), InvalidInput);
  }

  TEST_CASE("event A examples") {
    CHECK(event_a_bound(100, 10) == doctest::Approx(1.859e-4).epsilon(1e-3));
    CHECK(event_a_bound(100, 10) ==
          doctest::Approx(1.0 / (1000.0 * std::sqrt(M_PI * (2.0 * std::log(10.0) + std::log(100.0))))).epsilon(1e-12));
    EventAConfig cfg;
    cfg.reps = 2000;
    cfg.sigma = 0.0;
    CHECK(event_a_diagnostic(cfg).failures == 0);
    cfg.sigma = 1.0;
    cfg.multiplier = 0.5;
    const auto lo = event_a_diagnostic(cfg);
    cfg.multiplier = 1.0;
    const auto hi = event_a_diagnostic(cfg);
    CHECK(lo.failures > 0);
    CHECK(hi.failures < lo.failures);
    CHECK(event_a_diagnostic(cfg, Exec::serial).failures == hi.failures);
  }
}
