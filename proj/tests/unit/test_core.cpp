#include <doctest.h>

#include <cmath>
#include <vector>

#include "aggreg/core.hpp"
#include "helpers.hpp"

using namespace aggreg;

TEST_SUITE("core") {
  TEST_CASE("empirical norm examples") {
    CHECK(empirical_norm_sq(std::vector<double>(5, 0.0)) == 0.0);
    CHECK(empirical_norm_sq(std::vector<double>{1, 1, 1, 1}) == 1.0);
    CHECK(empirical_norm_sq(std::vector<double>{3, 4}) == doctest::Approx(12.5).epsilon(1e-15));
    CHECK_THROWS_AS(empirical_norm_sq(std::vector<double>{}), InvalidInput);
  }

  TEST_CASE("empirical inner product is symmetric and matches the norm") {
    const auto a = testutil::random_vector(37, 1);
    const auto b = testutil::random_vector(37, 2);
    CHECK(empirical_inner(a, b) == doctest::Approx(empirical_inner(b, a)).epsilon(1e-15));
    CHECK(empirical_inner(a, a) == doctest::Approx(empirical_norm_sq(a)).epsilon(1e-14));
    CHECK_THROWS_AS(empirical_inner(a, std::vector<double>(36, 0.0)), InvalidInput);
  }

  TEST_CASE("design matrix validation") {
    CHECK_THROWS_AS(DesignMatrix(2, 2, {1, 2, 3}, 5.0), InvalidInput);
    CHECK_THROWS_AS(DesignMatrix(2, 2, {1, 2, 0, 0}, 1.5), InvalidInput);
    CHECK_THROWS_AS(DesignMatrix(2, 2, {1, NAN, 0, 0}, 5.0), InvalidInput);
    CHECK_THROWS_AS(DesignMatrix(2, 1, {1, 1}, 5.0), InvalidInput);
    const DesignMatrix d(2, 2, {1, 2, 3, 4}, 4.0);
    CHECK(d(1, 0) == 2.0);
    CHECK(d(0, 1) == 3.0);
    CHECK(d.column(1)[1] == 4.0);
    CHECK_FALSE(d.bound_inferred());
  }

  TEST_CASE("inferred bound covers the entries and the floor") {
    const auto d = DesignMatrix::with_inferred_bound(2, 2, {0.5, -2.0, 1.0, 0.0});
    CHECK(d.bound_l() == 2.0);
    CHECK(d.bound_inferred());
    CHECK(DesignMatrix::with_inferred_bound(2, 2, {0.0, 0.0, 0.0, 0.0}).bound_l() == 1.0);
    CHECK(DesignMatrix::with_inferred_bound(2, 2, {0.5, -2.0, 1.0, 0.0}, 3.0).bound_l() == 3.0);
  }

  TEST_CASE("targets validation") {
    const DesignMatrix d(2, 2, {1, 1, 0, 1}, 1.0);
    TargetVector ok{{0.5, -1.0}, {0.1, 0.2}};
    CHECK_NOTHROW(ok.validate(d));
    TargetVector too_big{{2.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(too_big.validate(d), InvalidInput);
    TargetVector short_y{{0.0, 0.0}, {0.0}};
    CHECK_THROWS_AS(short_y.validate(d), InvalidInput);
  }

  TEST_CASE("weight vector support and sparsity") {
    const WeightVector w({0.0, 1.5, 0.0, -2.0});
    CHECK(w.sparsity() == 2);
    CHECK(w.support() == std::vector<std::size_t>{1, 3});
    CHECK(WeightVector::zeros(3).sparsity() == 0);
    const auto v = WeightVector::vertex(4, 2);
    CHECK(v[2] == 1.0);
    CHECK(v.support() == std::vector<std::size_t>{2});
  }

  TEST_CASE("combine examples") {
    const auto d = testutil::random_design(3, 2, 11);
    const auto zero = combine(d, WeightVector::zeros(2));
    for (double v : zero) CHECK(v == 0.0);
    const auto e1 = combine(d, WeightVector::vertex(2, 1));
    for (std::size_t i = 0; i < 3; ++i) CHECK(e1[i] == d(i, 1));
    const auto diff = combine(d, std::vector<double>{1.0, -1.0});
    for (std::size_t i = 0; i < 3; ++i) CHECK(diff[i] == doctest::Approx(d(i, 0) - d(i, 1)).epsilon(1e-15));
    CHECK_THROWS_AS(combine(d, std::vector<double>{1.0}), InvalidInput);
  }

  TEST_CASE("rss examples") {
    const auto d = testutil::random_design(20, 3, 12);
    const std::vector<double> lam{0.3, -0.2, 0.7};
    const auto y = combine(d, lam);
    CHECK(rss(d, y, lam) == doctest::Approx(0.0).epsilon(1e-30));
    CHECK(rss(d, y, WeightVector::zeros(3)) == doctest::Approx(empirical_norm_sq(y)).epsilon(1e-14));
  }

  TEST_CASE("gram examples") {
    const auto ortho = testutil::orthonormal_design(64, 6);
    const auto g = gram(ortho);
    for (std::size_t j = 0; j < 6; ++j)
      for (std::size_t k = 0; k < 6; ++k) CHECK(g.at(j, k) == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
    CHECK(g.xi_min == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.xi_max == doctest::Approx(1.0).epsilon(1e-10));

    auto base = testutil::random_design(10, 2, 13);
    std::vector<double> dup(base.values().begin(), base.values().end());
    dup.insert(dup.end(), base.values().begin(), base.values().begin() + 10);
    const auto gd = gram(DesignMatrix(10, 3, dup, 1.0));
    CHECK(std::abs(gd.xi_min) <= gd.tol_eig * gd.xi_max);

    // u = (1, 1), v = (1/2 + a, 1/2 - a) with a^2 = 3/4 give Psi = [[1, 1/2], [1/2, 1]].
    const double a = std::sqrt(0.75);
    const DesignMatrix d2(2, 2, {1.0, 1.0, 0.5 + a, 0.5 - a}, 2.0);
    const auto g2 = gram(d2);
    CHECK(g2.at(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g2.xi_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g2.xi_max == doctest::Approx(1.5).epsilon(1e-12));
  }

  TEST_CASE("gram and cross moments serial and parallel agree bitwise") {
    const auto d = testutil::random_design(257, 19, 14);
    CHECK(gram_matrix(d, Exec::serial) == gram_matrix(d, Exec::parallel));
    const auto y = testutil::random_vector(257, 15);
    const auto c = cross_moments(d, y);
    for (std::size_t j = 0; j < 19; ++j)
      CHECK(c[j] == doctest::Approx(empirical_inner(d.column(j), y)).epsilon(1e-14));
  }
}
