#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "oracles.hpp"
#include "telegas/numerics.hpp"

using namespace telegas::numerics;

TEST_CASE("Bessel I matches the long-double series") {
  for (int order : {0, 1, 2}) {
    for (double x : {0.0, 1e-8, 0.1, 0.5, 1.0, 2.5, 7.0, 14.9, 15.0, 15.1, 20.0, 28.0}) {
      const double expected = static_cast<double>(oracle::bessel_i_series(order, x));
      CAPTURE(order);
      CAPTURE(x);
      CHECK(bessel_i(order, x) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("Bessel I at reference points") {
  CHECK(bessel_i(0, 0.0) == 1.0);
  CHECK(bessel_i(1, 0.0) == 0.0);
  CHECK(bessel_i(0, 1.0) == doctest::Approx(1.2660658777520082).epsilon(1e-15));
  CHECK(bessel_i(1, 1.0) == doctest::Approx(0.5651591039924851).epsilon(1e-15));
}

TEST_CASE("scaled Bessel values agree with Boost at large argument") {
  for (int order : {0, 1, 2}) {
    for (double x : {30.0, 100.0, 700.0}) {
      const double expected = boost::math::cyl_bessel_i(order, x) * std::exp(-x);
      CHECK(bessel_i_scaled(order, x) == doctest::Approx(expected).epsilon(1e-13));
    }
    for (double x : {1e3, 1e5, 1e8}) {
      // Leading terms of the large-argument expansion.
      const double mu = 4.0 * order * order;
      const double y = 8.0 * x;
      const double expected = (1.0 - (mu - 1.0) / y + (mu - 1.0) * (mu - 9.0) / (2.0 * y * y) -
                               (mu - 1.0) * (mu - 9.0) * (mu - 25.0) / (6.0 * y * y * y)) /
                              std::sqrt(2.0 * std::numbers::pi * x);
      CHECK(bessel_i_scaled(order, x) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("I(x)/x scaled has the right limit at 0") {
  CHECK(bessel_i_over_x_scaled(1, 0.0) == 0.5);
  CHECK(bessel_i_over_x_scaled(2, 0.0) == 0.0);
  for (double x : {1e-6, 0.3, 3.0, 40.0}) {
    CHECK(bessel_i_over_x_scaled(1, x) ==
          doctest::Approx(bessel_i_scaled(1, x) / x).epsilon(1e-13));
    CHECK(bessel_i_over_x_scaled(2, x) ==
          doctest::Approx(bessel_i_scaled(2, x) / x).epsilon(1e-13));
  }
  CHECK_THROWS_AS(bessel_i_over_x_scaled(0, 1.0), std::domain_error);
}

TEST_CASE("asymptotic check tends to one") {
  CHECK(bessel_i_scaled_asymptotic_check(1e4) == doctest::Approx(1.0 - 3.0 / 8e4).epsilon(1e-9));
  CHECK(std::abs(bessel_i_scaled_asymptotic_check(1e8) - 1.0) < 1e-8);
  CHECK_THROWS_AS(bessel_i_scaled_asymptotic_check(0.0), std::domain_error);
}

TEST_CASE("Bessel arguments are validated") {
  CHECK_THROWS_AS(bessel_i(0, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i(-1, 1.0), std::domain_error);
}

TEST_CASE("regularized incomplete beta against the binomial tail") {
  for (int a = 1; a <= 6; ++a)
    for (int b = 1; b <= 6; ++b)
      for (double p : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double expected = static_cast<double>(oracle::inc_beta_binomial(p, a, b));
        CHECK(reg_inc_beta(p, a, b) == doctest::Approx(expected).epsilon(1e-13));
      }
  CHECK(reg_inc_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(reg_inc_beta(1.0, 2.0, 3.0) == 1.0);
  CHECK(reg_inc_beta(0.3, 1.0, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(reg_inc_beta(0.25, 0.5, 0.5) ==
        doctest::Approx(2.0 / std::numbers::pi * std::asin(0.5)).epsilon(1e-13));
  CHECK_THROWS_AS(reg_inc_beta(1.5, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(reg_inc_beta(0.5, 0.0, 1.0), std::domain_error);
}

TEST_CASE("adaptive quadrature on smooth, singular and infinite ranges") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13).value ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12).value ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-9).value ==
        doctest::Approx(2.0).epsilon(1e-8));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY, 1e-12).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, INFINITY, 1e-12).value ==
        doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-11));
  const auto step = integrate([](double x) { return x < 0.3 ? 1.0 : 0.0; }, 0.0, 1.0, 1e-10);
  CHECK(step.value == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-10).value == 0.0);
}

TEST_CASE("quadrature reports a blown budget with its partial value") {
  QuadratureOptions tight;
  tight.abs_tol = 1e-15;
  tight.max_evaluations = 200;
  try {
    integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, tight);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::isfinite(e.partial()));
  }
  CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0.0, 1.0, 1e-8), std::domain_error);
}

TEST_CASE("series_sum settles on convergent series and throws on slow ones") {
  const auto basel = series_sum([](std::size_t n) { return 1.0 / double(n * n); }, 1e-14, 100000000, 1);
  CHECK(basel.value == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-6));
  const auto geometric = series_sum([](std::size_t n) { return std::ldexp(1.0, -int(n)); }, 1e-16, 1000);
  CHECK(geometric.value == doctest::Approx(2.0).epsilon(1e-15));
  try {
    series_sum([](std::size_t n) { return n % 2 ? -1.0 : 1.0; }, 1e-6, 1000);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::abs(e.partial()) <= 1.0);
  }
}
