#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "telegas/replicate.hpp"
#include "telegas/sim.hpp"
#include "telegas/stats.hpp"

using namespace telegas;
using namespace telegas::stats;

namespace {

std::vector<double> uniforms(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  sim::RngStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& x : out) x = rng.uniform() + shift;
  return out;
}

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

std::vector<double> pareto(std::size_t n, double beta, std::uint64_t seed) {
  sim::RngStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& x : out) x = std::pow(rng.uniform(), -1.0 / beta);
  return out;
}

}  // namespace

TEST_CASE("empirical sample ordering and censoring") {
  const auto s = EmpiricalSample::from({3.0, 1.0, 2.0, 2.0}, {false, false, true, false});
  CHECK(s.values == std::vector<double>{1.0, 2.0, 2.0, 3.0});
  CHECK(s.censored == std::vector<bool>{false, false, true, false});
  CHECK(s.uncensored() == 3);
  CHECK(s.censored_fraction() == doctest::Approx(0.25));
  CHECK(s.censor_horizon() == 2.0);
  CHECK_THROWS_AS(EmpiricalSample::from({1.0}, {true, false}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalSample::from({NAN}), std::invalid_argument);
}

TEST_CASE("ecdf") {
  const auto s = EmpiricalSample::from({1.0, 2.0, 2.0, 4.0});
  CHECK(ecdf(s, 0.5) == 0.0);
  CHECK(ecdf(s, 2.0) == 0.75);
  CHECK(ecdf_left(s, 2.0) == 0.25);
  CHECK(ecdf(s, 4.0) == 1.0);
  const auto c = EmpiricalSample::from({1.0, 5.0}, {false, true});
  CHECK(ecdf(c, 10.0) == 0.5);
  CHECK_THROWS_AS(ecdf(EmpiricalSample::from({1.0}, {true}), 2.0), std::invalid_argument);
}

TEST_CASE("KS coefficients") {
  CHECK(ks_coefficient(0.05) == 1.358);
  CHECK(ks_coefficient(0.01) == 1.628);
  CHECK_THROWS_AS(ks_coefficient(0.1), std::invalid_argument);
}

TEST_CASE("one-sample KS") {
  const auto good = EmpiricalSample::from(uniforms(10000, 1));
  const auto r = ks_one_sample(good, uniform_cdf, 0.01);
  CHECK(r.pass);
  CHECK(r.threshold == doctest::Approx(0.01628));
  CHECK(r.n_effective == 10000);
  const auto shifted = EmpiricalSample::from(uniforms(10000, 2, 0.05));
  CHECK_FALSE(ks_one_sample(shifted, uniform_cdf, 0.01).pass);
  CHECK_THROWS_AS(ks_one_sample(EmpiricalSample::from(uniforms(49, 3)), uniform_cdf, 0.01),
                  std::invalid_argument);

  // A statistic computed on a monotone transform of the data is unchanged.
  auto raw = uniforms(500, 4);
  std::vector<double> cubed(raw);
  for (auto& x : cubed) x = x * x * x;
  const double d1 = ks_one_sample(EmpiricalSample::from(raw), uniform_cdf, 0.05).statistic;
  const double d2 = ks_one_sample(EmpiricalSample::from(cubed),
                                  [](double y) { return std::cbrt(std::clamp(y, 0.0, 1.0)); }, 0.05)
                        .statistic;
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
}

TEST_CASE("one-sample KS with an atom") {
  // Half the mass at 0, the rest uniform on (0, 1].
  sim::RngStream rng(5, 0);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rng.coin() ? 0.0 : rng.uniform();
  const auto sample = EmpiricalSample::from(xs);
  const Cdf cdf = [](double x) { return x < 0.0 ? 0.0 : 0.5 + 0.5 * std::min(x, 1.0); };
  const Cdf left = [](double x) { return x <= 0.0 ? 0.0 : 0.5 + 0.5 * std::min(x, 1.0); };
  CHECK(ks_one_sample(sample, cdf, left, 0.01).pass);
  // Ignoring the atom's left limit shows up as a jump-sized discrepancy.
  CHECK(ks_one_sample(sample, cdf, 0.01).statistic >= 0.45);
}

TEST_CASE("one-sample KS with censoring") {
  auto xs = uniforms(10000, 6);
  std::vector<bool> censored(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > 0.8) {
      xs[i] = 0.8;
      censored[i] = true;
    }
  CHECK(ks_one_sample(EmpiricalSample::from(xs, censored), uniform_cdf, 0.01).pass);
}

TEST_CASE("two-sample KS") {
  const auto a = EmpiricalSample::from(uniforms(1000, 7));
  const auto same = ks_two_sample(a, a, 0.01);
  CHECK(same.statistic == 0.0);
  CHECK(same.n_effective == 500);
  CHECK(ks_two_sample(a, EmpiricalSample::from(uniforms(2000, 8)), 0.01).pass);
  CHECK_FALSE(ks_two_sample(a, EmpiricalSample::from(uniforms(2000, 9, 0.2)), 0.01).pass);
}

TEST_CASE("two-sample KS on first meeting times") {
  const Params unit{1.0, 1.0};
  auto draw = [&](PatternPair pattern, std::uint64_t seed) {
    const auto t = run_replicas(5000, 1, seed, 0, [&](sim::RngStream& rng, std::size_t) {
      return sim::simulate_first_meeting(pattern, 1.0, unit, 1000.0, rng);
    });
    std::vector<double> values;
    std::vector<bool> censored;
    for (const auto& o : t) {
      values.push_back(o.time);
      censored.push_back(o.censored);
    }
    return EmpiricalSample::from(values, censored);
  };
  CHECK(ks_two_sample(draw(PatternPair{0, 0}, 1), draw(PatternPair{1, 1}, 2), 0.01).pass);
  CHECK_FALSE(ks_two_sample(draw(PatternPair{0, 1}, 3), draw(PatternPair{1, 0}, 4), 0.01).pass);
}

TEST_CASE("mean confidence interval") {
  const std::vector<double> flat(40, 2.5);
  const auto d = mc_mean_ci(flat, 0.95);
  CHECK(d.degenerate);
  CHECK(d.mean == 2.5);
  CHECK(d.half_width == 0.0);
  CHECK_THROWS_AS(mc_mean_ci(std::vector<double>(29, 1.0), 0.95), std::invalid_argument);
  CHECK_THROWS_AS(mc_mean_ci(flat, 1.0), std::invalid_argument);

  const auto ci = mc_mean_ci(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 1, 2, 3, 4, 5,
                                                 6, 7, 8, 9, 10, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                             0.95);
  CHECK(ci.mean == doctest::Approx(5.5));
  CHECK(ci.standard_error == doctest::Approx(std::sqrt(8.5344827586206895 / 30.0)));
  CHECK(ci.half_width == doctest::Approx(1.959963984540054 * ci.standard_error));
}

TEST_CASE("interval coverage over repeated experiments") {
  int covered = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    const auto xs = uniforms(200, 1000 + r);
    const auto ci = mc_mean_ci(xs, 0.99);
    covered += std::abs(ci.mean - 0.5) <= ci.half_width;
  }
  CHECK(covered >= 980);
}

TEST_CASE("tail slope") {
  const auto half = EmpiricalSample::from(pareto(100000, 0.5, 1));
  CHECK(tail_slope(half, 10.0) == doctest::Approx(-0.5).epsilon(0.05));
  const auto one = EmpiricalSample::from(pareto(100000, 1.0, 2));
  CHECK(tail_slope(one, 10.0) == doctest::Approx(-1.0).epsilon(0.05));
  sim::RngStream rng(3, 0);
  std::vector<double> expo(100000);
  for (auto& x : expo) x = 10.0 * rng.exponential(1.0);
  CHECK(tail_slope(EmpiricalSample::from(expo), 10.0) < -1.5);
  CHECK_THROWS_AS(tail_slope(EmpiricalSample::from(pareto(100, 0.5, 4)), 1e6), std::invalid_argument);
}
