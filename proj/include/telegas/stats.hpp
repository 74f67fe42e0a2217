#pragma once

// Empirical distributions, Kolmogorov-Smirnov tests that tolerate atoms and
// fixed-horizon censoring, Monte Carlo confidence intervals and tail-exponent
// fits.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace telegas::stats {

/// Sorted outcomes with parallel censoring flags. A censored value is the
/// horizon at which observation stopped.
struct EmpiricalSample {
  std::vector<double> values;
  std::vector<bool> censored;

  /// Sorts values (carrying their flags). Empty flags mean none censored.
  static EmpiricalSample from(std::vector<double> values,
                              std::vector<bool> censored = {});

  std::size_t n() const { return values.size(); }
  std::size_t uncensored() const;
  double censored_fraction() const;
  /// Smallest censoring horizon, +inf when nothing is censored.
  double censor_horizon() const;
};

/// (# uncensored values <= x) / n. With fixed-horizon censoring this is the
/// unbiased estimate of P(X <= x) for every x below the horizon.
double ecdf(const EmpiricalSample& sample, double x);
/// (# uncensored values < x) / n.
double ecdf_left(const EmpiricalSample& sample, double x);

struct KsReport {
  double statistic = 0.0;
  std::size_t n_effective = 0;
  double level = 0.01;
  double threshold = 0.0;
  bool pass = false;
};

/// Asymptotic Kolmogorov coefficient: 1.358 at 0.05, 1.628 at 0.01.
double ks_coefficient(double level);

using Cdf = std::function<double(double)>;

/// One-sample KS. D is the sup over uncensored sample points x of
/// max(|Fn(x) - F(x)|, |Fn(x-) - F(x-)|), correct when F has atoms.
/// `cdf_left` gives F(x-); pass an empty function for a continuous F.
KsReport ks_one_sample(const EmpiricalSample& sample, const Cdf& cdf,
                       const Cdf& cdf_left, double level);
KsReport ks_one_sample(const EmpiricalSample& sample, const Cdf& cdf,
                       double level);

/// Same statistic with F(x) and F(x-) already evaluated at every sample
/// value (both spans parallel to sample.values).
KsReport ks_one_sample_tabulated(const EmpiricalSample& sample,
                                 std::span<const double> cdf_at,
                                 std::span<const double> cdf_left_at,
                                 double level);

/// Two-sample KS with effective size nm / (n + m); the sup runs over pooled
/// uncensored points below both censoring horizons.
KsReport ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b,
                       double level);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
  double standard_error = 0.0;
  bool degenerate = false;
};

/// mean +- z(level) sd / sqrt(n). Needs n >= 30.
MeanCi mc_mean_ci(std::span<const double> values, double level);
MeanCi mc_mean_ci(const EmpiricalSample& sample, double level);

/// Least-squares slope of log(empirical survival) against log t over the
/// uncensored values above t_min. Needs at least 100 such values.
double tail_slope(const EmpiricalSample& sample, double t_min);

}  // namespace telegas::stats
