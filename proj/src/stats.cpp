#include "telegas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace telegas::stats {

EmpiricalSample EmpiricalSample::from(std::vector<double> values, std::vector<bool> censored) {
  if (censored.empty()) censored.assign(values.size(), false);
  if (censored.size() != values.size())
    throw std::invalid_argument("censoring flags must parallel the values");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return censored[a] < censored[b];
  });
  EmpiricalSample out;
  out.values.reserve(values.size());
  out.censored.reserve(values.size());
  for (std::size_t i : order) {
    if (std::isnan(values[i])) throw std::invalid_argument("sample contains NaN");
    out.values.push_back(values[i]);
    out.censored.push_back(censored[i]);
  }
  return out;
}

std::size_t EmpiricalSample::uncensored() const {
  return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), false));
}

double EmpiricalSample::censored_fraction() const {
  if (values.empty()) return 0.0;
  return 1.0 - static_cast<double>(uncensored()) / static_cast<double>(n());
}

double EmpiricalSample::censor_horizon() const {
  double horizon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n(); ++i)
    if (censored[i]) horizon = std::min(horizon, values[i]);
  return horizon;
}

namespace {

void require_observed(const EmpiricalSample& sample) {
  if (sample.n() == 0 || sample.uncensored() == 0)
    throw std::invalid_argument("sample has no uncensored values");
}

std::size_t count_uncensored(const EmpiricalSample& sample, double x, bool inclusive) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const double value = sample.values[i];
    if (inclusive ? value > x : value >= x) break;
    if (!sample.censored[i]) ++count;
  }
  return count;
}

void require_ks_size(const EmpiricalSample& sample) {
  if (sample.n() < 50)
    throw std::invalid_argument("KS needs n >= 50 (got " + std::to_string(sample.n()) + ")");
  require_observed(sample);
}

KsReport finish(double statistic, std::size_t n_effective, double effective_size, double level) {
  KsReport report;
  report.statistic = statistic;
  report.n_effective = n_effective;
  report.level = level;
  report.threshold = ks_coefficient(level) / std::sqrt(effective_size);
  report.pass = statistic <= report.threshold;
  return report;
}

}  // namespace

double ecdf(const EmpiricalSample& sample, double x) {
  require_observed(sample);
  return static_cast<double>(count_uncensored(sample, x, true)) / static_cast<double>(sample.n());
}

double ecdf_left(const EmpiricalSample& sample, double x) {
  require_observed(sample);
  return static_cast<double>(count_uncensored(sample, x, false)) / static_cast<double>(sample.n());
}

double ks_coefficient(double level) {
  if (level == 0.05) return 1.358;
  if (level == 0.01) return 1.628;
  throw std::invalid_argument("KS level must be 0.05 or 0.01");
}

KsReport ks_one_sample_tabulated(const EmpiricalSample& sample, std::span<const double> cdf_at,
                                 std::span<const double> cdf_left_at, double level) {
  require_ks_size(sample);
  if (cdf_at.size() != sample.n() || cdf_left_at.size() != sample.n())
    throw std::invalid_argument("tabulated cdf must have one value per sample point");
  const double n = static_cast<double>(sample.n());
  double d = 0.0;
  std::size_t below = 0;  // uncensored values strictly below the current group
  std::size_t i = 0;
  while (i < sample.n()) {
    std::size_t j = i;
    std::size_t observed = 0;
    while (j < sample.n() && sample.values[j] == sample.values[i]) {
      if (!sample.censored[j]) ++observed;
      ++j;
    }
    if (observed > 0) {
      const double left = static_cast<double>(below) / n;
      const double right = static_cast<double>(below + observed) / n;
      d = std::max({d, std::abs(right - cdf_at[i]), std::abs(left - cdf_left_at[i])});
    }
    below += observed;
    i = j;
  }
  return finish(d, sample.n(), n, level);
}

KsReport ks_one_sample(const EmpiricalSample& sample, const Cdf& cdf, const Cdf& cdf_left,
                       double level) {
  require_ks_size(sample);
  std::vector<double> at(sample.n());
  std::vector<double> left(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i) {
    at[i] = cdf(sample.values[i]);
    left[i] = cdf_left ? cdf_left(sample.values[i]) : at[i];
  }
  return ks_one_sample_tabulated(sample, at, left, level);
}

KsReport ks_one_sample(const EmpiricalSample& sample, const Cdf& cdf, double level) {
  return ks_one_sample(sample, cdf, Cdf{}, level);
}

KsReport ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b, double level) {
  require_ks_size(a);
  require_ks_size(b);
  const double horizon = std::min(a.censor_horizon(), b.censor_horizon());
  const double na = static_cast<double>(a.n());
  const double nb = static_cast<double>(b.n());
  std::size_t ia = 0;
  std::size_t ib = 0;
  std::size_t ca = 0;
  std::size_t cb = 0;
  double d = 0.0;
  for (;;) {
    const double xa = ia < a.n() ? a.values[ia] : std::numeric_limits<double>::infinity();
    const double xb = ib < b.n() ? b.values[ib] : std::numeric_limits<double>::infinity();
    const double x = std::min(xa, xb);
    if (!(x < horizon) || std::isinf(x)) break;
    while (ia < a.n() && a.values[ia] == x) {
      if (!a.censored[ia]) ++ca;
      ++ia;
    }
    while (ib < b.n() && b.values[ib] == x) {
      if (!b.censored[ib]) ++cb;
      ++ib;
    }
    d = std::max(d, std::abs(static_cast<double>(ca) / na - static_cast<double>(cb) / nb));
  }
  const double effective = na * nb / (na + nb);
  return finish(d, static_cast<std::size_t>(std::llround(effective)), effective, level);
}

MeanCi mc_mean_ci(std::span<const double> values, double level) {
  if (values.size() < 30)
    throw std::invalid_argument("mean CI needs n >= 30 (got " + std::to_string(values.size()) + ")");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  MeanCi ci;
  ci.mean = mean;
  ci.standard_error = std::sqrt(ss / (n - 1.0) / n);
  ci.degenerate = ss == 0.0;
  const boost::math::normal standard;
  ci.half_width = boost::math::quantile(standard, 0.5 + 0.5 * level) * ci.standard_error;
  return ci;
}

MeanCi mc_mean_ci(const EmpiricalSample& sample, double level) {
  return mc_mean_ci(std::span<const double>(sample.values), level);
}

double tail_slope(const EmpiricalSample& sample, double t_min) {
  const double n = static_cast<double>(sample.n());
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    if (sample.censored[i] || !(sample.values[i] > t_min)) continue;
    lx.push_back(std::log(sample.values[i]));
    ly.push_back(std::log((n - static_cast<double>(i)) / n));
  }
  if (lx.size() < 100)
    throw std::invalid_argument("tail fit needs at least 100 uncensored values above t_min (got " +
                                std::to_string(lx.size()) + ")");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("tail fit needs distinct values above t_min");
  return sxy / sxx;
}

}  // namespace telegas::stats
