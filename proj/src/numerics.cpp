#include "telegas/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace telegas::numerics {

namespace {

constexpr double kSeriesAsymptoticSwitch = 15.0;

void check_bessel_args(int order, double x) {
  if (order < 0) throw std::domain_error("Bessel order must be >= 0");
  if (!(x >= 0.0)) throw std::domain_error("Bessel argument must be >= 0");
}

// sum_m (x/2)^{2m + order + shift} / (m! (m + order)!), shift in {0, -1}.
double bessel_series(int order, double x, int shift) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= order; ++k) term /= k;
  for (int k = 1; k <= order + shift; ++k) term *= half;
  const double q = half * half;
  double sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= q / (static_cast<double>(m) * (m + order));
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

// e^{-x} I_order(x) sqrt(2 pi x) by the large-argument expansion.
double bessel_asymptotic_bracket(int order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    // Divergent expansion: stop at the smallest term.
    if (next == 0.0 || std::abs(next) >= previous) break;
    previous = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double bessel_i_scaled(int order, double x) {
  check_bessel_args(order, x);
  if (x < kSeriesAsymptoticSwitch) return std::exp(-x) * bessel_series(order, x, 0);
  return bessel_asymptotic_bracket(order, x) / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_i(int order, double x) {
  check_bessel_args(order, x);
  if (x < kSeriesAsymptoticSwitch) return bessel_series(order, x, 0);
  return std::exp(x) * bessel_i_scaled(order, x);
}

double bessel_i_over_x_scaled(int order, double x) {
  check_bessel_args(order, x);
  if (order < 1) throw std::domain_error("I_order(x)/x needs order >= 1");
  if (x < kSeriesAsymptoticSwitch) return 0.5 * std::exp(-x) * bessel_series(order, x, -1);
  return bessel_i_scaled(order, x) / x;
}

double bessel_i_scaled_asymptotic_check(double x) {
  if (!(x > 0.0)) throw std::domain_error("x must be > 0");
  return std::sqrt(2.0 * std::numbers::pi * x) * bessel_i_scaled(1, x);
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double p, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * p / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * p / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * p / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw BudgetExceeded("incomplete beta continued fraction did not converge", h);
}

}  // namespace

double reg_inc_beta(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("reg_inc_beta: p must lie in [0, 1]");
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_inc_beta: a and b must be > 0");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(p) + b * std::log1p(-p);
  const double front = std::exp(log_front);
  if (p < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(p, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - p, b, a) / b;
}

namespace {

constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod15(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod))
    throw std::domain_error("integrand not finite on [" + std::to_string(a) + ", " +
                            std::to_string(b) + "]");
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& options) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0, 1};
    throw std::domain_error("integrate: need a < b");
  }
  if (std::isinf(b)) {
    // t = a + u / (1 - u), dt = du / (1 - u)^2.
    Integrand mapped = [&f, a](double u) {
      const double w = 1.0 - u;
      return f(a + u / w) / (w * w);
    };
    return integrate(mapped, 0.0, 1.0, options);
  }

  std::priority_queue<Panel> panels;
  Panel first = kronrod15(f, a, b);
  std::size_t evaluations = 15;
  double total = first.value;
  double error = first.error;
  panels.push(first);

  auto target = [&] { return std::max(options.abs_tol, options.rel_tol * std::abs(total)); };

  while (error > target()) {
    if (evaluations + 30 > options.max_evaluations) {
      throw BudgetExceeded("quadrature budget of " + std::to_string(options.max_evaluations) +
                               " evaluations exceeded on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "], error estimate " +
                               std::to_string(error),
                           total);
    }
    Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      // Cannot split further at double precision; accept what we have.
      break;
    }
    panels.pop();
    Panel left = kronrod15(f, worst.a, mid);
    Panel right = kronrod15(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum from the panels to shed accumulated cancellation.
  double value = 0.0;
  double err = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  return {value, err, evaluations};
}

QuadratureResult integrate(const Integrand& f, double a, double b, double tol) {
  QuadratureOptions options;
  options.abs_tol = tol;
  return integrate(f, a, b, options);
}

SeriesResult series_sum(const std::function<double(std::size_t)>& term, double tol,
                        std::size_t n_max, std::size_t first,
                        const std::function<double(std::size_t)>& envelope) {
  double sum = 0.0;
  int quiet = 0;
  std::size_t used = 0;
  for (std::size_t n = first; used < n_max; ++n) {
    const double value = term(n);
    sum += value;
    ++used;
    const double size = envelope ? std::abs(envelope(n)) : std::abs(value);
    quiet = (size < tol) ? quiet + 1 : 0;
    if (quiet == 3) return {sum, used};
  }
  throw BudgetExceeded("series did not settle within " + std::to_string(n_max) + " terms", sum);
}

}  // namespace telegas::numerics
