#include "telegas/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "telegas/numerics.hpp"

namespace telegas::analytic {

using numerics::bessel_i_over_x_scaled;
using numerics::bessel_i_scaled;
using numerics::integrate;
using numerics::QuadratureOptions;

namespace {

// Tolerances for densities that are themselves integrals, and for the outer
// integrals built on them.
constexpr QuadratureOptions kInner{1e-14, 1e-11, 2'000'000};
constexpr QuadratureOptions kOuter{1e-12, 1e-10, 4'000'000};

void check_params(const Params& params) { make_params(params.v, params.lambda); }

bool is_approach(PatternPair p) { return p == PatternPair::approach(); }
bool is_separate(PatternPair p) { return p == PatternPair::separate(); }

// Integral of f over [from, inf) for integrands with at most a t^{-3/2}
// tail: a regular panel up to `split`, then t = split / w^2 on w in (0, 1].
double integrate_heavy_tail(const numerics::Integrand& f, double from, double split,
                            const QuadratureOptions& options) {
  double head = 0.0;
  if (split > from) head = integrate(f, from, split, options).value;
  const numerics::Integrand mapped = [&f, split](double w) {
    return f(split / (w * w)) * 2.0 * split / (w * w * w);
  };
  return head + integrate(mapped, 0.0, 1.0, options).value;
}

// A split point past the bulk of a first-meeting law started at t0.
double bulk_end(double t0, const Params& params) { return 2.0 * t0 + 8.0 / params.lambda; }

}  // namespace

double phi(PatternPair pattern, double s, double z, const Params& params) {
  check_params(params);
  if (!(s >= 0.0)) throw std::domain_error("phi: s must be >= 0");
  if (!(z >= 0.0)) throw std::domain_error("phi: z must be >= 0");
  const double lambda = params.lambda;
  const double root = std::sqrt(s * s + 4.0 * lambda * s);
  const double base = std::exp(-z / (2.0 * params.v) * root);
  // (s + 2l - root) / (2l) rewritten without cancellation.
  const double parallel = 2.0 * lambda / (s + 2.0 * lambda + root);
  if (is_approach(pattern)) return base;
  if (is_separate(pattern)) return parallel * parallel * base;
  return parallel * base;
}

double g_density(double t, const Params& params) {
  if (!(t >= 0.0)) return 0.0;
  const double x = 2.0 * params.lambda * t;
  return 2.0 * params.lambda * bessel_i_over_x_scaled(1, x);
}

double g2_density(double t, const Params& params) {
  if (!(t >= 0.0)) return 0.0;
  const double x = 2.0 * params.lambda * t;
  return 4.0 * params.lambda * bessel_i_over_x_scaled(2, x);
}

double approach_density_at_front(double z, const Params& params) {
  return params.lambda * params.lambda * z / params.v * std::exp(-params.lambda * z / params.v);
}

MixedDistribution::MixedDistribution(PatternPair pattern, double z, const Params& params,
                                     Constants constants)
    : pattern_(pattern), z_(z), params_(params), constants_(constants) {
  check_params(params);
  if (!(z > 0.0)) throw std::domain_error("first meeting law needs z > 0");
  atom_time_ = z / (2.0 * params.v);
  const double approach_atom = std::exp(-params.lambda * z / params.v);
  atom_mass_ = is_approach(pattern) ? approach_atom : 0.0;
}

double MixedDistribution::approach_density(double t) const {
  if (!(t > atom_time_)) return 0.0;
  const double v = params_.v;
  const double lambda = params_.lambda;
  const double two_vt = 2.0 * v * t;
  const double root = std::sqrt((two_vt - z_) * (two_vt + z_));
  const double w = lambda / v * root;
  // w - 2 lambda t, without cancellation at large t.
  const double exponent = -lambda / v * z_ * z_ / (root + two_vt);
  const double coefficient =
      constants_ == Constants::corrected ? 2.0 * z_ * lambda : z_ * lambda / (2.0 * v * v);
  return coefficient * (lambda / v) * std::exp(exponent) * bessel_i_over_x_scaled(1, w);
}

double MixedDistribution::kernel(double t) const {
  return is_separate(pattern_) ? g2_density(t, params_) : g_density(t, params_);
}

double MixedDistribution::convolved_density(double t) const {
  if (!(t > atom_time_)) return 0.0;
  const double approach_atom = std::exp(-params_.lambda * z_ / params_.v);
  const numerics::Integrand integrand = [this, t](double u) {
    return approach_density(u) * kernel(t - u);
  };
  const double continuous = integrate(integrand, atom_time_, t, kInner).value;
  return approach_atom * kernel(t - atom_time_) + continuous;
}

double MixedDistribution::density(double t) const {
  return is_approach(pattern_) ? approach_density(t) : convolved_density(t);
}

double MixedDistribution::integrate_density(double a, double b) const {
  a = std::max(a, atom_time_);
  if (!(b > a)) return 0.0;
  return integrate([this](double t) { return density(t); }, a, b, kOuter).value;
}

double MixedDistribution::cdf(double t) const {
  if (t < atom_time_) return 0.0;
  return atom_mass_ + integrate_density(atom_time_, t);
}

double MixedDistribution::cdf_left(double t) const {
  if (t <= atom_time_) return 0.0;
  return atom_mass_ + integrate_density(atom_time_, t);
}

double MixedDistribution::survival(double t) const {
  const double from = std::max(t, atom_time_);
  const double atom = (t < atom_time_) ? atom_mass_ : 0.0;
  const numerics::Integrand f = [this](double u) { return density(u); };
  return atom + integrate_heavy_tail(f, from, std::max(from, bulk_end(atom_time_, params_)),
                                     kOuter);
}

std::vector<double> MixedDistribution::cdf_sorted(std::span<const double> ts) const {
  std::vector<double> out;
  out.reserve(ts.size());
  double accumulated = 0.0;
  double previous = atom_time_;
  for (double t : ts) {
    if (t < atom_time_) {
      out.push_back(0.0);
      continue;
    }
    if (t < previous) throw std::invalid_argument("cdf_sorted: points must be nondecreasing");
    accumulated += integrate_density(previous, t);
    previous = t;
    out.push_back(atom_mass_ + accumulated);
  }
  return out;
}

double MixedDistribution::continuous_mass() const {
  const numerics::Integrand f = [this](double u) { return density(u); };
  return integrate_heavy_tail(f, atom_time_, bulk_end(atom_time_, params_), kOuter);
}

double MixedDistribution::laplace(double s) const {
  if (!(s >= 0.0)) throw std::domain_error("laplace: s must be >= 0");
  const numerics::Integrand f = [this, s](double u) { return std::exp(-s * u) * density(u); };
  return atom_mass_ * std::exp(-s * atom_time_) +
         integrate_heavy_tail(f, atom_time_, bulk_end(atom_time_, params_), kOuter);
}

double MixedDistribution::tail_constant() const {
  const double v = params_.v;
  const double lambda = params_.lambda;
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  double approach = z_ * std::sqrt(lambda) / (2.0 * v * sqrt_pi);
  double approach_mass = 1.0;
  if (constants_ == Constants::paper_literal) {
    const double ratio = 1.0 / (4.0 * v * v);
    approach *= ratio;
    const double atom = std::exp(-lambda * z_ / v);
    approach_mass = atom + ratio * (1.0 - atom);
  }
  if (is_approach(pattern_)) return approach;
  // Tails of a convolution of two t^{-3/2} laws add, weighted by the other
  // factor's mass (the kernels g and g*g have mass one).
  const double kernel_constant = is_separate(pattern_) ? 1.0 / (sqrt_pi * std::sqrt(lambda))
                                                       : 1.0 / (2.0 * sqrt_pi * std::sqrt(lambda));
  return approach + kernel_constant * approach_mass;
}

MixedDistribution first_meeting_distribution(PatternPair pattern, double z, const Params& params,
                                             Constants constants) {
  return MixedDistribution(pattern, z, params, constants);
}

namespace {

double wiener_scale(double z, double c, Constants constants) {
  if (!(c > 0.0)) throw std::domain_error("c must be > 0");
  if (!(z > 0.0)) throw std::domain_error("z must be > 0");
  return constants == Constants::corrected ? z / c : z * c;
}

}  // namespace

double wiener_meeting_pdf(double t, double z, double c, Constants constants) {
  const double a = wiener_scale(z, c, constants);
  if (!(t > 0.0)) return 0.0;
  return a * std::exp(-a * a / (4.0 * t)) / (2.0 * std::sqrt(std::numbers::pi) * t * std::sqrt(t));
}

double wiener_meeting_cdf(double t, double z, double c, Constants constants) {
  const double a = wiener_scale(z, c, constants);
  if (!(t > 0.0)) return 0.0;
  return std::erfc(a / (2.0 * std::sqrt(t)));
}

double wiener_meeting_laplace(double s, double z, double c, Constants constants) {
  const double a = wiener_scale(z, c, constants);
  if (!(s >= 0.0)) throw std::domain_error("s must be >= 0");
  return std::exp(-a * std::sqrt(s));
}

double levy_identity_residual(double s, double z, const Params& params, Constants constants) {
  check_params(params);
  if (!(s > 0.0)) throw std::domain_error("levy_identity_residual: s must be > 0");
  if (z == 0.0) return 0.0;
  const double v = params.v;
  const double lambda = params.lambda;
  const double lhs = -z / (2.0 * v) * std::sqrt(s * s + 4.0 * lambda * s);
  const numerics::Integrand levy = [s, &params](double y) {
    return -std::expm1(-s * y) * g_density(y, params);
  };
  const double jump_part =
      integrate_heavy_tail(levy, 0.0, 8.0 / lambda, QuadratureOptions{1e-14, 1e-13, 4'000'000});
  const double rhs = constants == Constants::corrected
                         ? -z / (2.0 * v) * s - z * lambda / v * jump_part
                         : -z / (2.0 * v) * s + lambda / v * jump_part;
  return lhs - rhs;
}

double renewal_kernel(double u, const Params& params) {
  if (u < 0.0) return 0.0;
  const double lu = params.lambda * u;
  const double x = 2.0 * lu;
  return 0.5 + (0.5 + lu) * bessel_i_scaled(0, x) + lu * bessel_i_scaled(1, x);
}

double renewal_kernel_parallel(double u, const Params& params) {
  if (u < 0.0) return 0.0;
  const double lu = params.lambda * u;
  const double x = 2.0 * lu;
  return lu * (bessel_i_scaled(0, x) + bessel_i_scaled(1, x));
}

double renewal_H(PatternPair pattern, double t, double z, const Params& params) {
  check_params(params);
  if (!(z > 0.0)) throw std::domain_error("renewal_H: z must be > 0");
  const MixedDistribution approach(PatternPair::approach(), z, params);
  const double t0 = approach.atom_time();
  if (t < t0) return 0.0;

  // After the first meeting the pair restarts from a separating state, so
  // every pattern reduces to law(0,1) convolved with a pattern kernel:
  //   (0,1): K,  (0,0)/(1,1): g * K,  (1,0): g * g * K = K - 1.
  std::function<double(double)> kernel;
  if (is_approach(pattern)) {
    kernel = [&params](double u) { return renewal_kernel(u, params); };
  } else if (is_separate(pattern)) {
    kernel = [&params](double u) { return renewal_kernel(u, params) - 1.0; };
  } else {
    kernel = [&params](double u) { return renewal_kernel_parallel(u, params); };
  }
  double value = approach.atom_mass() * kernel(t - t0);
  if (t > t0) {
    const numerics::Integrand integrand = [&](double u) {
      return MixedDistribution(PatternPair::approach(), z, params).density(u) * kernel(t - u);
    };
    value += integrate(integrand, t0, t, kOuter).value;
  }
  return value;
}

namespace {

void check_gas_inputs(std::span<const double> positions, std::span<const int> regimes) {
  if (positions.size() != regimes.size())
    throw ValidationError("positions and regimes must have the same length");
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (!(positions[i - 1] < positions[i]))
      throw ValidationError("positions must be strictly increasing");
  for (int k : regimes)
    if (k != 0 && k != 1) throw ValidationError("regime labels must be 0 or 1");
}

}  // namespace

double multi_renewal(double t, std::span<const double> positions, std::span<const int> regimes,
                     const Params& params) {
  check_gas_inputs(positions, regimes);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < positions.size(); ++i)
    total += renewal_H(PatternPair{regimes[i], regimes[i + 1]}, t,
                       positions[i + 1] - positions[i], params);
  return total;
}

double multi_renewal_all_pairs(double t, std::span<const double> positions,
                               std::span<const int> regimes, const Params& params) {
  check_gas_inputs(positions, regimes);
  double total = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      total += renewal_H(PatternPair{regimes[i], regimes[j]}, t, positions[j] - positions[i],
                         params);
  return total;
}

double order_stat_cdf(int rank, std::span<const double> p) {
  const int n = static_cast<int>(p.size());
  if (rank < 1 || rank > n)
    throw ValidationError("rank must lie in [1, " + std::to_string(n) + "]");
  for (double q : p)
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
  // counts[c] = P(exactly c of the first i events).
  std::vector<double> counts(static_cast<std::size_t>(n) + 1, 0.0);
  counts[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int c = i + 1; c >= 1; --c) counts[c] = counts[c] * (1.0 - p[i]) + counts[c - 1] * p[i];
    counts[0] *= 1.0 - p[i];
  }
  double tail = 0.0;
  for (int c = n; c >= rank; --c) tail += counts[c];
  return tail;
}

double uniform_order_stat_cdf(int k, int n, double x, double b) {
  if (n < 1 || k < 1 || k > n) throw ValidationError("need 1 <= k <= n");
  if (!(b > 0.0)) throw ValidationError("b must be > 0");
  const double p = std::clamp(x / b, 0.0, 1.0);
  return numerics::reg_inc_beta(p, k, n - k + 1);
}

double ReflectingDensityParams::effective_t_min() const {
  return t_min >= 0.0 ? t_min : b / (10.0 * params.v);
}

double free_telegraph_density(double t, double u, const Params& params) {
  const double v = params.v;
  const double lambda = params.lambda;
  const double vt = v * t;
  if (!(t > 0.0) || !(std::abs(u) < vt)) return 0.0;
  const double root = std::sqrt((vt - u) * (vt + u));
  const double w = lambda / v * root;
  const double exponent = -lambda / v * u * u / (root + vt);
  return lambda / (2.0 * v) * std::exp(exponent) *
         (bessel_i_scaled(0, w) + lambda * t * bessel_i_over_x_scaled(1, w));
}

namespace {

void check_reflecting(double t, const ReflectingDensityParams& rp) {
  check_params(rp.params);
  if (!(rp.b > 0.0)) throw std::domain_error("reflecting density needs b > 0");
  if (!(t >= rp.effective_t_min()))
    throw std::domain_error("reflecting density: t = " + std::to_string(t) +
                            " is below t_min = " + std::to_string(rp.effective_t_min()));
}

double fold(double x, double b) {
  double r = std::fmod(x, 2.0 * b);
  if (r < 0.0) r += 2.0 * b;
  return r <= b ? r : 2.0 * b - r;
}

}  // namespace

double reflecting_density(double t, double x, double y, const ReflectingDensityParams& rp) {
  check_reflecting(t, rp);
  const double b = rp.b;
  if (x < 0.0 || x > b || y < 0.0 || y > b)
    throw std::domain_error("reflecting density: x and y must lie in [0, b]");
  const double reach = rp.params.v * t;
  const auto k_low = static_cast<long>(std::floor((y - reach - b) / (2.0 * b))) - 1;
  const auto k_high = static_cast<long>(std::ceil((y + reach + b) / (2.0 * b))) + 1;
  double total = 0.0;
  for (long k = k_low; k <= k_high; ++k) {
    const double shift = 2.0 * b * static_cast<double>(k);
    total += free_telegraph_density(t, shift + x - y, rp.params);
    total += free_telegraph_density(t, shift - x - y, rp.params);
  }
  return total;
}

std::array<ReflectingAtom, 2> reflecting_atoms(double t, double y,
                                               const ReflectingDensityParams& rp) {
  check_reflecting(t, rp);
  const double mass = 0.5 * std::exp(-rp.params.lambda * t);
  const double reach = rp.params.v * t;
  return {ReflectingAtom{fold(y + reach, rp.b), mass}, ReflectingAtom{fold(y - reach, rp.b), mass}};
}

double reflecting_mode_amplitude(std::size_t n, double t, const ReflectingDensityParams& rp) {
  const double lambda = rp.params.lambda;
  const double kappa = std::numbers::pi * rp.params.v * static_cast<double>(n) / rp.b;
  const double d = lambda * lambda - kappa * kappa;
  if (d > 0.0) {
    const double theta = std::sqrt(d);
    if (theta * t < 1e-6) {
      // cosh ~ 1, sinh(theta t) / theta ~ t.
      return std::exp(-lambda * t) * (1.0 + lambda * t);
    }
    const double ratio = lambda / theta;
    return 0.5 * ((1.0 + ratio) * std::exp((theta - lambda) * t) +
                  (1.0 - ratio) * std::exp(-(theta + lambda) * t));
  }
  const double omega = std::sqrt(-d);
  if (omega * t < 1e-6) return std::exp(-lambda * t) * (1.0 + lambda * t);
  return std::exp(-lambda * t) * (std::cos(omega * t) + lambda / omega * std::sin(omega * t));
}

double reflecting_series(double t, double x, double y, const ReflectingDensityParams& rp) {
  check_reflecting(t, rp);
  const double b = rp.b;
  const double lambda = rp.params.lambda;
  const auto term = [&](std::size_t n) {
    const double k = std::numbers::pi * static_cast<double>(n) / b;
    return 2.0 / b * reflecting_mode_amplitude(n, t, rp) * std::cos(k * y) * std::cos(k * x);
  };
  const auto envelope = [&](std::size_t n) {
    const double kappa = std::numbers::pi * rp.params.v * static_cast<double>(n) / b;
    const double d = lambda * lambda - kappa * kappa;
    if (d >= 0.0) return 2.0 / b * std::abs(reflecting_mode_amplitude(n, t, rp));
    const double omega = std::sqrt(-d);
    return 2.0 / b * std::exp(-lambda * t) * std::sqrt(1.0 + lambda * lambda / (omega * omega));
  };
  try {
    return 1.0 / b + numerics::series_sum(term, rp.tol, rp.max_terms, 1, envelope).value;
  } catch (const numerics::BudgetExceeded& e) {
    throw numerics::BudgetExceeded(
        std::string("reflecting series: ") + e.what() +
            " (terms do not decay while the no-switch weight e^{-lt} exceeds the tolerance)",
        1.0 / b + e.partial());
  }
}

MomentResult moment_alpha(double alpha, PatternPair pattern, double z, const Params& params,
                          double t_cap) {
  if (!(alpha >= 0.0)) throw std::domain_error("moment_alpha: alpha must be >= 0");
  const MixedDistribution law(pattern, z, params);
  if (!(t_cap > law.atom_time())) throw std::domain_error("moment_alpha: t_cap must exceed z/(2v)");
  const numerics::Integrand f = [&law, alpha](double t) {
    return std::pow(t, alpha) * law.density(t);
  };
  MomentResult result;
  result.partial = law.atom_mass() * std::pow(law.atom_time(), alpha) +
                   integrate(f, law.atom_time(), t_cap, kOuter).value;
  result.diverges = alpha >= 0.5;
  result.extrapolated =
      result.diverges ? std::numeric_limits<double>::infinity()
                      : result.partial + law.tail_constant() * std::pow(t_cap, alpha - 0.5) /
                                             (0.5 - alpha);
  return result;
}

}  // namespace telegas::analytic
