#pragma once

// Closed-form laws of two-particle telegraph collisions and of reflected
// telegraph motion.
//
// Notation: a pair starts at distance z with regimes (k1, k2); tau is the
// first time the gap closes. For the approaching pattern (0,1) the law of
// tau is an atom of mass exp(-lambda z / v) at t0 = z / (2v) plus the density
//
//   2 z lambda exp(-2 lambda t) I1((lambda/v) sqrt(4 v^2 t^2 - z^2))
//              / sqrt(4 v^2 t^2 - z^2),   t > t0.
//
// Its Laplace transform is exp(-(z / 2v) sqrt(s^2 + 4 lambda s)). The other
// patterns factor through the same transform:
//
//   (0,0), (1,1):  law(0,1) * g        (convolution)
//   (1,0):         law(0,1) * g * g
//
// with g(t) = exp(-2 lambda t) I1(2 lambda t) / t, the density whose
// transform is 2 lambda / (s + 2 lambda + sqrt(s^2 + 4 lambda s)).
// g * g has the closed form 2 exp(-2 lambda t) I2(2 lambda t) / t.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "telegas/core.hpp"

namespace telegas::analytic {

/// Selects the corrected constants or a literal alternative kept for
/// side-by-side audits. Literal variants:
/// the approach density carries z lambda / (2 v^2) instead of 2 z lambda; the
/// diffusive meeting law uses exp(-z c sqrt(s)) instead of exp(-(z/c) sqrt(s));
/// the Levy exponent is taken with a plus sign and weight lambda / v.
enum class Constants { corrected, paper_literal };

/// E exp(-s tau) for the given pattern. s >= 0, z > 0.
double phi(PatternPair pattern, double s, double z, const Params& params);

/// g(t) = exp(-2 lambda t) I1(2 lambda t) / t, with g(0) = lambda.
double g_density(double t, const Params& params);

/// (g * g)(t) = 2 exp(-2 lambda t) I2(2 lambda t) / t, with value 0 at t = 0.
double g2_density(double t, const Params& params);

/// Limit of the (0,1) density as t -> t0+: lambda^2 z / v * exp(-lambda z / v).
double approach_density_at_front(double z, const Params& params);

/// Law of tau_(k1,k2)(z): atom at t0 plus a density on (t0, inf).
/// Immutable value type; every query is computed on demand.
class MixedDistribution {
public:
  MixedDistribution(PatternPair pattern, double z, const Params& params,
                    Constants constants = Constants::corrected);

  PatternPair pattern() const { return pattern_; }
  double z() const { return z_; }
  const Params& params() const { return params_; }
  Constants constants() const { return constants_; }

  double atom_time() const { return atom_time_; }
  /// Nonzero only for the approaching pattern.
  double atom_mass() const { return atom_mass_; }

  /// Absolutely continuous part; zero for t <= t0.
  double density(double t) const;

  /// P(tau <= t), atom included for t >= t0.
  double cdf(double t) const;
  /// P(tau < t).
  double cdf_left(double t) const;
  /// P(tau > t), by integrating the tail (accurate where cdf is close to 1).
  double survival(double t) const;

  /// cdf at every point of a nondecreasing sequence, integrating the density
  /// panel by panel between consecutive points.
  std::vector<double> cdf_sorted(std::span<const double> ts) const;

  /// Integral of the density over (t0, inf).
  double continuous_mass() const;

  /// Numerical transform: atom e^{-s t0} + integral of e^{-st} density.
  double laplace(double s) const;

  /// C in density(t) ~ C t^{-3/2} as t -> inf.
  double tail_constant() const;

private:
  double approach_density(double t) const;
  double convolved_density(double t) const;
  double kernel(double t) const;
  double integrate_density(double a, double b) const;

  PatternPair pattern_;
  double z_;
  Params params_;
  Constants constants_;
  double atom_time_;
  double atom_mass_;
};

MixedDistribution first_meeting_distribution(
    PatternPair pattern, double z, const Params& params,
    Constants constants = Constants::corrected);

/// First meeting density of two independent Wiener particles started at
/// distance z, each with variance c^2 t.
double wiener_meeting_pdf(double t, double z, double c,
                          Constants constants = Constants::corrected);
double wiener_meeting_cdf(double t, double z, double c,
                          Constants constants = Constants::corrected);
/// Transform of the meeting law: exp(-(z/c) sqrt(s)).
double wiener_meeting_laplace(double s, double z, double c,
                              Constants constants = Constants::corrected);

/// Log-exponent of phi_(0,1) minus its Levy-Khintchine form
///   -(z/2v) s - (z lambda / v) int_0^inf (1 - e^{-s y}) g(y) dy.
double levy_identity_residual(double s, double z, const Params& params,
                              Constants constants = Constants::corrected);

/// Inverse transform of (s + 2l + sqrt(s^2 + 4ls)) / (2 s sqrt(s^2 + 4ls)):
///   1/2 + e^{-2lu} [(1/2 + l u) I0(2lu) + l u I1(2lu)].
/// Expected number of crossings in [0, u] for a pair that has just met.
double renewal_kernel(double u, const Params& params);

/// g * renewal_kernel = l u e^{-2lu} [I0(2lu) + I1(2lu)].
double renewal_kernel_parallel(double u, const Params& params);

/// H(t) = expected number of collisions of a pair in (0, t], started at
/// distance z with the given regimes.
double renewal_H(PatternPair pattern, double t, double z, const Params& params);
inline double renewal_H(double t, double z, const Params& params) {
  return renewal_H(PatternPair::approach(), t, z, params);
}

/// Sum of adjacent-pair renewal functions. Exact while no non-adjacent pair
/// can have met, i.e. t < min_i (y_{i+2} - y_i) / (2v); it undercounts after.
double multi_renewal(double t, std::span<const double> positions,
                     std::span<const int> regimes, const Params& params);

/// Sum over all pairs; the expected total collision count for any t.
double multi_renewal_all_pairs(double t, std::span<const double> positions,
                               std::span<const int> regimes,
                               const Params& params);

/// P(at least r of n independent events occur), event i with probability
/// p[i]. Poisson-binomial recursion, O(n^2).
double order_stat_cdf(int rank, std::span<const double> p);

/// I_{x/b}(k, n - k + 1): cdf of the k-th of n independent uniforms on [0, b].
double uniform_order_stat_cdf(int k, int n, double x, double b);

struct ReflectingDensityParams {
  double b = 1.0;
  Params params;
  std::size_t max_terms = 200000;
  double tol = 1e-12;
  /// Smallest admissible time; negative selects the default b / (10 v).
  double t_min = -1.0;

  double effective_t_min() const;
};

struct ReflectingAtom {
  double position;
  double mass;
};

/// Continuous part of the free (unbounded) telegraph law at displacement u,
/// for equiprobable initial direction: for |u| < vt,
///   (l e^{-lt} / 2v) [I0(w) + v t I1(w) / sqrt(v^2 t^2 - u^2)],
///   w = (l / v) sqrt(v^2 t^2 - u^2).
double free_telegraph_density(double t, double u, const Params& params);

/// Absolutely continuous part of the transition law of a telegraph particle
/// reflected at 0 and b, by summing free-law images over the period-2b fold.
/// The full law also carries the two no-switch atoms of reflecting_atoms().
double reflecting_density(double t, double x, double y,
                          const ReflectingDensityParams& rp);

/// No-switch point masses e^{-lt}/2 at fold(y + vt) and fold(y - vt).
std::array<ReflectingAtom, 2> reflecting_atoms(double t, double y,
                                               const ReflectingDensityParams& rp);

/// e^{-lt} [cosh(theta_n t) + (l / theta_n) sinh(theta_n t)] with
/// theta_n = sqrt(l^2 - (pi v n / b)^2), taken in its real form on both sides
/// of l = pi v n / b.
double reflecting_mode_amplitude(std::size_t n, double t,
                                 const ReflectingDensityParams& rp);

/// Cosine series 1/b + (2/b) sum_n amp_n(t) cos(pi n y / b) cos(pi n x / b)
/// of the full transition law. Pointwise convergent only once the atom weight
/// e^{-lt} is below the truncation tolerance; otherwise throws
/// numerics::BudgetExceeded carrying the partial sum.
double reflecting_series(double t, double x, double y,
                         const ReflectingDensityParams& rp);

struct MomentResult {
  /// Atom contribution plus integral of t^alpha density up to t_cap.
  double partial = 0.0;
  /// partial plus the power-law tail beyond t_cap; +inf when divergent.
  double extrapolated = 0.0;
  bool diverges = false;
};

/// E tau^alpha, truncated at t_cap and extrapolated with the t^{-3/2} tail.
MomentResult moment_alpha(double alpha, PatternPair pattern, double z,
                          const Params& params, double t_cap);

}  // namespace telegas::analytic
