#pragma once

// Domain types shared by every module: telegraph parameters, regime labels,
// gas configurations and the closed-form constants that need nothing beyond
// Bessel I0.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace telegas {

/// Raised when an argument violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Speed v and switching intensity lambda of a telegraph process.
/// Both are strictly positive; construct through make_params().
struct Params {
  double v = 1.0;
  double lambda = 1.0;

  friend bool operator==(const Params&, const Params&) = default;
};

Params make_params(double v, double lambda);

/// Kac scaling: lambda = eps^-2, v = c / eps, so that v^2 / lambda = c^2.
Params kac_params(double eps, double c);

/// Regime label xi in {0, 1}. xi = 0 moves with +v, xi = 1 with -v.
struct VelocityState {
  int xi = 0;

  constexpr double sign() const { return xi == 0 ? 1.0 : -1.0; }
  constexpr double velocity(const Params& p) const { return sign() * p.v; }
  constexpr VelocityState flipped() const { return VelocityState{1 - xi}; }

  friend bool operator==(const VelocityState&, const VelocityState&) = default;
};

/// Initial regimes (k1, k2) of the left and right particle of a pair.
/// (0,1) approach, (1,0) separate, (0,0) and (1,1) move in parallel.
struct PatternPair {
  int k1 = 0;
  int k2 = 1;

  static constexpr PatternPair approach() { return {0, 1}; }
  static constexpr PatternPair separate() { return {1, 0}; }

  /// Rate of change of the gap x2 - x1 divided by v: -2, 0 or +2.
  constexpr double gap_slope_over_v() const {
    return VelocityState{k2}.sign() - VelocityState{k1}.sign();
  }

  friend bool operator==(const PatternPair&, const PatternPair&) = default;
};

/// Parses "00", "01", "10" or "11".
PatternPair parse_pattern(const std::string& text);
std::string to_string(PatternPair p);

inline constexpr std::array<PatternPair, 4> kAllPatterns{
    PatternPair{0, 0}, PatternPair{0, 1}, PatternPair{1, 0}, PatternPair{1, 1}};

/// Initial directions of a gas: a fixed regime vector, or (when empty)
/// independent fair coins per particle.
struct InitialRegimes {
  std::vector<int> fixed;

  static InitialRegimes equiprobable() { return {}; }
  bool is_equiprobable() const { return fixed.empty(); }

  friend bool operator==(const InitialRegimes&, const InitialRegimes&) = default;
};

/// n particles at strictly increasing sites, optionally between reflecting
/// walls at 0 and b.
struct GasConfig {
  std::vector<double> positions;
  std::optional<double> boundary;
  Params params;
  InitialRegimes initial_regimes;

  std::size_t n() const { return positions.size(); }

  friend bool operator==(const GasConfig&, const GasConfig&) = default;
};

/// Throws ValidationError when the configuration breaks an invariant.
void validate(const GasConfig& config);

struct RateBounds {
  double lower;
  double upper;
};

/// Bounds v/b <= c <= 4v/b on the pairwise crossing rate in a box of length b.
RateBounds collision_rate_bounds(double v, double b);

/// I0(2 T lambda) / (2 v): the linear-in-distance bound on E min(tau, T).
/// Throws std::range_error once I0(2 T lambda) overflows a double.
double lemma3_constant(double horizon, const Params& params);

/// log of lemma3_constant, usable past the overflow threshold.
double log_lemma3_constant(double horizon, const Params& params);

}  // namespace telegas
