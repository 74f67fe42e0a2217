#include "telegas/core.hpp"

#include <cmath>
#include <limits>

#include "telegas/numerics.hpp"

namespace telegas {

Params make_params(double v, double lambda) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("v must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be > 0");
  return Params{v, lambda};
}

Params kac_params(double eps, double c) {
  if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
  if (!(c > 0.0)) throw ValidationError("c must be > 0");
  return make_params(c / eps, 1.0 / (eps * eps));
}

PatternPair parse_pattern(const std::string& text) {
  if (text.size() != 2 || (text[0] != '0' && text[0] != '1') ||
      (text[1] != '0' && text[1] != '1'))
    throw ValidationError("pattern must be one of 00, 01, 10, 11 (got '" + text + "')");
  return PatternPair{text[0] - '0', text[1] - '0'};
}

std::string to_string(PatternPair p) {
  return std::string{static_cast<char>('0' + p.k1), static_cast<char>('0' + p.k2)};
}

void validate(const GasConfig& config) {
  make_params(config.params.v, config.params.lambda);
  if (config.positions.empty()) throw ValidationError("gas needs at least one particle");
  for (std::size_t i = 1; i < config.positions.size(); ++i) {
    if (!(config.positions[i - 1] < config.positions[i]))
      throw ValidationError("positions must be strictly increasing (index " +
                            std::to_string(i) + ")");
  }
  if (config.boundary) {
    const double b = *config.boundary;
    if (!(b > 0.0)) throw ValidationError("boundary b must be > 0");
    if (!(config.positions.front() > 0.0) || !(config.positions.back() < b))
      throw ValidationError("positions must lie inside (0, b)");
  }
  if (!config.initial_regimes.is_equiprobable()) {
    if (config.initial_regimes.fixed.size() != config.positions.size())
      throw ValidationError("initial regime vector must have one entry per particle");
    for (int xi : config.initial_regimes.fixed)
      if (xi != 0 && xi != 1) throw ValidationError("regime labels must be 0 or 1");
  }
}

RateBounds collision_rate_bounds(double v, double b) {
  if (!(v > 0.0)) throw ValidationError("v must be > 0");
  if (!(b > 0.0)) throw ValidationError("b must be > 0");
  return {v / b, 4.0 * v / b};
}

double log_lemma3_constant(double horizon, const Params& params) {
  if (!(horizon > 0.0)) throw ValidationError("T must be > 0");
  const double x = 2.0 * horizon * params.lambda;
  return x + std::log(numerics::bessel_i_scaled(0, x)) - std::log(2.0 * params.v);
}

double lemma3_constant(double horizon, const Params& params) {
  const double log_c = log_lemma3_constant(horizon, params);
  if (log_c > std::log(std::numeric_limits<double>::max()))
    throw std::range_error("I0(2 T lambda) overflows; use log_lemma3_constant");
  return std::exp(log_c);
}

}  // namespace telegas
