#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "telegas/sim.hpp"

namespace oracle {

// I_order(x) by its power series in long double.
inline long double bessel_i_series(int order, long double x) {
  long double term = 1.0L;
  for (int k = 1; k <= order; ++k) term *= x / 2.0L / k;
  long double sum = term;
  for (int m = 1; m < 2000; ++m) {
    term *= (x / 2.0L) * (x / 2.0L) / (static_cast<long double>(m) * (m + order));
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return sum;
}

// I_p(a, b) for integer a, b as a binomial tail.
inline long double inc_beta_binomial(long double p, int a, int b) {
  const int n = a + b - 1;
  long double total = 0.0L;
  for (int j = a; j <= n; ++j) {
    long double log_c = std::lgamma(static_cast<long double>(n + 1)) -
                        std::lgamma(static_cast<long double>(j + 1)) -
                        std::lgamma(static_cast<long double>(n - j + 1));
    total += std::exp(log_c + j * std::log(p) + (n - j) * std::log1p(-p));
  }
  return total;
}

// P(at least r of the events) by listing all outcomes.
inline double order_cdf_enumerated(int rank, const std::vector<double>& p) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double prob = 1.0;
    int hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = (mask >> i) & 1;
      prob *= on ? p[i] : 1.0 - p[i];
      hits += on;
    }
    if (hits >= rank) total += prob;
  }
  return total;
}

// Hard-collision gas simulated directly: labeled particles exchange their
// velocity programs whenever two neighbours meet. Each particle follows the
// slope of the path it currently carries. Returns labeled positions at the
// requested (sorted) times.
inline std::vector<std::vector<double>> velocity_swap_positions(
    const std::vector<telegas::sim::Trajectory>& paths, const std::vector<double>& times) {
  const std::size_t n = paths.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return paths[a].origin < paths[b].origin; });
  std::vector<double> x(n);
  std::vector<std::size_t> carried(n);
  for (std::size_t i = 0; i < n; ++i) {
    carried[i] = order[i];
    x[i] = paths[order[i]].origin;
  }
  auto slope = [&](std::size_t label, double t) { return paths[carried[label]].slope(t); };
  auto next_break = [&](double t) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& path : paths)
      for (const auto& bp : path.breakpoints)
        if (bp.time > t) {
          best = std::min(best, bp.time);
          break;
        }
    return best;
  };

  std::vector<std::vector<double>> out;
  double t = 0.0;
  std::size_t next_sample = 0;
  while (next_sample < times.size()) {
    double t_next = std::min(next_break(t), times[next_sample]);
    // Earliest meeting of neighbours within [t, t_next].
    std::size_t hit = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double closing = slope(i, t) - slope(i + 1, t);
      if (closing > 0.0) {
        const double when = t + std::max(0.0, x[i + 1] - x[i]) / closing;
        if (when < t_next) {
          t_next = when;
          hit = i;
        }
      }
    }
    const double dt = t_next - t;
    for (std::size_t i = 0; i < n; ++i) x[i] += slope(i, t) * dt;
    t = t_next;
    if (hit < n) {
      x[hit + 1] = x[hit];
      std::swap(carried[hit], carried[hit + 1]);
    }
    // Reflections happen inside the carried paths; re-anchor to them.
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = paths[carried[i]].position(t);
      if (std::abs(exact - x[i]) < 1e-9) x[i] = exact;
    }
    while (next_sample < times.size() && times[next_sample] <= t) {
      out.push_back(x);
      ++next_sample;
    }
  }
  return out;
}

}  // namespace oracle
