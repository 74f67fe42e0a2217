#pragma once

// Special functions and quadrature: modified Bessel functions of the first
// kind, the regularized incomplete beta function, adaptive Gauss-Kronrod
// integration with open nodes, and stopping-rule series summation.

#include <cstddef>
#include <functional>
#include <stdexcept>

namespace telegas::numerics {

/// Thrown when an iterative method runs out of budget. Carries the best
/// estimate reached so far.
class BudgetExceeded : public std::runtime_error {
public:
  BudgetExceeded(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial() const { return partial_; }

private:
  double partial_;
};

/// I_order(x) for integer order >= 0 and x >= 0.
///
/// Orders 0 and 1 are what the collision laws need; order 2 appears in the
/// closed form of the doubly convolved kernel. Power series below x = 15,
/// scaled asymptotic expansion above. Overflows to +inf near x ~ 713.
double bessel_i(int order, double x);

/// e^{-x} I_order(x); never overflows.
double bessel_i_scaled(int order, double x);

/// e^{-x} I_order(x) / x for order >= 1, continuous at x = 0
/// (limit 1/2 for order 1, 0 for higher orders).
double bessel_i_over_x_scaled(int order, double x);

/// sqrt(2 pi x) I1(x) e^{-x}; tends to 1 as x -> inf.
double bessel_i_scaled_asymptotic_check(double x);

/// Regularized incomplete beta I_p(a, b) for p in [0, 1], a, b > 0.
double reg_inc_beta(double p, double a, double b);

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_evaluations = 400000;
};

using Integrand = std::function<double(double)>;

/// Adaptive 15-point Gauss-Kronrod quadrature on [a, b]. Nodes are interior,
/// so removable singularities at the endpoints are never evaluated. An
/// infinite upper limit is mapped by t = a + u / (1 - u).
///
/// Stops once the summed error estimate is below max(abs_tol, rel_tol |I|);
/// throws BudgetExceeded past max_evaluations.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& options);

/// Absolute-tolerance shorthand.
QuadratureResult integrate(const Integrand& f, double a, double b, double tol);

struct SeriesResult {
  double value = 0.0;
  std::size_t terms = 0;
};

/// Sums term(first) + term(first + 1) + ... until |envelope(n)| < tol for
/// three consecutive n. Without an envelope, |term(n)| is used.
SeriesResult series_sum(const std::function<double(std::size_t)>& term,
                        double tol, std::size_t n_max, std::size_t first = 0,
                        const std::function<double(std::size_t)>& envelope = {});

}  // namespace telegas::numerics
