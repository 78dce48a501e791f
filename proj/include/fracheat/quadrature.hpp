#pragma once

// Adaptive Gauss-Kronrod (G7,K15) integration with a worst-interval-first
// refinement queue, plus fixed-order composite Gauss-Legendre panels for
// smooth integrands whose resolution requirement is known a priori.

#include <functional>
#include <stdexcept>
#include <vector>

namespace fracheat {

struct QuadResult {
  double value = 0.0;
  double abs_err = 0.0;
  long evals = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

using Integrand = std::function<double(double)>;

// One (G7,K15) panel on [a,b]: Kronrod value plus an error estimate.
QuadResult gk15_panel(const Integrand& f, double a, double b);

// Adaptive integration of f over [a,b].  `breakpoints` seeds the initial
// interval list (values outside (a,b) are ignored); refinement stops once
// the summed error estimate drops below max(abs_tol, rel_tol*|value|).
QuadResult integrate(const Integrand& f, double a, double b,
                     double abs_tol, double rel_tol,
                     const std::vector<double>& breakpoints = {},
                     int max_intervals = 4000);

// Same contract but throws QuadratureError when the tolerance is not met.
double integrate_or_throw(const Integrand& f, double a, double b,
                          double abs_tol, double rel_tol,
                          const std::vector<double>& breakpoints = {},
                          int max_intervals = 4000,
                          const char* label = "integrate");

// Integral over [a, inf) via the rational map u = a + v/(1-v).
QuadResult integrate_right_tail(const Integrand& f, double a,
                                double abs_tol, double rel_tol,
                                int max_intervals = 4000);

// Composite fixed 8-point Gauss-Legendre over `panels` equal subintervals.
double gauss_legendre(const Integrand& f, double a, double b, int panels);

}  // namespace fracheat
