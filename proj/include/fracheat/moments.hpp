#pragma once

// Monte Carlo moment estimation on ensembles of solution paths, the Laplace
// diagnostic Lambda(theta) of the squared first-mode relaxation, growth-rate
// fitting on log moments, the common-noise beta sweep, and continuity-modulus
// estimation.

#include <cstdint>
#include <vector>

#include "fracheat/sde.hpp"

namespace fracheat {

// Second-moment estimates on the full time grid.  sup_x takes the empirical
// mean over replicas at every interior node first and maximizes the mean over
// nodes; mode1 is the squared trapezoidal first-mode coefficient.  Standard
// errors are jackknife (leave-one-replica-out).  Deterministic members of the
// ensemble (lambda_level = 0, or the t = 0 row) legitimately report SE = 0.
struct MomentSeries {
  std::vector<double> times;
  std::vector<double> sup_x_second_moment;
  std::vector<double> sup_x_se;
  std::vector<double> mode1_second_moment;
  std::vector<double> mode1_se;
  long replicas_used = 0;
  long aborted = 0;
};

enum class MomentKind { sup_x, mode1 };

// Least-squares line through log(estimate) against t on [t_lo, t_hi].
// ci_halfwidth is the 95% two-sided halfwidth from the residual variance
// (Student quantile at n-2 degrees of freedom).
struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;  // value of the line at t = 0
  double ci_halfwidth = 0.0;
  double t_lo = 0.0;  // included range, not the requested window
  double t_hi = 0.0;
  long points = 0;
};

// Common-random-number gap estimates against the beta = 1 run: for every
// requested beta, the MC estimate of the worst E|u - u_beta|^p over the probe
// set (all spatial nodes at 8 evenly spaced positive time levels).
struct ConvergenceReport {
  std::vector<double> beta_values;
  std::vector<double> sup_moment_gap;
  int p = 2;
  std::uint64_t common_seed = 0;
  long replicas_used = 0;
};

// Log-log fits of p-th moment increments: a from spatial gaps at the final
// time, b from temporal gaps at late anchors, K the smallest constant
// covering every probe with the fitted exponents.  degenerate marks an
// identically-zero (or below-floor) field where no regression is possible.
struct ContinuityFit {
  double a = 0.0;
  double b = 0.0;
  double K = 0.0;
  bool degenerate = false;
};

// Result of the bisection scan over the noise level: the growth predicate
// (positive late-window slope with the 95% CI excluding zero) fails at
// lambda_lo and holds at lambda_hi.
struct TransitionBracket {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  int slope_evaluations = 0;
};

// Simulates `replicas` paths (stream ids 0..replicas-1 under `seed`) and
// estimates both second-moment series with jackknife standard errors.
// Aborted replicas are counted and excluded; throws when fewer than two
// usable replicas remain.
MomentSeries mc_moments(const ModelSpec& model, const GridSpec& grid,
                        long replicas, std::uint64_t seed,
                        const EvalPolicy& policy = {});

// Lambda(theta) = int_0^infty exp(-theta t) E_beta(-lambda1 t^beta)^2 dt by
// adaptive quadrature on a geometric ladder of breakpoints; finite for every
// theta > 0 and evaluated to relative accuracy ~1e-10.
double lambda_profile(double beta, double lambda1, double theta,
                      const EvalPolicy& policy = {});

// OLS on log(estimate) over the window; throws when fewer than 5 grid times
// fall inside or any estimate there is nonpositive.
GrowthFit growth_fit(const MomentSeries& series, MomentKind which,
                     double t_lo, double t_hi);

// Runs the beta = 1 reference and each requested beta on identical noise
// (same seed and stream ids) and reports the probe-set gap per beta.
ConvergenceReport beta_convergence(const ModelSpec& reference_model,
                                   const std::vector<double>& beta_values,
                                   const GridSpec& grid, int p, long replicas,
                                   std::uint64_t seed,
                                   const EvalPolicy& policy = {});

// Estimates E|u_t(y) - u_s(x)|^p on dyadic spatial lags (final row) and
// dyadic temporal lags (late anchors) and fits both log-log slopes.
// Requires at least 16 cells and 16 steps so each regression has >= 3 lags.
ContinuityFit continuity_modulus(const ModelSpec& model, const GridSpec& grid,
                                 long replicas, int p, std::uint64_t seed,
                                 const EvalPolicy& policy = {});

// Geometric bisection of the noise level between a non-growing lambda_lo and
// a growing lambda_hi, both verified up front; the predicate refits the
// sup_x series of a fresh ensemble at every probe.
TransitionBracket bracket_growth_transition(const ModelSpec& reference_model,
                                            const GridSpec& grid,
                                            double lambda_lo, double lambda_hi,
                                            long replicas, std::uint64_t seed,
                                            int bisection_steps = 4,
                                            const EvalPolicy& policy = {});

}  // namespace fracheat
