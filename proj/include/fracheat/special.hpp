#pragma once

// Completely monotone special functions for the time-fractional heat kernel:
// the one-parameter Mittag-Leffler function on the negative real axis, the
// density of the standard one-sided stable subordinator, the density of its
// inverse process, and the Laplace transform of the relaxation function.

#include <vector>

namespace fracheat {

// Gamma for real arguments (poles excluded), Lanczos g=7 approximation with
// reflection for the left half-line.  log_gamma requires x > 0.
double gamma_fn(double x);
double log_gamma(double x);

struct EvalPolicy {
  double series_cutoff = 5.0;       // power series attempted for x below this
  double asymptotic_cutoff = 50.0;  // algebraic tail expansion above this
  int series_terms_max = 600;
  double quadrature_abs_tol = 1e-13;
  double quadrature_rel_tol = 1e-12;

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

// Evaluator for E_beta(-x), x >= 0, 0 < beta <= 1, and for the time
// derivative of the relaxation function t -> E_beta(-lam t^beta).
// Immutable after construction; safe to share across threads.
class MittagLeffler {
 public:
  explicit MittagLeffler(double beta, EvalPolicy policy = {});

  double beta() const { return beta_; }

  // E_beta(-x).  Strictly decreasing in x, values in (0, 1].
  double value(double x) const;

  // d/dt E_beta(-lam t^beta) for t > 0, lam >= 0.  Nonpositive.
  double deriv_t(double lam, double t) const;

 private:
  double series_value(double x, bool* ok) const;
  double series_deriv(double y, bool* ok) const;  // sum k (-y)^k / Gamma(1+bk)
  double asymptotic_value(double x, bool* ok) const;
  double asymptotic_deriv(double y, bool* ok) const;
  double branch_cut_value(double x) const;
  double branch_cut_deriv(double y) const;

  double beta_ = 1.0;
  EvalPolicy policy_;
  std::vector<double> lg_pos_;    // log Gamma(1 + beta k)
  std::vector<double> recip_neg_; // 1 / Gamma(1 - beta k), k >= 1
  double sin_bpi_ = 0.0;
  double cos_bpi_ = 0.0;
};

// Convenience single-shot wrappers.
double ml_neg(double beta, double x, const EvalPolicy& policy = {});
double ml_dt(double beta, double lam, double t, const EvalPolicy& policy = {});

// Density at time 1 of the one-sided stable subordinator with Laplace
// transform exp(-s^beta), 0 < beta < 1, evaluated at u > 0.  Kanter's
// single-integral representation with adaptive quadrature.
double stable_density(double beta, double u, const EvalPolicy& policy = {});

// Density of the inverse subordinator at time t > 0, evaluated at s >= 0:
// f_t(s) = (t/beta) s^{-1-1/beta} g_beta(t s^{-1/beta}).
double inv_sub_density(double beta, double t, double s,
                       const EvalPolicy& policy = {});

// Laplace transform of t -> E_beta(-lam t^beta):
// theta^{beta-1} / (theta^beta + lam) for theta > 0, lam > 0.
double laplace_ml(double beta, double lam, double theta);

}  // namespace fracheat
