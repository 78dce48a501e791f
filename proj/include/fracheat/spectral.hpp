#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fracheat/special.hpp"

namespace fracheat {

// Raised when the configured mode budget cannot push the analytic series
// tail below the requested tolerance.  Callers must widen n_modes (or accept
// a coarser tolerance) explicitly; nothing is truncated silently.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  double length = 1.0;
  long n_modes = 4096;
  void validate() const;
};

enum class KernelKind { classical, fractional };

// Dirichlet eigenbasis on (0, length): lambda_n = (n pi / L)^2,
// phi_n(x) = sqrt(2/L) sin(n pi x / L).
class SpectralBasis {
 public:
  explicit SpectralBasis(DomainSpec spec);

  double length() const { return spec_.length; }
  long n_modes() const { return spec_.n_modes; }
  double lambda(long n) const;
  double phi(long n, double x) const;

  // Upper bound on sup_{x,y} |dropped tail| of the kernel series truncated
  // after `modes` terms: algebraic in the fractional case, geometric in the
  // classical one.  beta is ignored for classical; beta = 1 fractional is
  // routed to the classical bound (the coefficients are exponentials).
  static double tail_bound_for(KernelKind kind, double beta, double length,
                               long modes, double t);
  static long required_modes(KernelKind kind, double beta, double length,
                             double t, double tol);

  double tail_bound(KernelKind kind, double beta, double t) const;
  // Throws TruncationError when the budget cannot meet tol at time t.
  void require_budget(KernelKind kind, double beta, double t,
                      double tol) const;

 private:
  DomainSpec spec_;
};

struct InitialCondition {
  enum class Kind { mode, bump, tabulated };
  Kind kind = Kind::mode;
  // mode: amplitude * phi_1 (higher modes are sign-changing and violate the
  // nonnegativity contract, so only the ground mode is admitted)
  int mode_index = 1;
  double amplitude = 1.0;
  // bump: amplitude * cos^2(pi (x-center) / (2 half_width)) on
  // |x - center| < half_width, compactly supported strictly inside (0, L)
  double center = 0.0;
  double half_width = 0.0;
  // tabulated: nonnegative values on uniform nodes spanning [0, L],
  // endpoints zero, interpreted piecewise-linearly
  std::vector<double> table;

  void validate(double length) const;
  double value(double x, double length) const;
  bool is_zero() const;
};

// <u0, phi_n> for n = 1..count.  Exact for mode data; composite
// Gauss-Legendre with >= 8 points per shortest wavelength otherwise.
std::vector<double> initial_coefficients(const SpectralBasis& basis,
                                         const InitialCondition& u0,
                                         long count);

// Pointwise kernels.  tol bounds the dropped series tail (absolute).
double classical_kernel(const SpectralBasis& basis, double t, double x,
                        double y, double tol = 1e-6);
double fractional_kernel(const SpectralBasis& basis, double beta, double t,
                         double x, double y, double tol = 1e-6,
                         const EvalPolicy& policy = {});
// Time derivative of the fractional kernel.
double fractional_kernel_dt(const SpectralBasis& basis, double beta, double t,
                            double x, double y, double tol = 1e-6,
                            const EvalPolicy& policy = {});

// Kernel on a grid of points, sharing one coefficient sweep: row-major
// values[ix * ys.size() + iy].
std::vector<double> fractional_kernel_grid(const SpectralBasis& basis,
                                           double beta, double t,
                                           const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           double tol = 1e-6,
                                           const EvalPolicy& policy = {});

// Action of the (classical or fractional) kernel on initial data at one or
// many space points; fractional beta=1 coincides with classical bit for bit.
std::vector<double> deterministic_profile(const SpectralBasis& basis,
                                          KernelKind kind, double beta,
                                          const InitialCondition& u0, double t,
                                          const std::vector<double>& xs,
                                          double tol = 1e-6,
                                          const EvalPolicy& policy = {});
double apply_initial(const SpectralBasis& basis, KernelKind kind, double beta,
                     const InitialCondition& u0, double t, double x,
                     double tol = 1e-6, const EvalPolicy& policy = {});

struct IncrementNorms {
  double space_sq = 0.0;  // int_0^t int_0^L [K(s,x+k,y)-K(s,x,y)]^2 dy ds
  double time_sq = 0.0;   // int_0^t int_0^L [K(s+h,x,y)-K(s,x,y)]^2 dy ds
};

IncrementNorms increment_norms(const SpectralBasis& basis, double beta,
                               double t_horizon, double x, double space_shift,
                               double time_shift, double eta,
                               double tol = 1e-6,
                               const EvalPolicy& policy = {});

// Precomputed kernel slices K((m - 1/2) dt, x_i, y_k) for the time-stepping
// convolution: nodes x_i = i L / J (i = 0..J) against cell midpoints
// y_k = (k + 1/2) L / J (k = 0..J-1).  phi_n(x_i) phi_n(y_k) is periodic in
// n with period 4J on this layout, so the mode sum folds exactly onto 4J
// residue classes; levels with millions of modes assemble in O(N + J^2 * 4J).
class KernelTable {
 public:
  KernelTable(const SpectralBasis& basis, KernelKind kind, double beta,
              double dt, int n_levels, int n_cells, double tol = 1e-6,
              const EvalPolicy& policy = {});

  int levels() const { return n_levels_; }
  int cells() const { return n_cells_; }
  // Block for lag level m in [1, levels]; row-major (cells+1) x cells.
  const double* level(int m) const;
  double at(int m, int node_i, int cell_k) const;

 private:
  int n_levels_ = 0;
  int n_cells_ = 0;
  std::vector<double> data_;
};

}  // namespace fracheat
