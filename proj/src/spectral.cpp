#include "fracheat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>

#include "fracheat/quadrature.hpp"

namespace fracheat {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double t = s + v;
    if (std::fabs(s) >= std::fabs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

bool classical_route(KernelKind kind, double beta) {
  return kind == KernelKind::classical || beta == 1.0;
}

void check_point(double x, double length, const char* name,
                 std::vector<std::string>& bad) {
  if (!(x >= 0.0 && x <= length)) {
    std::ostringstream os;
    os << name << " = " << x << " outside [0, " << length << "]";
    bad.push_back(os.str());
  }
}

[[noreturn]] void throw_joined(const char* what,
                               const std::vector<std::string>& bad) {
  std::ostringstream os;
  os << what << ":";
  for (const auto& b : bad) os << " [" << b << "]";
  throw std::invalid_argument(os.str());
}

void check_beta_t_tol(double beta, double t, double tol) {
  std::vector<std::string> bad;
  if (!(beta > 0.0 && beta <= 1.0)) bad.push_back("beta must lie in (0, 1]");
  if (!(t > 0.0) || !std::isfinite(t)) bad.push_back("t must be positive");
  if (!(tol > 0.0)) bad.push_back("tol must be positive");
  if (!bad.empty()) throw_joined("invalid kernel evaluation request", bad);
}

// Mode coefficient of the kernel at fixed time: exp(-lambda t) on the
// classical route, E_beta(-lambda t^beta) otherwise.
struct CoeffEval {
  bool classical;
  double t;
  double t_pow_beta;
  std::optional<MittagLeffler> ml;

  CoeffEval(KernelKind kind, double beta, double time,
            const EvalPolicy& policy)
      : classical(classical_route(kind, beta)),
        t(time),
        t_pow_beta(std::pow(time, beta)) {
    if (!classical) ml.emplace(beta, policy);
  }
  double operator()(double lam) const {
    if (classical) {
      double e = lam * t;
      return e > 745.0 ? 0.0 : std::exp(-e);
    }
    return ml->value(lam * t_pow_beta);
  }
};

}  // namespace

void DomainSpec::validate() const {
  std::vector<std::string> bad;
  if (!(length > 0.0) || !std::isfinite(length))
    bad.push_back("length must be positive and finite");
  if (n_modes < 1) bad.push_back("n_modes must be >= 1");
  if (!bad.empty()) throw_joined("invalid domain", bad);
}

SpectralBasis::SpectralBasis(DomainSpec spec) : spec_(spec) {
  spec_.validate();
}

double SpectralBasis::lambda(long n) const {
  double w = static_cast<double>(n) * kPi / spec_.length;
  return w * w;
}

double SpectralBasis::phi(long n, double x) const {
  return std::sqrt(2.0 / spec_.length) *
         std::sin(static_cast<double>(n) * kPi * x / spec_.length);
}

double SpectralBasis::tail_bound_for(KernelKind kind, double beta,
                                     double length, long modes, double t) {
  if (modes < 1) modes = 0;
  double L = length;
  if (classical_route(kind, beta)) {
    // Coefficients exp(-lambda_n t) drop at least geometrically past N:
    // ratio between consecutive terms is <= exp(-(lambda_{N+2}-lambda_{N+1})t).
    double lam1 = kPi * static_cast<double>(modes + 1) / L;
    lam1 *= lam1;
    double a = lam1 * t;
    if (a > 745.0) return 0.0;
    double gap = (2.0 * modes + 3.0) * kPi * kPi / (L * L) * t;
    double ratio = std::exp(-gap);
    double head = (2.0 / L) * std::exp(-a);
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return head / (1.0 - ratio);
  }
  // E_beta(-x) <= Gamma(1+beta)/x and sum_{n>N} n^-2 < 1/N.
  if (modes == 0) return std::numeric_limits<double>::infinity();
  return 2.0 * L * gamma_fn(1.0 + beta) /
         (kPi * kPi * std::pow(t, beta) * static_cast<double>(modes));
}

long SpectralBasis::required_modes(KernelKind kind, double beta, double length,
                                   double t, double tol) {
  check_beta_t_tol(kind == KernelKind::classical ? 1.0 : beta, t, tol);
  if (!(length > 0.0)) throw std::invalid_argument("length must be positive");
  if (!classical_route(kind, beta)) {
    double need = 2.0 * length * gamma_fn(1.0 + beta) /
                  (kPi * kPi * std::pow(t, beta) * tol);
    if (!(need < 2e9)) {
      std::ostringstream os;
      os << "mode count " << need << " needed for tail tolerance " << tol
         << " at t = " << t << " is not feasible";
      throw TruncationError(os.str());
    }
    return std::max(1L, static_cast<long>(std::ceil(need)));
  }
  // Geometric decay: analytic first guess, then grow / binary-refine.
  double guess =
      length / kPi *
      std::sqrt(std::max(std::log(2.0 / (length * tol)), 0.0) / t);
  long lo = 0;
  long hi = std::max(1L, static_cast<long>(std::ceil(guess)));
  while (tail_bound_for(kind, beta, length, hi, t) > tol) {
    lo = hi;
    hi = hi < 16 ? hi + 1 : hi + hi / 2;
    if (hi > 100000000L) {
      std::ostringstream os;
      os << "no feasible mode count meets tail tolerance " << tol
         << " at t = " << t;
      throw TruncationError(os.str());
    }
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (mid >= 1 && tail_bound_for(kind, beta, length, mid, t) <= tol)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double SpectralBasis::tail_bound(KernelKind kind, double beta, double t) const {
  return tail_bound_for(kind, beta, spec_.length, spec_.n_modes, t);
}

void SpectralBasis::require_budget(KernelKind kind, double beta, double t,
                                   double tol) const {
  double bound = tail_bound(kind, beta, t);
  if (!(bound <= tol)) {
    long need = required_modes(kind, beta, spec_.length, t, tol);
    std::ostringstream os;
    os << "mode budget " << spec_.n_modes << " leaves series tail "
       << bound << " > " << tol << " at t = " << t << "; need " << need
       << " modes";
    throw TruncationError(os.str());
  }
}

void InitialCondition::validate(double length) const {
  std::vector<std::string> bad;
  auto finite_nonneg = [&](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream os;
      os << name << " must be finite and nonnegative";
      bad.push_back(os.str());
    }
  };
  switch (kind) {
    case Kind::mode:
      if (mode_index != 1)
        bad.push_back(
            "mode data admits index 1 only (higher modes change sign)");
      finite_nonneg(amplitude, "amplitude");
      break;
    case Kind::bump:
      finite_nonneg(amplitude, "amplitude");
      if (!(half_width > 0.0) || !std::isfinite(half_width))
        bad.push_back("half_width must be positive");
      if (!(center - half_width > 0.0) || !(center + half_width < length))
        bad.push_back("bump support must lie strictly inside the interval");
      break;
    case Kind::tabulated:
      if (table.size() < 3)
        bad.push_back("table needs at least 3 nodes");
      else {
        for (double v : table)
          if (!std::isfinite(v) || v < 0.0) {
            bad.push_back("table values must be finite and nonnegative");
            break;
          }
        if (table.front() != 0.0 || table.back() != 0.0)
          bad.push_back("table endpoints must vanish");
      }
      break;
  }
  if (!bad.empty()) throw_joined("invalid initial data", bad);
}

double InitialCondition::value(double x, double length) const {
  switch (kind) {
    case Kind::mode:
      return amplitude * std::sqrt(2.0 / length) *
             std::sin(kPi * x / length);
    case Kind::bump: {
      double u = x - center;
      if (std::fabs(u) >= half_width) return 0.0;
      double c = std::cos(kPi * u / (2.0 * half_width));
      return amplitude * c * c;
    }
    case Kind::tabulated: {
      size_t cells = table.size() - 1;
      double pos = x / length * static_cast<double>(cells);
      if (pos <= 0.0) return table.front();
      if (pos >= static_cast<double>(cells)) return table.back();
      size_t k = static_cast<size_t>(pos);
      double frac = pos - static_cast<double>(k);
      return table[k] + frac * (table[k + 1] - table[k]);
    }
  }
  return 0.0;
}

bool InitialCondition::is_zero() const {
  if (kind == Kind::tabulated)
    return std::all_of(table.begin(), table.end(),
                       [](double v) { return v == 0.0; });
  return amplitude == 0.0;
}

std::vector<double> initial_coefficients(const SpectralBasis& basis,
                                         const InitialCondition& u0,
                                         long count) {
  u0.validate(basis.length());
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  std::vector<double> a(static_cast<size_t>(count), 0.0);
  if (count == 0) return a;
  const double L = basis.length();
  if (u0.kind == InitialCondition::Kind::mode) {
    a[0] = u0.amplitude;
    return a;
  }
  if (u0.kind == InitialCondition::Kind::bump) {
    // A cos^2(pi (x-c) / (2r)) = A (1 + cos(pi (x-c)/r)) / 2 with value and
    // slope vanishing at the support edges, so integrating by parts twice:
    //   <u0, phi_n> = sqrt(2/L) (A pi^2 / (2 r^2 w^2)) sin(w c)
    //                 [sin((w-q)r)/(w-q) + sin((w+q)r)/(w+q)],  q = pi/r
    const double A = u0.amplitude, r = u0.half_width, c = u0.center;
    const double q = kPi / r;
    for (long n = 1; n <= count; ++n) {
      double w = static_cast<double>(n) * kPi / L;
      double lobe = std::fabs(w - q) < 1e-9 * q
                        ? r
                        : std::sin((w - q) * r) / (w - q);
      lobe += std::sin((w + q) * r) / (w + q);
      a[static_cast<size_t>(n - 1)] = std::sqrt(2.0 / L) * A * kPi * kPi /
                                      (2.0 * r * r * w * w) * std::sin(w * c) *
                                      lobe;
    }
    return a;
  }
  // tabulated: the interpolant is piecewise linear, so each cell integral
  // against sin(w x) has a closed form; cost O(cells) per mode
  size_t cells = u0.table.size() - 1;
  double hx = L / static_cast<double>(cells);
  for (long n = 1; n <= count; ++n) {
    double w = static_cast<double>(n) * kPi / L;
    KahanSum acc;
    for (size_t k = 0; k < cells; ++k) {
      double x0 = static_cast<double>(k) * hx;
      double x1 = x0 + hx;
      double v0 = u0.table[k], v1 = u0.table[k + 1];
      double g = (v1 - v0) / hx;
      double c0 = std::cos(w * x0), c1 = std::cos(w * x1);
      double s0 = std::sin(w * x0), s1 = std::sin(w * x1);
      acc.add(v0 * (c0 - c1) / w);
      acc.add(g * ((s1 - s0) / (w * w) - hx * c1 / w));
    }
    a[static_cast<size_t>(n - 1)] = std::sqrt(2.0 / L) * acc.get();
  }
  return a;
}

double classical_kernel(const SpectralBasis& basis, double t, double x,
                        double y, double tol) {
  return fractional_kernel(basis, 1.0, t, x, y, tol);
}

double fractional_kernel(const SpectralBasis& basis, double beta, double t,
                         double x, double y, double tol,
                         const EvalPolicy& policy) {
  std::vector<double> v =
      fractional_kernel_grid(basis, beta, t, {x}, {y}, tol, policy);
  return v[0];
}

std::vector<double> fractional_kernel_grid(const SpectralBasis& basis,
                                           double beta, double t,
                                           const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           double tol,
                                           const EvalPolicy& policy) {
  check_beta_t_tol(beta, t, tol);
  std::vector<std::string> bad;
  for (double x : xs) check_point(x, basis.length(), "x", bad);
  for (double y : ys) check_point(y, basis.length(), "y", bad);
  if (xs.empty() || ys.empty()) bad.push_back("empty evaluation grid");
  if (!bad.empty()) throw_joined("invalid kernel evaluation request", bad);

  KernelKind kind = KernelKind::fractional;
  basis.require_budget(kind, beta, t, tol);
  long N = SpectralBasis::required_modes(kind, beta, basis.length(), t, tol);
  N = std::min<long>(N, basis.n_modes());
  CoeffEval coeff(kind, beta, t, policy);

  size_t nx = xs.size(), ny = ys.size();
  std::vector<KahanSum> acc(nx * ny);
  std::vector<double> px(nx);
  for (long n = 1; n <= N; ++n) {
    double c = coeff(basis.lambda(n));
    for (size_t i = 0; i < nx; ++i) px[i] = basis.phi(n, xs[i]);
    for (size_t i = 0; i < nx; ++i) {
      double cpi = c * px[i];
      for (size_t j = 0; j < ny; ++j)
        acc[i * ny + j].add(cpi * basis.phi(n, ys[j]));
    }
  }
  std::vector<double> out(nx * ny);
  for (size_t i = 0; i < out.size(); ++i) out[i] = acc[i].get();
  return out;
}

namespace {

// Mode budget for the time-differentiated kernel.
long required_modes_dt(double beta, double length, double t, double tol,
                       long budget) {
  long n = 0;
  if (beta == 1.0) {
    // coefficients lambda exp(-lambda t)
    auto bound = [&](long N) {
      double lam = kPi * static_cast<double>(N + 1) / length;
      lam *= lam;
      double a = lam * t;
      if (a > 700.0) return 0.0;
      double gap = (2.0 * N + 3.0) * kPi * kPi / (length * length) * t;
      double grow = (static_cast<double>(N + 2) / static_cast<double>(N + 1));
      double ratio = grow * grow * std::exp(-gap);
      double head = (2.0 / length) * lam * std::exp(-a);
      return ratio < 1.0 ? head / (1.0 - ratio)
                         : std::numeric_limits<double>::infinity();
    };
    n = 1;
    while (bound(n) > tol) {
      n = n < 16 ? n + 1 : n + n / 2;
      if (n > 100000000L)
        throw TruncationError("time-derivative tail tolerance not feasible");
    }
  } else {
    // |d/dt E_beta(-lambda t^beta)| ~ beta / (Gamma(1-beta) lambda t^{1+beta})
    // once lambda t^beta is deep in the algebraic regime; factor 3 covers the
    // next-order correction, and the floor keeps every counted mode there.
    double tb = std::pow(t, beta);
    double need = 6.0 * beta * length /
                  (kPi * kPi * gamma_fn(1.0 - beta) * std::pow(t, 1.0 + beta) *
                   tol);
    double floor_asym = length / kPi * std::sqrt(60.0 / tb);
    need = std::max({need, floor_asym, 8.0});
    if (!(need < 2e9))
      throw TruncationError("time-derivative tail tolerance not feasible");
    n = static_cast<long>(std::ceil(need));
  }
  if (n > budget) {
    std::ostringstream os;
    os << "mode budget " << budget << " too small for time derivative at t = "
       << t << "; need " << n << " modes";
    throw TruncationError(os.str());
  }
  return n;
}

}  // namespace

double fractional_kernel_dt(const SpectralBasis& basis, double beta, double t,
                            double x, double y, double tol,
                            const EvalPolicy& policy) {
  check_beta_t_tol(beta, t, tol);
  std::vector<std::string> bad;
  check_point(x, basis.length(), "x", bad);
  check_point(y, basis.length(), "y", bad);
  if (!bad.empty()) throw_joined("invalid kernel evaluation request", bad);

  long N = required_modes_dt(beta, basis.length(), t, tol, basis.n_modes());
  KahanSum acc;
  if (beta == 1.0) {
    for (long n = 1; n <= N; ++n) {
      double lam = basis.lambda(n);
      double e = lam * t;
      if (e > 745.0) break;
      acc.add(-lam * std::exp(-e) * basis.phi(n, x) * basis.phi(n, y));
    }
  } else {
    MittagLeffler ml(beta, policy);
    for (long n = 1; n <= N; ++n)
      acc.add(ml.deriv_t(basis.lambda(n), t) * basis.phi(n, x) *
              basis.phi(n, y));
  }
  return acc.get();
}

std::vector<double> deterministic_profile(const SpectralBasis& basis,
                                          KernelKind kind, double beta,
                                          const InitialCondition& u0, double t,
                                          const std::vector<double>& xs,
                                          double tol,
                                          const EvalPolicy& policy) {
  check_beta_t_tol(kind == KernelKind::classical ? 1.0 : beta, t, tol);
  u0.validate(basis.length());
  std::vector<std::string> bad;
  for (double x : xs) check_point(x, basis.length(), "x", bad);
  if (!bad.empty()) throw_joined("invalid evaluation request", bad);

  std::vector<double> out(xs.size(), 0.0);
  if (u0.is_zero()) return out;
  CoeffEval coeff(kind, beta, t, policy);

  if (u0.kind == InitialCondition::Kind::mode) {
    double c = coeff(basis.lambda(1)) * u0.amplitude;
    for (size_t i = 0; i < xs.size(); ++i) out[i] = c * basis.phi(1, xs[i]);
    return out;
  }

  // Smooth data: estimate the coefficient envelope |a_n| <= K n^-p from a
  // pilot block, then size the series so the dropped mass stays under tol
  // (the time coefficients never exceed 1).
  const double p = u0.kind == InitialCondition::Kind::bump ? 3.0 : 2.0;
  long pilot = std::min<long>(basis.n_modes(), 2048);
  std::vector<double> a = initial_coefficients(basis, u0, pilot);
  double K = 0.0;
  for (long n = std::max<long>(8, pilot / 2); n <= pilot; ++n)
    K = std::max(K, std::fabs(a[static_cast<size_t>(n - 1)]) *
                        std::pow(static_cast<double>(n), p));
  long use = pilot;
  if (K > 0.0) {
    double need = std::pow(K / ((p - 1.0) * tol), 1.0 / (p - 1.0));
    if (!(need < 2e9) ||
        static_cast<long>(std::ceil(need)) > basis.n_modes()) {
      std::ostringstream os;
      os << "mode budget " << basis.n_modes()
         << " cannot resolve the initial data to tolerance " << tol;
      throw TruncationError(os.str());
    }
    long needed = static_cast<long>(std::ceil(need));
    if (needed > pilot) {
      a = initial_coefficients(basis, u0, needed);
      use = needed;
    }
  }

  std::vector<double> d(static_cast<size_t>(use));
  for (long n = 1; n <= use; ++n)
    d[static_cast<size_t>(n - 1)] =
        a[static_cast<size_t>(n - 1)] * coeff(basis.lambda(n));
  for (size_t i = 0; i < xs.size(); ++i) {
    KahanSum acc;
    for (long n = 1; n <= use; ++n)
      acc.add(d[static_cast<size_t>(n - 1)] * basis.phi(n, xs[i]));
    out[i] = acc.get();
  }
  return out;
}

double apply_initial(const SpectralBasis& basis, KernelKind kind, double beta,
                     const InitialCondition& u0, double t, double x,
                     double tol, const EvalPolicy& policy) {
  return deterministic_profile(basis, kind, beta, u0, t, {x}, tol, policy)[0];
}

namespace {

// int_0^t E_beta(-lam s^beta)^2 ds, or with time_shift > 0 the squared
// difference of coefficients at s + h and s.
double mode_time_integral(const MittagLeffler& ml, double beta, double lam,
                          double t, double h, double abs_tol) {
  double s_star = std::pow(gamma_fn(1.0 + beta) / lam, 1.0 / beta);
  std::vector<double> bps;
  for (double f : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    double b = f * s_star;
    if (b > 0.0 && b < t) bps.push_back(b);
  }
  if (h > 0.0)
    for (double f : {0.01, 0.1, 1.0, 10.0}) {
      double b = f * h;
      if (b > 0.0 && b < t) bps.push_back(b);
    }
  Integrand f;
  if (h > 0.0) {
    f = [&ml, beta, lam, h](double s) {
      double a = ml.value(lam * std::pow(s + h, beta));
      double b = s > 0.0 ? ml.value(lam * std::pow(s, beta)) : 1.0;
      double d = a - b;
      return d * d;
    };
  } else {
    f = [&ml, beta, lam](double s) {
      double v = s > 0.0 ? ml.value(lam * std::pow(s, beta)) : 1.0;
      return v * v;
    };
  }
  return integrate_or_throw(f, 0.0, t, abs_tol, 1e-9, bps, 4000,
                            "mode increment integral");
}

}  // namespace

IncrementNorms increment_norms(const SpectralBasis& basis, double beta,
                               double t_horizon, double x, double space_shift,
                               double time_shift, double eta, double tol,
                               const EvalPolicy& policy) {
  check_beta_t_tol(beta, t_horizon, tol);
  std::vector<std::string> bad;
  check_point(x, basis.length(), "x", bad);
  if (space_shift != 0.0)
    check_point(x + space_shift, basis.length(), "x + shift", bad);
  if (!(eta > 0.0 && eta < 1.0)) bad.push_back("eta must lie in (0, 1)");
  if (time_shift < 0.0 || !std::isfinite(time_shift))
    bad.push_back("time_shift must be >= 0");
  if (time_shift > 0.0 && !(eta < 1.0 - beta / 2.0))
    bad.push_back("time regularity requires eta < 1 - beta/2");
  if (!bad.empty()) throw_joined("invalid increment request", bad);

  const double L = basis.length();
  const double t = t_horizon;
  const double gb = gamma_fn(1.0 + beta);

  // Per-mode bound on int_0^t E^2 ds: E <= 1 up to s* = (G/lam)^{1/beta},
  // algebraic envelope (G / lam s^beta)^2 beyond.
  auto mode_bound = [&](long n) {
    double w = static_cast<double>(n) * kPi / L;
    double lam = w * w;
    double s_star = std::pow(gb / lam, 1.0 / beta);
    if (s_star >= t) return t;
    if (beta > 0.5 + 1e-9) return s_star * (1.0 + 1.0 / (2.0 * beta - 1.0));
    if (beta > 0.5 - 1e-9) return s_star * (2.0 + std::log(t / s_star));
    double g_over = gb / lam;
    return s_star + g_over * g_over * std::pow(t, 1.0 - 2.0 * beta) /
                        (1.0 - 2.0 * beta);
  };
  auto tail_mass = [&](long N) {
    KahanSum acc;
    for (long n = N + 1; n <= 8 * N; ++n) acc.add(mode_bound(n));
    // comparison-integral remainder past 8N; the envelope decays like
    // n^{-2/beta} there
    acc.add(mode_bound(8 * N) * 8.0 * static_cast<double>(N) * beta /
            (2.0 - beta));
    return 8.0 / L * acc.get();
  };
  long N = 64;
  while (tail_mass(N) > tol / 2.0) {
    N *= 2;
    if (N > 4000000L)
      throw TruncationError("increment tail tolerance not feasible");
  }
  if (N > basis.n_modes()) {
    std::ostringstream os;
    os << "mode budget " << basis.n_modes() << " too small for increments; need "
       << N << " modes";
    throw TruncationError(os.str());
  }

  MittagLeffler ml(beta, policy);
  double abs_q = tol * L / (16.0 * static_cast<double>(N));
  IncrementNorms out;
  if (space_shift != 0.0) {
    KahanSum acc;
    for (long n = 1; n <= N; ++n) {
      double dphi = basis.phi(n, x + space_shift) - basis.phi(n, x);
      double w = dphi * dphi;
      if (w == 0.0) continue;
      acc.add(w * mode_time_integral(ml, beta, basis.lambda(n), t, 0.0, abs_q));
    }
    out.space_sq = acc.get();
  }
  if (time_shift > 0.0) {
    KahanSum acc;
    for (long n = 1; n <= N; ++n) {
      double ph = basis.phi(n, x);
      double w = ph * ph;
      if (w == 0.0) continue;
      acc.add(w * mode_time_integral(ml, beta, basis.lambda(n), t, time_shift,
                                     abs_q));
    }
    out.time_sq = acc.get();
  }
  return out;
}

KernelTable::KernelTable(const SpectralBasis& basis, KernelKind kind,
                         double beta, double dt, int n_levels, int n_cells,
                         double tol, const EvalPolicy& policy)
    : n_levels_(n_levels), n_cells_(n_cells) {
  std::vector<std::string> bad;
  if (n_levels < 1) bad.push_back("need at least one time level");
  if (n_cells < 1) bad.push_back("need at least one cell");
  if (!(dt > 0.0) || !std::isfinite(dt)) bad.push_back("dt must be positive");
  if (!bad.empty()) throw_joined("invalid kernel table request", bad);
  check_beta_t_tol(kind == KernelKind::classical ? 1.0 : beta, dt, tol);

  const long J = n_cells;
  const long P = 4 * J;
  const double L = basis.length();

  // sin(pi q / J) for node factors (period 2J in q) and sin(pi q / (2J)) for
  // midpoint factors (period 4J): indexing through these tables keeps the
  // residue folding exact.
  std::vector<double> node_sin(static_cast<size_t>(2 * J));
  for (long q = 0; q < 2 * J; ++q)
    node_sin[static_cast<size_t>(q)] =
        q % J == 0 ? 0.0  // multiples of pi: keep boundary rows exactly zero
                   : std::sin(kPi * static_cast<double>(q) /
                              static_cast<double>(J));
  std::vector<double> mid_sin(static_cast<size_t>(4 * J));
  for (long q = 0; q < 4 * J; ++q)
    mid_sin[static_cast<size_t>(q)] =
        q % (2 * J) == 0 ? 0.0
                         : std::sin(kPi * static_cast<double>(q) /
                                    static_cast<double>(2 * J));

  std::vector<double> sx(static_cast<size_t>((J + 1) * P));
  for (long i = 0; i <= J; ++i)
    for (long r = 0; r < P; ++r)
      sx[static_cast<size_t>(i * P + r)] =
          node_sin[static_cast<size_t>((r * i) % (2 * J))];
  std::vector<double> sy(static_cast<size_t>(J * P));
  for (long k = 0; k < J; ++k)
    for (long r = 0; r < P; ++r)
      sy[static_cast<size_t>(k * P + r)] =
          mid_sin[static_cast<size_t>(((2 * k + 1) * r) % (4 * J))];

  const size_t block = static_cast<size_t>((J + 1) * J);
  data_.assign(block * static_cast<size_t>(n_levels), 0.0);

  std::optional<MittagLeffler> ml;
  if (!classical_route(kind, beta)) ml.emplace(beta, policy);

  std::vector<double> S(static_cast<size_t>(P));
  std::vector<double> w(static_cast<size_t>(P));
  for (int m = 1; m <= n_levels; ++m) {
    double t = (static_cast<double>(m) - 0.5) * dt;
    basis.require_budget(kind, beta, t, tol);
    long N = SpectralBasis::required_modes(kind, beta, L, t, tol);
    std::fill(S.begin(), S.end(), 0.0);
    if (!ml) {
      for (long n = 1; n <= N; ++n) {
        double e = basis.lambda(n) * t;
        if (e > 745.0) break;
        S[static_cast<size_t>(n % P)] += std::exp(-e);
      }
    } else {
      double tb = std::pow(t, beta);
      for (long n = 1; n <= N; ++n)
        S[static_cast<size_t>(n % P)] += ml->value(basis.lambda(n) * tb);
    }
    double* B = data_.data() + block * static_cast<size_t>(m - 1);
    const double scale = 2.0 / L;
    for (long k = 0; k < J; ++k) {
      const double* syk = sy.data() + static_cast<size_t>(k * P);
      for (long r = 0; r < P; ++r)
        w[static_cast<size_t>(r)] = syk[r] * S[static_cast<size_t>(r)];
      for (long i = 0; i <= J; ++i) {
        const double* sxi = sx.data() + static_cast<size_t>(i * P);
        double dot = 0.0;
        for (long r = 0; r < P; ++r) dot += sxi[r] * w[static_cast<size_t>(r)];
        B[static_cast<size_t>(i * J + k)] = scale * dot;
      }
    }
  }
}

const double* KernelTable::level(int m) const {
  if (m < 1 || m > n_levels_)
    throw std::out_of_range("kernel table level out of range");
  return data_.data() +
         static_cast<size_t>(m - 1) * static_cast<size_t>((n_cells_ + 1) *
                                                          n_cells_);
}

double KernelTable::at(int m, int node_i, int cell_k) const {
  if (node_i < 0 || node_i > n_cells_ || cell_k < 0 || cell_k >= n_cells_)
    throw std::out_of_range("kernel table index out of range");
  return level(m)[static_cast<size_t>(node_i * n_cells_ + cell_k)];
}

}  // namespace fracheat
