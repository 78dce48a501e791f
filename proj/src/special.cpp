#include "fracheat/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracheat/quadrature.hpp"

namespace fracheat {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos g=7, n=9 coefficients.
const double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_sum(double z) {
  double s = kLanczos[0];
  for (int i = 1; i < 9; ++i) s += kLanczos[i] / (z + i);
  return s;
}

bool near_nonpositive_integer(double x) {
  if (x > 0.0) return false;
  return std::fabs(x - std::nearbyint(x)) < 1e-14;
}

// Compensated (Neumaier) accumulator.
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

}  // namespace

double gamma_fn(double x) {
  if (near_nonpositive_integer(x))
    throw std::domain_error("gamma_fn: pole at nonpositive integer " +
                            std::to_string(x));
  if (x < 0.5) return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  const double z = x - 1.0;
  const double t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) *
         lanczos_sum(z);
}

double log_gamma(double x) {
  if (!(x > 0.0))
    throw std::domain_error("log_gamma: requires x > 0, got " +
                            std::to_string(x));
  if (x < 0.5)
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  const double z = x - 1.0;
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t +
         std::log(lanczos_sum(z));
}

void EvalPolicy::validate() const {
  std::string problems;
  auto complain = [&](const char* msg) {
    if (!problems.empty()) problems += "; ";
    problems += msg;
  };
  if (!(series_cutoff > 0.0)) complain("series_cutoff must be positive");
  if (!(asymptotic_cutoff > series_cutoff))
    complain("asymptotic_cutoff must exceed series_cutoff");
  if (series_terms_max < 16) complain("series_terms_max must be at least 16");
  if (!(quadrature_abs_tol > 0.0)) complain("quadrature_abs_tol must be positive");
  if (!(quadrature_rel_tol > 0.0)) complain("quadrature_rel_tol must be positive");
  if (!problems.empty())
    throw std::invalid_argument("EvalPolicy: " + problems);
}

MittagLeffler::MittagLeffler(double beta, EvalPolicy policy)
    : beta_(beta), policy_(policy) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::domain_error("MittagLeffler: beta must lie in (0,1], got " +
                            std::to_string(beta));
  policy_.validate();
  if (beta_ == 1.0) return;  // collapses to exp(-x); no tables needed
  sin_bpi_ = std::sin(kPi * beta_);
  cos_bpi_ = std::cos(kPi * beta_);
  lg_pos_.resize(policy_.series_terms_max + 1);
  for (int k = 0; k <= policy_.series_terms_max; ++k)
    lg_pos_[k] = log_gamma(1.0 + beta_ * k);
  // 1/Gamma(1 - beta k) via reflection: sin(pi beta k) Gamma(beta k) / pi.
  // Pole positions (beta k a positive integer) are snapped to an exact zero;
  // the rounded sine would otherwise leave ~1e-16-scale debris that derails
  // the smallest-term truncation rule.
  const int kAsym = 60;
  recip_neg_.resize(kAsym + 1, 0.0);
  for (int k = 1; k <= kAsym; ++k) {
    const double bk = beta_ * k;
    if (std::fabs(bk - std::nearbyint(bk)) < 1e-9 && bk > 0.5) continue;
    recip_neg_[k] = std::sin(kPi * bk) * std::exp(log_gamma(bk)) / kPi;
  }
}

// Power series sum_{k>=0} (-1)^k x^k / Gamma(1+beta k).  Rejected (ok=false)
// when alternating cancellation would eat more than ~3 digits of the result,
// or when series_terms_max is insufficient; caller falls back to quadrature.
double MittagLeffler::series_value(double x, bool* ok) const {
  *ok = false;
  const double lx = std::log(x);
  KahanSum acc;
  acc.add(1.0);
  double sum_abs = 1.0;
  bool converged = false;
  for (int k = 1; k <= policy_.series_terms_max; ++k) {
    const double lt = k * lx - lg_pos_[k];
    if (lt > 700.0) return 0.0;  // hopeless blow-up; reject outright
    const double term = ((k & 1) ? -1.0 : 1.0) * std::exp(lt);
    acc.add(term);
    sum_abs += std::fabs(term);
    if (k > 2 && std::fabs(term) < 1e-17 * std::max(std::fabs(acc.get()), 1e-300)) {
      converged = true;
      break;
    }
  }
  const double v = acc.get();
  // terms carry ~1e-15 relative noise each; demand a bounded condition number
  *ok = converged && v > 0.0 && sum_abs <= 3e3 * v;
  return v;
}

double MittagLeffler::series_deriv(double y, bool* ok) const {
  *ok = false;
  const double ly = std::log(y);
  KahanSum acc;
  double sum_abs = 0.0;
  bool converged = false;
  for (int k = 1; k <= policy_.series_terms_max; ++k) {
    const double lt = std::log(static_cast<double>(k)) + k * ly - lg_pos_[k];
    if (lt > 700.0) return 0.0;
    const double term = ((k & 1) ? -1.0 : 1.0) * std::exp(lt);
    acc.add(term);
    sum_abs += std::fabs(term);
    if (k > 2 && std::fabs(term) < 1e-17 * std::max(std::fabs(acc.get()), 1e-300)) {
      converged = true;
      break;
    }
  }
  const double v = acc.get();
  *ok = converged && v < 0.0 && sum_abs <= 3e3 * std::fabs(v);
  return v;
}

// Algebraic tail expansion sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(1-beta k),
// truncated at the smallest term.
double MittagLeffler::asymptotic_value(double x, bool* ok) const {
  *ok = false;
  const double invx = 1.0 / x;
  double xp = invx;
  KahanSum acc;
  double prev = std::numeric_limits<double>::infinity();
  double smallest = prev;
  for (size_t k = 1; k < recip_neg_.size(); ++k, xp *= invx) {
    if (recip_neg_[k] == 0.0) continue;  // reflection zero at integer beta*k
    const double term = ((k & 1) ? 1.0 : -1.0) * recip_neg_[k] * xp;
    const double mag = std::fabs(term);
    if (mag > prev) break;  // divergence onset
    acc.add(term);
    prev = mag;
    smallest = mag;
    if (mag < 1e-17 * std::fabs(acc.get())) break;  // already negligible
  }
  const double v = acc.get();
  *ok = v > 0.0 && smallest <= 1e-13 * v;
  return v;
}

double MittagLeffler::asymptotic_deriv(double y, bool* ok) const {
  *ok = false;
  const double invy = 1.0 / y;
  double yp = invy;
  KahanSum acc;
  double prev = std::numeric_limits<double>::infinity();
  double smallest = prev;
  for (size_t k = 1; k < recip_neg_.size(); ++k, yp *= invy) {
    if (recip_neg_[k] == 0.0) continue;
    const double term = ((k & 1) ? -1.0 : 1.0) * k * recip_neg_[k] * yp;
    const double mag = std::fabs(term);
    if (mag > prev) break;
    acc.add(term);
    prev = mag;
    smallest = mag;
    if (mag < 1e-17 * std::fabs(acc.get())) break;
  }
  const double v = acc.get();
  *ok = v < 0.0 && smallest <= 1e-13 * std::fabs(v);
  return v;
}

// Bromwich contour collapsed onto the negative real axis (branch cut of
// s^beta) and rewritten in the variable w = (x * r^beta):
//   E_beta(-x) = sin(beta pi)/(pi beta) *
//                Integral_0^inf  x e^{-w^{1/beta}} /
//                                (w^2 + 2 w x cos(beta pi) + x^2) dw.
// For beta > 1/2 the integrand has a Lorentzian ridge of width ~x sin(beta pi)
// centred at w = x |cos(beta pi)|; it is seeded with breakpoints.
double MittagLeffler::branch_cut_value(double x) const {
  const double v_end = std::pow(745.0, beta_);
  std::vector<double> bps{0.1 * v_end, 0.5 * v_end};
  if (cos_bpi_ < 0.0) {
    const double w0 = -x * cos_bpi_;
    const double hw = x * sin_bpi_;
    for (double m : {-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0})
      bps.push_back(w0 + m * hw);
  }
  auto f = [&](double w) {
    const double denom = w * w + 2.0 * w * x * cos_bpi_ + x * x;
    return std::exp(-std::pow(w, 1.0 / beta_)) / denom;
  };
  const double integral = integrate_or_throw(
      f, 0.0, v_end, policy_.quadrature_abs_tol, policy_.quadrature_rel_tol,
      bps, 4000, "ml_neg branch-cut");
  return sin_bpi_ / (kPi * beta_) * x * integral;
}

double MittagLeffler::branch_cut_deriv(double y) const {
  const double v_end = std::pow(745.0, beta_);
  std::vector<double> bps{0.1 * v_end, 0.5 * v_end, y};
  if (cos_bpi_ < 0.0) {
    const double w0 = -y * cos_bpi_;
    const double hw = y * sin_bpi_;
    for (double m : {-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0})
      bps.push_back(w0 + m * hw);
  }
  auto f = [&](double w) {
    const double denom = w * w + 2.0 * w * y * cos_bpi_ + y * y;
    return std::exp(-std::pow(w, 1.0 / beta_)) * (w * w - y * y) /
           (denom * denom);
  };
  const double integral = integrate_or_throw(
      f, 0.0, v_end, policy_.quadrature_abs_tol, policy_.quadrature_rel_tol,
      bps, 4000, "ml_dt branch-cut");
  return sin_bpi_ / (kPi * beta_) * integral;
}

double MittagLeffler::value(double x) const {
  if (!(x >= 0.0))
    throw std::domain_error("MittagLeffler::value: requires x >= 0, got " +
                            std::to_string(x));
  if (x == 0.0) return 1.0;
  if (beta_ == 1.0) return std::exp(-x);
  bool ok = false;
  if (x <= policy_.series_cutoff) {
    const double v = series_value(x, &ok);
    if (ok) return v;
  }
  if (x >= policy_.asymptotic_cutoff) {
    const double v = asymptotic_value(x, &ok);
    if (ok) return v;
  }
  return branch_cut_value(x);
}

double MittagLeffler::deriv_t(double lam, double t) const {
  if (!(t > 0.0))
    throw std::domain_error("MittagLeffler::deriv_t: requires t > 0, got " +
                            std::to_string(t));
  if (!(lam >= 0.0))
    throw std::domain_error("MittagLeffler::deriv_t: requires lam >= 0, got " +
                            std::to_string(lam));
  if (lam == 0.0) return 0.0;
  if (beta_ == 1.0) return -lam * std::exp(-lam * t);
  const double y = lam * std::pow(t, beta_);
  bool ok = false;
  if (y <= policy_.series_cutoff) {
    const double s = series_deriv(y, &ok);
    if (ok) return beta_ / t * s;
  }
  if (y >= policy_.asymptotic_cutoff) {
    const double s = asymptotic_deriv(y, &ok);
    if (ok) return beta_ / t * s;
  }
  return branch_cut_deriv(y) * beta_ * y / t;
}

double ml_neg(double beta, double x, const EvalPolicy& policy) {
  return MittagLeffler(beta, policy).value(x);
}

double ml_dt(double beta, double lam, double t, const EvalPolicy& policy) {
  return MittagLeffler(beta, policy).deriv_t(lam, t);
}

// Kanter's representation for the density of the standard one-sided stable
// law with Laplace transform exp(-s^beta):
//   g_beta(u) = beta/(1-beta) * u^{-1/(1-beta)} * (1/pi) *
//               Integral_0^pi  a(phi) exp(-u^{-beta/(1-beta)} a(phi)) dphi,
//   a(phi) = [sin(beta phi)/sin(phi)]^{1/(1-beta)}
//            * sin((1-beta) phi)/sin(beta phi),
// with a increasing from a(0)=beta^{beta/(1-beta)}(1-beta) to infinity.
double stable_density(double beta, double u, const EvalPolicy& policy) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::domain_error("stable_density: beta must lie in (0,1), got " +
                            std::to_string(beta));
  if (!(u > 0.0))
    throw std::domain_error("stable_density: requires u > 0, got " +
                            std::to_string(u));
  policy.validate();
  // Large arguments: the power series in u^{-beta} converges absolutely and
  // beats the contour integral once the term ratio is small.  The stopping
  // rule tracks the sin-free envelope since sin(pi beta k) hits exact zeros
  // at rational beta.
  if (gamma_fn(1.0 + beta) * std::pow(u, -beta) <= 0.3) {
    KahanSum acc;
    const double lu = std::log(u);
    for (int k = 1; k <= 400; ++k) {
      const double env = std::exp(log_gamma(beta * k + 1.0) -
                                  log_gamma(k + 1.0) - (beta * k + 1.0) * lu) /
                         kPi;
      acc.add(((k & 1) ? 1.0 : -1.0) * std::sin(kPi * beta * k) * env);
      if (env < 1e-17 * std::max(std::fabs(acc.get()), 1e-300)) break;
    }
    return acc.get();
  }
  const double b1 = 1.0 - beta;
  const double c = std::pow(u, -beta / b1);
  const double a0 = std::pow(beta, beta / b1) * b1;
  if (c * a0 > 800.0) return 0.0;  // deep left tail underflows

  auto a_of = [&](double phi) {
    const double sb = std::sin(beta * phi);
    const double s1 = std::sin(phi);
    const double sc = std::sin(b1 * phi);
    return std::pow(sb / s1, 1.0 / b1) * sc / sb;
  };
  auto integrand = [&](double phi) {
    if (phi <= 0.0) return a0;  // continuous limit, exponent vanishes at a0
    const double a = a_of(phi);
    const double e = c * (a - a0);
    if (!(e < 745.0)) return 0.0;
    return a * std::exp(-e);
  };
  // a is monotone: bracket the decades of the exponent with bisection
  auto phi_at_level = [&](double level) {
    double lo = 1e-12, hi = kPi - 1e-12;
    if (c * (a_of(lo) - a0) >= level) return lo;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double e = c * (a_of(mid) - a0);
      if (e < level)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double phi_hi = phi_at_level(745.0);
  std::vector<double> bps;
  for (double lvl : {0.03, 0.3, 1.0, 3.0, 10.0, 50.0, 200.0})
    bps.push_back(phi_at_level(lvl));
  const double integral = integrate_or_throw(
      integrand, 0.0, phi_hi, 1e-300,
      std::max(policy.quadrature_rel_tol, 1e-12), bps, 4000,
      "stable_density");
  return beta / b1 * std::pow(u, -1.0 / b1) / kPi * std::exp(-c * a0) *
         integral;
}

double inv_sub_density(double beta, double t, double s,
                       const EvalPolicy& policy) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::domain_error("inv_sub_density: beta must lie in (0,1), got " +
                            std::to_string(beta));
  if (!(t > 0.0))
    throw std::domain_error("inv_sub_density: requires t > 0, got " +
                            std::to_string(t));
  if (!(s >= 0.0))
    throw std::domain_error("inv_sub_density: requires s >= 0, got " +
                            std::to_string(s));
  const double w = (s > 0.0) ? t * std::pow(s, -1.0 / beta)
                             : std::numeric_limits<double>::infinity();
  if (!(w < 1e6)) {
    // small-s regime: convergent expansion obtained by integrating the
    // large-argument series of g_beta term by term;
    // leading term is t^{-beta}/Gamma(1-beta)
    KahanSum acc;
    double lt_s = (s > 0.0) ? std::log(s) : 0.0;
    for (int k = 1; k <= 80; ++k) {
      const double env =
          std::exp(log_gamma(beta * k + 1.0) - log_gamma(k + 1.0) -
                   beta * k * std::log(t) + (k - 1) * lt_s) /
          (beta * kPi);
      acc.add(((k & 1) ? 1.0 : -1.0) * std::sin(kPi * beta * k) * env);
      // envelope-based stop: sin zeros at integer beta*k must not end the sum
      if (s == 0.0 ||
          env < 1e-16 * std::max(std::fabs(acc.get()), 1e-300))
        break;
    }
    return acc.get();
  }
  return t / beta * std::pow(s, -1.0 - 1.0 / beta) *
         stable_density(beta, w, policy);
}

double laplace_ml(double beta, double lam, double theta) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::domain_error("laplace_ml: beta must lie in (0,1], got " +
                            std::to_string(beta));
  if (!(lam > 0.0))
    throw std::domain_error("laplace_ml: requires lam > 0, got " +
                            std::to_string(lam));
  if (!(theta > 0.0))
    throw std::domain_error("laplace_ml: requires theta > 0, got " +
                            std::to_string(theta));
  return std::pow(theta, beta - 1.0) / (std::pow(theta, beta) + lam);
}

}  // namespace fracheat
