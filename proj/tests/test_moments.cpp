#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fracheat/moments.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/special.hpp"

using namespace fracheat;

namespace {

const double kPi = 3.141592653589793;

ModelSpec mode1_model(double beta, double lam, double amp = 1.0) {
  ModelSpec m;
  m.beta = beta;
  m.lambda_level = lam;
  m.domain.length = kPi;
  m.domain.n_modes = 20000000;
  m.sigma = SigmaSpec::linear_sigma(1.0);
  m.u0.kind = InitialCondition::Kind::mode;
  m.u0.amplitude = amp;
  return m;
}

MomentSeries synthetic_series(const std::vector<double>& times,
                              const std::vector<double>& sup,
                              const std::vector<double>& mode1) {
  MomentSeries s;
  s.times = times;
  s.sup_x_second_moment = sup;
  s.sup_x_se.assign(times.size(), 0.0);
  s.mode1_second_moment = mode1;
  s.mode1_se.assign(times.size(), 0.0);
  s.replicas_used = 2;
  return s;
}

}  // namespace

TEST_CASE("growth fit recovers synthetic rates") {
  std::vector<double> times, grow, decay, flat, poly;
  for (int i = 0; i <= 40; ++i) {
    double t = 0.5 * i;
    times.push_back(t);
    grow.push_back(std::exp(0.3 * t));
    decay.push_back(std::exp(-0.2 * t));
    flat.push_back(2.5);
  }
  auto s = synthetic_series(times, grow, decay);
  GrowthFit up = growth_fit(s, MomentKind::sup_x, 0.0, 20.0);
  CHECK(std::fabs(up.slope - 0.3) < 1e-9);
  CHECK(up.ci_halfwidth < 1e-9);
  CHECK(up.points == 41);
  CHECK(up.t_lo == 0.0);
  CHECK(up.t_hi == 20.0);
  GrowthFit down = growth_fit(s, MomentKind::mode1, 0.0, 20.0);
  CHECK(std::fabs(down.slope + 0.2) < 1e-9);

  auto s2 = synthetic_series(times, flat, flat);
  GrowthFit zero = growth_fit(s2, MomentKind::sup_x, 5.0, 15.0);
  CHECK(std::fabs(zero.slope) < 1e-9);
  CHECK(zero.ci_halfwidth < 1e-9);

  // polynomial decay t^{-0.8} has log-derivative -0.8/t: shallow slopes that
  // flatten as the window moves right, nothing like an exponential signature
  std::vector<double> ptimes;
  for (int i = 10; i <= 100; ++i) {
    ptimes.push_back(static_cast<double>(i));
    poly.push_back(std::pow(static_cast<double>(i), -0.8));
  }
  auto s3 = synthetic_series(ptimes, poly, poly);
  GrowthFit wide = growth_fit(s3, MomentKind::sup_x, 10.0, 100.0);
  GrowthFit late = growth_fit(s3, MomentKind::sup_x, 50.0, 100.0);
  CHECK(wide.slope < 0.0);
  CHECK(wide.slope > -0.08);
  CHECK(late.slope < 0.0);
  CHECK(std::fabs(late.slope) < std::fabs(wide.slope));

  CHECK_THROWS_AS(growth_fit(s, MomentKind::sup_x, 0.0, 1.5),
                  std::invalid_argument);  // 4 points only
  CHECK_THROWS_AS(growth_fit(s, MomentKind::sup_x, 3.0, 3.0),
                  std::invalid_argument);
  auto bad = s;
  bad.sup_x_second_moment[10] = 0.0;
  CHECK_THROWS_AS(growth_fit(bad, MomentKind::sup_x, 0.0, 20.0),
                  std::invalid_argument);
}

TEST_CASE("laplace diagnostic of the squared relaxation") {
  // exponential case integrates in closed form
  CHECK(lambda_profile(1.0, 1.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(lambda_profile(1.0, 2.2, 0.37) ==
        doctest::Approx(1.0 / (0.37 + 4.4)).epsilon(1e-8));

  // slow-relaxation regime: the profile keeps climbing as theta drops
  double prev = 0.0;
  for (int k = 1; k <= 6; ++k) {
    double cur = lambda_profile(0.5, 1.0, std::pow(10.0, -k));
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(prev / lambda_profile(0.5, 1.0, 1e-1) > 3.0);

  // fast-relaxation regime: the theta -> 0 limit exists
  double a5 = lambda_profile(0.75, 1.0, 1e-5);
  double a6 = lambda_profile(0.75, 1.0, 1e-6);
  CHECK(std::fabs(a6 / a5 - 1.0) < 0.01);

  // independent route: composite fixed-order panels on the same decades
  {
    const double beta = 0.6, theta = 0.5;
    MittagLeffler ml(beta);
    auto f = [&](double t) {
      double e = ml.value(std::pow(t, beta));
      return std::exp(-theta * t) * e * e;
    };
    double ref = 0.0, lo = 0.0;
    for (double hi = 1e-4; lo < 180.0; hi *= 4.0) {
      ref += gauss_legendre(f, lo, std::min(hi, 200.0), 24);
      lo = std::min(hi, 200.0);
    }
    CHECK(lambda_profile(beta, 1.0, theta) ==
          doctest::Approx(ref).epsilon(1e-9));
  }

  CHECK_THROWS_AS(lambda_profile(0.5, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_profile(0.5, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_profile(1.5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("ensemble moments of a noise-free model are exact and spread-free") {
  GridSpec grid{16, 0.1, 1.0};
  auto model = mode1_model(0.6, 0.0, 1.3);
  MomentSeries s = mc_moments(model, grid, 3, 12345);
  CHECK(s.replicas_used == 3);
  CHECK(s.aborted == 0);
  REQUIRE(s.times.size() == 11u);

  SpectralBasis basis(model.domain);
  for (long m = 0; m <= 10; ++m) {
    CHECK(s.times[m] == doctest::Approx(0.1 * m).epsilon(1e-15));
    CHECK(s.sup_x_se[m] == 0.0);
    CHECK(s.mode1_se[m] == 0.0);
    double coeff =
        m == 0 ? 1.3 : 1.3 * ml_neg(0.6, std::pow(0.1 * m, 0.6));
    // node 8 sits at the crest of the sine
    double sup_ref = 0.0;
    for (long i = 1; i < 16; ++i) {
      double v = coeff * basis.phi(1, kPi * i / 16.0);
      sup_ref = std::max(sup_ref, v * v);
    }
    CHECK(s.sup_x_second_moment[m] ==
          doctest::Approx(sup_ref).epsilon(1e-10));
    // discrete orthogonality makes the trapezoid projection exact
    CHECK(s.mode1_second_moment[m] ==
          doctest::Approx(coeff * coeff).epsilon(1e-12));
  }
  CHECK(s.sup_x_second_moment[0] ==
        doctest::Approx(1.3 * 1.3 * 2.0 / kPi).epsilon(1e-12));

  MomentSeries again = mc_moments(model, grid, 3, 12345);
  CHECK(s.sup_x_second_moment == again.sup_x_second_moment);
  CHECK(s.mode1_second_moment == again.mode1_second_moment);

  CHECK_THROWS_AS(mc_moments(model, grid, 1, 1), std::invalid_argument);
  auto explosive = mode1_model(0.5, 1e9);
  CHECK_THROWS_AS(mc_moments(explosive, grid, 2, 1), std::runtime_error);
}

TEST_CASE("driven ensemble dominates the squared relaxation floor") {
  GridSpec grid{16, 0.05, 1.0};
  auto model = mode1_model(0.6, 0.4);
  MomentSeries s = mc_moments(model, grid, 48, 4242);
  CHECK(s.replicas_used == 48);
  CHECK(s.aborted == 0);
  MittagLeffler ml(0.6);
  for (long m = 1; m <= 20; ++m) {
    double t = 0.05 * m;
    double floor_val = std::pow(ml.value(std::pow(t, 0.6)), 2);
    CHECK(s.mode1_second_moment[m] >=
          floor_val - 4.0 * s.mode1_se[m]);
    CHECK(s.mode1_se[m] > 0.0);
    CHECK(s.sup_x_se[m] > 0.0);
    // the peak of the mean square profile cannot drop below the mode-1 mass
    // it induces at the crest
    CHECK(s.sup_x_second_moment[m] > 0.0);
  }
}

TEST_CASE("common-noise beta sweep contracts towards the classical run") {
  GridSpec grid{16, 0.125, 1.0};
  auto tmpl = mode1_model(1.0, 0.5);
  auto rep = beta_convergence(tmpl, {0.8, 0.9, 0.99}, grid, 2, 32, 777);
  REQUIRE(rep.sup_moment_gap.size() == 3u);
  CHECK(rep.p == 2);
  CHECK(rep.common_seed == 777u);
  CHECK(rep.sup_moment_gap[0] > rep.sup_moment_gap[1]);
  CHECK(rep.sup_moment_gap[1] > rep.sup_moment_gap[2]);
  CHECK(rep.sup_moment_gap[2] < 0.1 * rep.sup_moment_gap[0]);

  // the beta = 1 entry runs the identical code path on identical noise
  auto same = beta_convergence(tmpl, {1.0}, grid, 2, 8, 777);
  CHECK(same.sup_moment_gap[0] == 0.0);

  // noise-free reduction: the gap is the worst squared distance between the
  // two relaxation profiles over the probe set, known in closed form
  auto quiet = mode1_model(1.0, 0.0);
  auto qrep = beta_convergence(quiet, {0.6}, grid, 2, 4, 1);
  SpectralBasis basis(quiet.domain);
  double want = 0.0;
  for (int q = 1; q <= 8; ++q) {
    double t = 0.125 * q;
    double d = ml_neg(0.6, std::pow(t, 0.6)) - std::exp(-t);
    for (long i = 0; i <= 16; ++i) {
      double g = d * basis.phi(1, kPi * i / 16.0);
      want = std::max(want, g * g);
    }
  }
  CHECK(qrep.sup_moment_gap[0] == doctest::Approx(want).epsilon(1e-8));

  // even moments scale exactly with dyadic data scalings under common noise
  auto small = mode1_model(1.0, 0.5, 1.0);
  auto big = mode1_model(1.0, 0.5, 2.0);
  auto r1 = beta_convergence(small, {0.8}, grid, 4, 8, 99);
  auto r2 = beta_convergence(big, {0.8}, grid, 4, 8, 99);
  CHECK(r2.sup_moment_gap[0] == 16.0 * r1.sup_moment_gap[0]);

  CHECK_THROWS_AS(beta_convergence(tmpl, {0.8}, grid, 3, 8, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(beta_convergence(tmpl, {}, grid, 2, 8, 1),
                  std::invalid_argument);
}

TEST_CASE("continuity exponents land in the open unit interval") {
  GridSpec grid{32, 0.05, 2.0};
  auto model = mode1_model(0.5, 0.5);
  ContinuityFit fit = continuity_modulus(model, grid, 64, 2, 991);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.a > 0.0);
  CHECK(fit.a < 1.0);
  CHECK(fit.b > 0.0);
  CHECK(fit.b < 1.0);
  CHECK(fit.K > 0.0);

  // linear noise on zero data keeps the field identically zero
  auto zero = mode1_model(0.5, 0.5, 0.0);
  ContinuityFit flat = continuity_modulus(zero, grid, 4, 2, 991);
  CHECK(flat.degenerate);
  CHECK(flat.K == 0.0);

  CHECK_THROWS_AS(continuity_modulus(model, grid, 64, 3, 1),
                  std::invalid_argument);
  GridSpec tiny{8, 0.05, 2.0};
  CHECK_THROWS_AS(continuity_modulus(model, tiny, 64, 2, 1),
                  std::invalid_argument);
}

TEST_CASE("bisection brackets the growth transition of the noise level") {
  GridSpec grid{16, 0.1, 6.0};
  auto model = mode1_model(0.75, 1.0);
  TransitionBracket br =
      bracket_growth_transition(model, grid, 0.05, 5.0, 32, 2718, 2);
  CHECK(br.slope_evaluations == 4);
  CHECK(br.lambda_lo >= 0.05);
  CHECK(br.lambda_hi <= 5.0);
  CHECK(br.lambda_lo < br.lambda_hi);
  // two geometric halvings shrink the ratio 100 bracket to 100^(1/4)
  CHECK(br.lambda_hi / br.lambda_lo < 3.17);

  CHECK_THROWS_AS(
      bracket_growth_transition(model, grid, 0.0, 5.0, 32, 1, 1),
      std::invalid_argument);
  // both endpoints quiet: no transition to bracket
  CHECK_THROWS_AS(
      bracket_growth_transition(model, grid, 0.05, 0.1, 32, 2718, 1),
      std::runtime_error);
}
