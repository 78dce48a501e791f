#include "fracheat/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fracheat/quadrature.hpp"
#include "fracheat/special.hpp"

namespace fracheat {

namespace {

// Two-sided 95% Student quantile; exact table for dof <= 30, first-order
// Cornish-Fisher correction of the normal quantile beyond.
double t_quantile_975(long dof) {
  static const double table[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof <= 30) return table[dof - 1];
  const double z = 1.959963984540054;
  return z + (z * z * z + z) / (4.0 * static_cast<double>(dof));
}

double even_power(double d, int p) {
  // exact dyadic scaling matters downstream, so avoid std::pow
  double s = d * d;
  double out = s;
  for (int k = 2; k < p; k += 2) out *= s;
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  double sxx = 0.0;
  long n = 0;
};

LineFit least_squares(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  LineFit f;
  f.n = static_cast<long>(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (long i = 0; i < f.n; ++i) {
    xbar += xs[static_cast<std::size_t>(i)];
    ybar += ys[static_cast<std::size_t>(i)];
  }
  xbar /= static_cast<double>(f.n);
  ybar /= static_cast<double>(f.n);
  double sxy = 0.0;
  for (long i = 0; i < f.n; ++i) {
    double dx = xs[static_cast<std::size_t>(i)] - xbar;
    f.sxx += dx * dx;
    sxy += dx * (ys[static_cast<std::size_t>(i)] - ybar);
  }
  f.slope = sxy / f.sxx;
  f.intercept = ybar - f.slope * xbar;
  for (long i = 0; i < f.n; ++i) {
    double r = ys[static_cast<std::size_t>(i)] -
               (f.intercept + f.slope * xs[static_cast<std::size_t>(i)]);
    f.rss += r * r;
  }
  return f;
}

double jackknife_se(const std::vector<double>& leave_one_out) {
  const long n = static_cast<long>(leave_one_out.size());
  // a spread-free ensemble (deterministic model, t = 0 row) has SE exactly 0
  auto [lo, hi] = std::minmax_element(leave_one_out.begin(),
                                      leave_one_out.end());
  if (*lo == *hi) return 0.0;
  double bar = 0.0;
  for (double v : leave_one_out) bar += v;
  bar /= static_cast<double>(n);
  double s = 0.0;
  for (double v : leave_one_out) s += (v - bar) * (v - bar);
  return std::sqrt((static_cast<double>(n - 1) / static_cast<double>(n)) * s);
}

}  // namespace

MomentSeries mc_moments(const ModelSpec& model, const GridSpec& grid,
                        long replicas, std::uint64_t seed,
                        const EvalPolicy& policy) {
  if (replicas < 2)
    throw std::invalid_argument("mc_moments requires at least 2 replicas");
  Simulator sim(model, grid, policy);
  const long M = grid.n_steps();
  const long J = grid.n_cells_J;
  const long W = J - 1;  // interior nodes carry the sup

  MomentSeries out;
  out.times.resize(static_cast<std::size_t>(M + 1));
  for (long m = 0; m <= M; ++m)
    out.times[static_cast<std::size_t>(m)] = grid.dt * static_cast<double>(m);

  // per-replica squares, kept whole so the jackknife can rebuild every
  // leave-one-out mean (the sup does not commute with averaging)
  std::vector<std::vector<double>> sq;
  std::vector<std::vector<double>> q1;
  long aborted = 0;
  for (long r = 0; r < replicas; ++r) {
    NoiseArray noise = sample_noise(grid, model.domain.length, seed, r);
    SolutionPath path = sim.run(noise);
    if (path.aborted) {
      ++aborted;
      continue;
    }
    std::vector<double> s(static_cast<std::size_t>((M + 1) * W));
    for (long m = 0; m <= M; ++m)
      for (long i = 1; i < J; ++i) {
        double u = path.at(m, i);
        s[static_cast<std::size_t>(m * W + i - 1)] = u * u;
      }
    auto proj = project_mode1(path);
    std::vector<double> q(static_cast<std::size_t>(M + 1));
    for (long m = 0; m <= M; ++m)
      q[static_cast<std::size_t>(m)] = proj[static_cast<std::size_t>(m)] *
                                       proj[static_cast<std::size_t>(m)];
    sq.push_back(std::move(s));
    q1.push_back(std::move(q));
  }
  const long used = static_cast<long>(sq.size());
  if (used < 2) {
    std::ostringstream os;
    os << "mc_moments: only " << used << " of " << replicas
       << " replicas finished (" << aborted << " aborted)";
    throw std::runtime_error(os.str());
  }
  out.replicas_used = used;
  out.aborted = aborted;

  out.sup_x_second_moment.resize(static_cast<std::size_t>(M + 1));
  out.sup_x_se.resize(static_cast<std::size_t>(M + 1));
  out.mode1_second_moment.resize(static_cast<std::size_t>(M + 1));
  out.mode1_se.resize(static_cast<std::size_t>(M + 1));

  std::vector<double> colsum(static_cast<std::size_t>(W));
  std::vector<double> loo(static_cast<std::size_t>(used));
  for (long m = 0; m <= M; ++m) {
    std::fill(colsum.begin(), colsum.end(), 0.0);
    for (long r = 0; r < used; ++r) {
      const double* row = sq[static_cast<std::size_t>(r)].data() + m * W;
      for (long i = 0; i < W; ++i) colsum[static_cast<std::size_t>(i)] += row[i];
    }
    double sup = 0.0;
    for (long i = 0; i < W; ++i)
      sup = std::max(sup, colsum[static_cast<std::size_t>(i)] /
                              static_cast<double>(used));
    for (long r = 0; r < used; ++r) {
      const double* row = sq[static_cast<std::size_t>(r)].data() + m * W;
      double best = 0.0;
      for (long i = 0; i < W; ++i)
        best = std::max(best, (colsum[static_cast<std::size_t>(i)] - row[i]) /
                                  static_cast<double>(used - 1));
      loo[static_cast<std::size_t>(r)] = best;
    }
    out.sup_x_second_moment[static_cast<std::size_t>(m)] = sup;
    out.sup_x_se[static_cast<std::size_t>(m)] = jackknife_se(loo);

    double qsum = 0.0;
    for (long r = 0; r < used; ++r)
      qsum += q1[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
    for (long r = 0; r < used; ++r)
      loo[static_cast<std::size_t>(r)] =
          (qsum - q1[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)]) /
          static_cast<double>(used - 1);
    out.mode1_second_moment[static_cast<std::size_t>(m)] =
        qsum / static_cast<double>(used);
    out.mode1_se[static_cast<std::size_t>(m)] = jackknife_se(loo);
  }
  return out;
}

double lambda_profile(double beta, double lambda1, double theta,
                      const EvalPolicy& policy) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("lambda_profile: beta must lie in (0, 1]");
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("lambda_profile: lambda1 must be positive");
  if (!(theta > 0.0))
    throw std::invalid_argument("lambda_profile: theta must be positive");

  MittagLeffler ml(beta, policy);
  auto f = [&](double t) {
    if (t <= 0.0) return 1.0;
    double e = ml.value(lambda1 * std::pow(t, beta));
    return std::exp(-theta * t) * e * e;
  };

  // the relaxation turns over near s_star, the damping near 1/theta; a
  // decade ladder between the two scales seeds the adaptive refinement.
  // past t_end the integrand is below exp(-60) of its scale.
  const double s_star = std::pow(gamma_fn(1.0 + beta) / lambda1, 1.0 / beta);
  const double t_end = std::max(10.0 * s_star, 60.0 / theta);
  std::vector<double> ladder;
  for (double b = 1e-3 * std::min(s_star, 1.0 / theta); b < t_end; b *= 10.0)
    ladder.push_back(b);
  return integrate_or_throw(f, 0.0, t_end, 1e-14, 1e-10, ladder, 8000,
                            "lambda_profile");
}

GrowthFit growth_fit(const MomentSeries& series, MomentKind which,
                     double t_lo, double t_hi) {
  if (!(t_lo < t_hi))
    throw std::invalid_argument("growth_fit: window must satisfy t_lo < t_hi");
  const std::vector<double>& v = which == MomentKind::sup_x
                                     ? series.sup_x_second_moment
                                     : series.mode1_second_moment;
  if (v.size() != series.times.size())
    throw std::invalid_argument("growth_fit: series arrays disagree in size");

  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double t = series.times[i];
    if (t < t_lo || t > t_hi) continue;
    if (!(v[i] > 0.0)) {
      std::ostringstream os;
      os << "growth_fit: nonpositive estimate " << v[i] << " at t = " << t;
      throw std::invalid_argument(os.str());
    }
    ts.push_back(t);
    ys.push_back(std::log(v[i]));
  }
  if (ts.size() < 5) {
    std::ostringstream os;
    os << "growth_fit: window holds " << ts.size()
       << " points; need at least 5";
    throw std::invalid_argument(os.str());
  }

  LineFit f = least_squares(ts, ys);
  GrowthFit out;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.points = f.n;
  out.t_lo = ts.front();
  out.t_hi = ts.back();
  double resid_var = f.rss / static_cast<double>(f.n - 2);
  out.ci_halfwidth = t_quantile_975(f.n - 2) * std::sqrt(resid_var / f.sxx);
  return out;
}

ConvergenceReport beta_convergence(const ModelSpec& reference_model,
                                   const std::vector<double>& beta_values,
                                   const GridSpec& grid, int p, long replicas,
                                   std::uint64_t seed,
                                   const EvalPolicy& policy) {
  if (p < 2 || p % 2 != 0)
    throw std::invalid_argument("beta_convergence: p must be even and >= 2");
  if (replicas < 1)
    throw std::invalid_argument("beta_convergence: replicas must be >= 1");
  if (beta_values.empty())
    throw std::invalid_argument("beta_convergence: beta list is empty");

  const long M = grid.n_steps();
  const long J = grid.n_cells_J;
  const double L = reference_model.domain.length;

  // probe levels: 8 evenly spaced positive times up to the horizon
  std::vector<long> probe;
  for (int q = 1; q <= 8; ++q) {
    long m = std::max<long>(1, std::lround(static_cast<double>(M) * q / 8.0));
    if (probe.empty() || probe.back() != m) probe.push_back(m);
  }
  const long P = static_cast<long>(probe.size());

  ModelSpec ref = reference_model;
  ref.beta = 1.0;
  Simulator ref_sim(ref, grid, policy);
  std::vector<std::vector<double>> ref_vals(
      static_cast<std::size_t>(replicas));
  for (long r = 0; r < replicas; ++r) {
    NoiseArray noise = sample_noise(grid, L, seed, r);
    SolutionPath path = ref_sim.run(noise);
    if (path.aborted)
      throw std::runtime_error("beta_convergence: reference replica aborted");
    std::vector<double>& dst = ref_vals[static_cast<std::size_t>(r)];
    dst.resize(static_cast<std::size_t>(P * (J + 1)));
    for (long q = 0; q < P; ++q)
      for (long i = 0; i <= J; ++i)
        dst[static_cast<std::size_t>(q * (J + 1) + i)] =
            path.at(probe[static_cast<std::size_t>(q)], i);
  }

  ConvergenceReport rep;
  rep.beta_values = beta_values;
  rep.p = p;
  rep.common_seed = seed;
  rep.replicas_used = replicas;
  for (double beta : beta_values) {
    ModelSpec mb = reference_model;
    mb.beta = beta;
    Simulator sim(mb, grid, policy);
    std::vector<double> sum(static_cast<std::size_t>(P * (J + 1)), 0.0);
    for (long r = 0; r < replicas; ++r) {
      NoiseArray noise = sample_noise(grid, L, seed, r);
      SolutionPath path = sim.run(noise);
      if (path.aborted)
        throw std::runtime_error("beta_convergence: replica aborted");
      const std::vector<double>& rv = ref_vals[static_cast<std::size_t>(r)];
      for (long q = 0; q < P; ++q)
        for (long i = 0; i <= J; ++i) {
          double d = path.at(probe[static_cast<std::size_t>(q)], i) -
                     rv[static_cast<std::size_t>(q * (J + 1) + i)];
          sum[static_cast<std::size_t>(q * (J + 1) + i)] += even_power(d, p);
        }
    }
    double gap = 0.0;
    for (double s : sum) gap = std::max(gap, s / static_cast<double>(replicas));
    rep.sup_moment_gap.push_back(gap);
  }
  return rep;
}

ContinuityFit continuity_modulus(const ModelSpec& model, const GridSpec& grid,
                                 long replicas, int p, std::uint64_t seed,
                                 const EvalPolicy& policy) {
  if (p < 2 || p % 2 != 0)
    throw std::invalid_argument("continuity_modulus: p must be even and >= 2");
  if (replicas < 2)
    throw std::invalid_argument("continuity_modulus: replicas must be >= 2");
  const long M = grid.n_steps();
  const long J = grid.n_cells_J;
  if (J < 16 || M < 16)
    throw std::invalid_argument(
        "continuity_modulus: need at least 16 cells and 16 steps");
  const double L = model.domain.length;
  const double dx = L / static_cast<double>(J);

  std::vector<long> dlag, tlag;
  for (long d = 1; d <= J / 4; d *= 2) dlag.push_back(d);
  for (long l = 1; l <= M / 4; l *= 2) tlag.push_back(l);

  Simulator sim(model, grid, policy);
  std::vector<double> gs(dlag.size(), 0.0), gt(tlag.size(), 0.0);
  const long tnodes[3] = {J / 4, J / 2, 3 * J / 4};
  long used = 0;
  for (long r = 0; r < replicas; ++r) {
    NoiseArray noise = sample_noise(grid, L, seed, r);
    SolutionPath path = sim.run(noise);
    if (path.aborted) continue;
    ++used;
    for (std::size_t di = 0; di < dlag.size(); ++di) {
      long d = dlag[di];
      double acc = 0.0;
      for (long i = 0; i + d <= J; ++i)
        acc += even_power(path.at(M, i + d) - path.at(M, i), p);
      gs[di] += acc / static_cast<double>(J - d + 1);
    }
    for (std::size_t li = 0; li < tlag.size(); ++li) {
      long l = tlag[li];
      double acc = 0.0;
      long count = 0;
      for (long m = M / 2; m + l <= M; ++m)
        for (long node : tnodes) {
          acc += even_power(path.at(m + l, node) - path.at(m, node), p);
          ++count;
        }
      gt[li] += acc / static_cast<double>(count);
    }
  }
  if (used < 2)
    throw std::runtime_error("continuity_modulus: fewer than 2 usable replicas");
  for (double& v : gs) v /= static_cast<double>(used);
  for (double& v : gt) v /= static_cast<double>(used);

  ContinuityFit fit;
  for (double v : gs) fit.degenerate = fit.degenerate || !(v > 1e-280);
  for (double v : gt) fit.degenerate = fit.degenerate || !(v > 1e-280);
  if (fit.degenerate) return fit;

  std::vector<double> xs, ys;
  for (std::size_t di = 0; di < dlag.size(); ++di) {
    xs.push_back(std::log(static_cast<double>(dlag[di]) * dx));
    ys.push_back(std::log(gs[di]));
  }
  LineFit fs = least_squares(xs, ys);
  xs.clear();
  ys.clear();
  for (std::size_t li = 0; li < tlag.size(); ++li) {
    xs.push_back(std::log(static_cast<double>(tlag[li]) * grid.dt));
    ys.push_back(std::log(gt[li]));
  }
  LineFit ft = least_squares(xs, ys);

  fit.a = fs.slope / static_cast<double>(p);
  fit.b = ft.slope / static_cast<double>(p);
  // smallest K with estimate <= K * gap^{fitted slope} across the probes
  double k = 0.0;
  for (std::size_t di = 0; di < dlag.size(); ++di)
    k = std::max(k, gs[di] / std::pow(static_cast<double>(dlag[di]) * dx,
                                      fs.slope));
  for (std::size_t li = 0; li < tlag.size(); ++li)
    k = std::max(k, gt[li] / std::pow(static_cast<double>(tlag[li]) * grid.dt,
                                      ft.slope));
  fit.K = k;
  return fit;
}

TransitionBracket bracket_growth_transition(const ModelSpec& reference_model,
                                            const GridSpec& grid,
                                            double lambda_lo, double lambda_hi,
                                            long replicas, std::uint64_t seed,
                                            int bisection_steps,
                                            const EvalPolicy& policy) {
  if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo))
    throw std::invalid_argument(
        "bracket_growth_transition: need 0 < lambda_lo < lambda_hi");
  const double t_final = grid.t_final;
  auto grows = [&](double lam) {
    ModelSpec m = reference_model;
    m.lambda_level = lam;
    MomentSeries s = mc_moments(m, grid, replicas, seed, policy);
    GrowthFit f = growth_fit(s, MomentKind::sup_x, 0.5 * t_final, t_final);
    return f.slope - f.ci_halfwidth > 0.0;
  };

  TransitionBracket out;
  out.slope_evaluations = 2;
  bool lo_grows = grows(lambda_lo);
  bool hi_grows = grows(lambda_hi);
  if (lo_grows || !hi_grows)
    throw std::runtime_error(
        "bracket_growth_transition: endpoints do not straddle a transition");
  double lo = lambda_lo, hi = lambda_hi;
  for (int k = 0; k < bisection_steps; ++k) {
    double mid = std::sqrt(lo * hi);
    ++out.slope_evaluations;
    if (grows(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.lambda_lo = lo;
  out.lambda_hi = hi;
  return out;
}

}  // namespace fracheat
