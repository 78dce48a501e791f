#include "fracheat/runner.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "fracheat/csv.hpp"
#include "fracheat/moments.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/special.hpp"
#include "fracheat/spectral.hpp"

namespace fracheat {

namespace {

double param_real(const ExperimentConfig& cfg, const char* key) {
  return parse_double_list(cfg.experiment.at(key))[0];
}

long param_int(const ExperimentConfig& cfg, const char* key) {
  return std::lround(param_real(cfg, key));
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table run_ml_eval(const ExperimentConfig& cfg) {
  Table t;
  t.header = {"beta", "x", "value"};
  auto betas = parse_double_list(cfg.experiment.at("beta_list"));
  double x_min = param_real(cfg, "x_min");
  double x_max = param_real(cfg, "x_max");
  long points = param_int(cfg, "points");
  double ratio = std::pow(x_max / x_min,
                          1.0 / static_cast<double>(points - 1));
  for (double beta : betas) {
    MittagLeffler ml(beta, cfg.eval);
    double x = x_min;
    for (long i = 0; i < points; ++i, x *= ratio)
      t.rows.push_back({beta, x, ml.value(x)});
  }
  return t;
}

Table run_kernel(const ExperimentConfig& cfg) {
  Table out;
  out.header = {"t", "x", "y", "value"};
  double t = param_real(cfg, "t");
  long points = param_int(cfg, "points");
  SpectralBasis basis(cfg.model.domain);
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (long i = 0; i < points; ++i)
    xs[static_cast<std::size_t>(i)] = cfg.model.domain.length *
                                      static_cast<double>(i) /
                                      static_cast<double>(points - 1);
  auto grid = fractional_kernel_grid(basis, cfg.model.beta, t, xs, xs,
                                     cfg.model.kernel_tol, cfg.eval);
  for (long i = 0; i < points; ++i)
    for (long j = 0; j < points; ++j)
      out.rows.push_back({t, xs[static_cast<std::size_t>(i)],
                          xs[static_cast<std::size_t>(j)],
                          grid[static_cast<std::size_t>(i * points + j)]});
  return out;
}

Table run_simulate(const ExperimentConfig& cfg, long* aborted) {
  Table out;
  out.header = {"time", "x", "value"};
  Simulator sim(cfg.model, cfg.grid, cfg.eval);
  NoiseArray noise =
      sample_noise(cfg.grid, cfg.model.domain.length, cfg.seed,
                   param_int(cfg, "stream"));
  SolutionPath path = sim.run(noise);
  *aborted = path.aborted ? 1 : 0;
  const long J = cfg.grid.n_cells_J;
  for (long m = 0; m <= path.n_steps; ++m)
    for (long i = 0; i <= J; ++i)
      out.rows.push_back({cfg.grid.dt * static_cast<double>(m),
                          cfg.model.domain.length * static_cast<double>(i) /
                              static_cast<double>(J),
                          path.at(m, i)});
  return out;
}

Table run_moment_scan(const ExperimentConfig& cfg, long* aborted) {
  Table out;
  out.header = {"time", "sup_x_second_moment", "sup_x_se",
                "mode1_second_moment", "mode1_se"};
  MomentSeries s =
      mc_moments(cfg.model, cfg.grid, cfg.replicas, cfg.seed, cfg.eval);
  *aborted = s.aborted;
  for (std::size_t m = 0; m < s.times.size(); ++m)
    out.rows.push_back({s.times[m], s.sup_x_second_moment[m], s.sup_x_se[m],
                        s.mode1_second_moment[m], s.mode1_se[m]});
  return out;
}

Table run_lambda_profile(const ExperimentConfig& cfg) {
  Table out;
  out.header = {"beta", "lambda1", "theta", "Lambda"};
  auto betas = parse_double_list(cfg.experiment.at("beta_list"));
  auto thetas = parse_double_list(cfg.experiment.at("theta_list"));
  double lam1 = param_real(cfg, "lambda1");
  for (double beta : betas)
    for (double theta : thetas)
      out.rows.push_back(
          {beta, lam1, theta, lambda_profile(beta, lam1, theta, cfg.eval)});
  return out;
}

Table run_beta_sweep(const ExperimentConfig& cfg) {
  Table out;
  out.header = {"beta", "p", "gap"};
  auto betas = parse_double_list(cfg.experiment.at("beta_list"));
  int p = static_cast<int>(param_int(cfg, "p"));
  ConvergenceReport rep = beta_convergence(cfg.model, betas, cfg.grid, p,
                                           cfg.replicas, cfg.seed, cfg.eval);
  for (std::size_t i = 0; i < betas.size(); ++i)
    out.rows.push_back({betas[i], static_cast<double>(p),
                        rep.sup_moment_gap[i]});
  return out;
}

Table run_continuity(const ExperimentConfig& cfg) {
  Table out;
  out.header = {"beta", "lambda", "p", "a", "b", "K", "degenerate"};
  int p = static_cast<int>(param_int(cfg, "p"));
  ContinuityFit fit = continuity_modulus(cfg.model, cfg.grid, cfg.replicas,
                                         p, cfg.seed, cfg.eval);
  out.rows.push_back({cfg.model.beta, cfg.model.lambda_level,
                      static_cast<double>(p), fit.a, fit.b, fit.K,
                      fit.degenerate ? 1.0 : 0.0});
  return out;
}

std::string csv_name(const std::string& kind) {
  std::string name = kind;
  for (char& c : name)
    if (c == '-') c = '_';
  return name + ".csv";
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  validate_config(cfg);
  if (cfg.experiment_kind.empty())
    throw std::invalid_argument("experiment.kind required");
  {
    // re-canonicalize so defaults materialize exactly once
    cfg = parse_config(serialize_config(cfg));
  }

  RunResult result;
  result.manifest.config_digest = config_digest(cfg);
  result.manifest.seed = cfg.seed;
  result.manifest.started_at = utc_timestamp_now();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  long aborted = 0;
  try {
    Table table;
    const std::string& kind = cfg.experiment_kind;
    if (kind == "ml-eval")
      table = run_ml_eval(cfg);
    else if (kind == "kernel")
      table = run_kernel(cfg);
    else if (kind == "simulate")
      table = run_simulate(cfg, &aborted);
    else if (kind == "moment-scan")
      table = run_moment_scan(cfg, &aborted);
    else if (kind == "lambda-profile")
      table = run_lambda_profile(cfg);
    else if (kind == "beta-sweep")
      table = run_beta_sweep(cfg);
    else
      table = run_continuity(cfg);

    std::string name = csv_name(kind);
    write_text_file((fs::path(cfg.output_dir) / name).string(),
                    csv_table(table.header, table.rows));
    result.manifest.outputs.push_back(name);
  } catch (const std::exception& e) {
    result.manifest.errors.push_back(e.what());
  }

  result.manifest.aborted_replicas = aborted;
  result.manifest.finished_at = utc_timestamp_now();
  write_text_file((fs::path(cfg.output_dir) / "manifest.json").string(),
                  result.manifest.to_json());
  result.exit_code =
      (aborted > 0 || !result.manifest.errors.empty()) ? 1 : 0;
  return result;
}

}  // namespace fracheat
