#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fracheat/config.hpp"
#include "fracheat/csv.hpp"
#include "fracheat/moments.hpp"
#include "fracheat/runner.hpp"
#include "fracheat/special.hpp"

using namespace fracheat;
namespace fs = std::filesystem;

namespace {

// small driven model; kernel_tol relaxed so the mode budget stays tiny
ExperimentConfig runner_config(const std::string& kind,
                               const std::string& extra,
                               const std::string& dir) {
  std::string text = R"([model]
beta = 0.6
lambda = 0.4
length = 3.141592653589793
n_modes = 400000
kernel_tol = 1e-4
sigma_c = 1
u0 = mode
u0_amplitude = 1.5

[grid]
n_cells = 8
dt = 0.25
t_final = 1

[mc]
replicas = 4
seed = 42

[experiment]
kind = )" + kind +
                     "\n" + extra + R"(
[output]
dir = )" + dir + "\n";
  return parse_config(text);
}

std::string fresh_dir(const std::string& name) {
  std::string dir = "/tmp/fracheat_runner_" + name;
  fs::remove_all(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      row.push_back(comma == std::string::npos
                        ? line.substr(pos)
                        : line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("manifests round-trip through json") {
  RunManifest m;
  m.config_digest = std::string(64, 'a');
  m.seed = 123456789012345ull;
  m.started_at = "2026-01-02T03:04:05Z";
  m.finished_at = "2026-01-02T03:04:06Z";
  m.outputs = {"ml_eval.csv"};
  m.aborted_replicas = 2;
  m.errors = {"stage failed: because"};

  RunManifest back = RunManifest::from_json(m.to_json());
  CHECK(back.config_digest == m.config_digest);
  CHECK(back.seed == m.seed);
  CHECK(back.started_at == m.started_at);
  CHECK(back.finished_at == m.finished_at);
  CHECK(back.tool_version == kToolVersion);
  CHECK(back.outputs == m.outputs);
  CHECK(back.aborted_replicas == m.aborted_replicas);
  CHECK(back.errors == m.errors);

  CHECK(m.to_json().back() == '\n');
  CHECK_THROWS_AS(RunManifest::from_json("{}"), std::exception);
  CHECK_THROWS_AS(RunManifest::from_json("not json"), std::exception);
}

TEST_CASE("identical configs reproduce byte-identical outputs") {
  std::string dir1 = fresh_dir("repeat1");
  std::string dir2 = fresh_dir("repeat2");
  ExperimentConfig c1 = runner_config("moment-scan", "", dir1);
  ExperimentConfig c2 = runner_config("moment-scan", "", dir2);

  RunResult r1 = run_experiment(c1);
  RunResult r2 = run_experiment(c2);
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(r1.manifest.outputs == std::vector<std::string>{"moment_scan.csv"});
  CHECK(r1.manifest.errors.empty());

  std::string csv1 = read_text_file(dir1 + "/moment_scan.csv");
  std::string csv2 = read_text_file(dir2 + "/moment_scan.csv");
  CHECK(csv1 == csv2);
  // output.dir differs, so the digests must differ; seed agrees
  CHECK(r1.manifest.config_digest != r2.manifest.config_digest);
  CHECK(r1.manifest.seed == 42);

  // the manifest on disk equals the returned one
  RunManifest disk =
      RunManifest::from_json(read_text_file(dir1 + "/manifest.json"));
  CHECK(disk.config_digest == r1.manifest.config_digest);
  CHECK(disk.outputs == r1.manifest.outputs);
  CHECK(disk.aborted_replicas == 0);
  CHECK(disk.errors.empty());
  CHECK(disk.config_digest == config_digest(c1));

  auto rows = read_csv(dir1 + "/moment_scan.csv");
  REQUIRE(rows.size() == 6);  // header + M+1 levels
  CHECK(rows[0] == std::vector<std::string>{"time", "sup_x_second_moment",
                                            "sup_x_se",
                                            "mode1_second_moment",
                                            "mode1_se"});
  // values equal a direct estimate bit for bit
  MomentSeries s = mc_moments(c1.model, c1.grid, c1.replicas, c1.seed,
                              c1.eval);
  CHECK(rows[3][1] == format_g17(s.sup_x_second_moment[2]));
  CHECK(rows[5][3] == format_g17(s.mode1_second_moment[4]));
}

TEST_CASE("ml-eval writes the tabulated relaxation function") {
  std::string dir = fresh_dir("ml_eval");
  ExperimentConfig cfg = runner_config(
      "ml-eval", "beta_list = 0.8\nx_min = 0.01\nx_max = 100\npoints = 9\n",
      dir);
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == 0);

  auto rows = read_csv(dir + "/ml_eval.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == std::vector<std::string>{"beta", "x", "value"});
  MittagLeffler ml(0.8, cfg.eval);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double x = std::stod(rows[i][1]);
    CHECK(rows[i][0] == format_g17(0.8));
    CHECK(rows[i][2] == format_g17(ml.value(x)));
  }
  CHECK(std::stod(rows[1][1]) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(std::stod(rows[9][1]) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("lambda-profile writes the laplace diagnostic table") {
  std::string dir = fresh_dir("lambda_profile");
  ExperimentConfig cfg = runner_config(
      "lambda-profile",
      "beta_list = 0.5,1\nlambda1 = 1\ntheta_list = 0.1,0.01\n", dir);
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.manifest.outputs ==
        std::vector<std::string>{"lambda_profile.csv"});

  auto rows = read_csv(dir + "/lambda_profile.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] ==
        std::vector<std::string>{"beta", "lambda1", "theta", "Lambda"});
  CHECK(rows[1][3] == format_g17(lambda_profile(0.5, 1.0, 0.1, cfg.eval)));
  CHECK(rows[4][3] == format_g17(lambda_profile(1.0, 1.0, 0.01, cfg.eval)));
}

TEST_CASE("simulate writes the full path and flags aborts") {
  std::string dir = fresh_dir("simulate");
  ExperimentConfig cfg = runner_config("simulate", "stream = 3\n", dir);
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == 0);

  auto rows = read_csv(dir + "/simulate.csv");
  REQUIRE(rows.size() == 1 + 5 * 9);  // header + (M+1)(J+1)
  CHECK(rows[0] == std::vector<std::string>{"time", "x", "value"});

  NoiseArray noise =
      sample_noise(cfg.grid, cfg.model.domain.length, cfg.seed, 3);
  SolutionPath path = simulate(cfg.model, cfg.grid, noise);
  // row 1 + m*(J+1) + i holds level m, node i
  CHECK(rows[1 + 2 * 9 + 4][2] == format_g17(path.at(2, 4)));
  CHECK(rows[1 + 4 * 9 + 8][2] == format_g17(path.at(4, 8)));

  // a blow-up surfaces through the exit code and the manifest
  std::string dir2 = fresh_dir("simulate_abort");
  ExperimentConfig bad = runner_config("simulate", "", dir2);
  bad.model.lambda_level = 1e9;
  RunResult rb = run_experiment(bad);
  CHECK(rb.exit_code == 1);
  CHECK(rb.manifest.aborted_replicas == 1);
  CHECK(rb.manifest.errors.empty());
  CHECK(fs::exists(dir2 + "/simulate.csv"));
}

TEST_CASE("beta-sweep and continuity write single-table summaries") {
  std::string dir = fresh_dir("beta_sweep");
  ExperimentConfig cfg =
      runner_config("beta-sweep", "beta_list = 0.8,1\np = 2\n", dir);
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == 0);
  auto rows = read_csv(dir + "/beta_sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"beta", "p", "gap"});
  CHECK(std::stod(rows[2][2]) == 0.0);  // beta = 1 runs the identical path

  std::string dir2 = fresh_dir("continuity");
  ExperimentConfig cc = runner_config("continuity", "p = 2\n", dir2);
  cc.grid.n_cells_J = 16;
  cc.grid.dt = 0.0625;
  RunResult rc = run_experiment(cc);
  CHECK(rc.exit_code == 0);
  auto crows = read_csv(dir2 + "/continuity.csv");
  REQUIRE(crows.size() == 2);
  CHECK(crows[0] == std::vector<std::string>{"beta", "lambda", "p", "a", "b",
                                             "K", "degenerate"});
  CHECK(crows[1][6] == "0");
}

TEST_CASE("invalid configs abort before any output exists") {
  std::string dir = fresh_dir("never_created");
  ExperimentConfig cfg = runner_config("moment-scan", "", dir);
  cfg.experiment_kind = "warp";
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  CHECK(!fs::exists(dir));

  cfg.experiment_kind = "";
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  CHECK(!fs::exists(dir));
}

TEST_CASE("stage failures land in the manifest instead of escaping") {
  std::string dir = fresh_dir("stage_error");
  ExperimentConfig cfg = runner_config("moment-scan", "", dir);
  cfg.model.lambda_level = 1e9;  // every replica trips the blow-up guard
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == 1);
  REQUIRE(r.manifest.errors.size() == 1);
  CHECK(r.manifest.errors[0].find("replicas finished") != std::string::npos);
  CHECK(r.manifest.outputs.empty());
  CHECK(!fs::exists(dir + "/moment_scan.csv"));
  RunManifest disk =
      RunManifest::from_json(read_text_file(dir + "/manifest.json"));
  CHECK(disk.errors == r.manifest.errors);
}
