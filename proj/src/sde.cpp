#include "fracheat/sde.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fracheat {

namespace {
constexpr double kBlowupGuard = 1e12;
}

void ModelSpec::validate() const {
  std::ostringstream bad;
  if (!(beta > 0.0 && beta <= 1.0)) bad << " [beta must lie in (0, 1]]";
  if (!(lambda_level >= 0.0) || !std::isfinite(lambda_level))
    bad << " [lambda_level must be >= 0]";
  if (!(kernel_tol > 0.0)) bad << " [kernel_tol must be positive]";
  std::string msg = bad.str();
  if (!msg.empty()) throw std::invalid_argument("invalid model:" + msg);
  domain.validate();
  sigma.validate();
  u0.validate(domain.length);
}

Simulator::Simulator(ModelSpec model, GridSpec grid, const EvalPolicy& policy)
    : model_(std::move(model)), grid_(grid), basis_(model_.domain) {
  model_.validate();
  grid_.validate();

  const long M = grid_.n_steps();
  const long J = grid_.n_cells_J;
  const double L = model_.domain.length;

  nodes_.resize(static_cast<std::size_t>(J + 1));
  for (long i = 0; i <= J; ++i)
    nodes_[static_cast<std::size_t>(i)] =
        static_cast<double>(i) * L / static_cast<double>(J);

  if (model_.lambda_level > 0.0)
    table_ = std::make_unique<KernelTable>(
        basis_, KernelKind::fractional, model_.beta, grid_.dt,
        static_cast<int>(M), static_cast<int>(J), model_.kernel_tol, policy);

  det_.assign(static_cast<std::size_t>((M + 1) * (J + 1)), 0.0);
  // row 0: the initial condition itself, boundary pinned to zero
  for (long i = 1; i < J; ++i)
    det_[static_cast<std::size_t>(i)] =
        model_.u0.value(nodes_[static_cast<std::size_t>(i)], L);
  if (!model_.u0.is_zero()) {
    for (long m = 1; m <= M; ++m) {
      auto row = deterministic_profile(basis_, KernelKind::fractional,
                                       model_.beta, model_.u0,
                                       static_cast<double>(m) * grid_.dt,
                                       nodes_, model_.kernel_tol, policy);
      double* dst = det_.data() + static_cast<std::size_t>(m * (J + 1));
      for (long i = 1; i < J; ++i) dst[i] = row[static_cast<std::size_t>(i)];
    }
  }
}

SolutionPath Simulator::run(const NoiseArray& noise) const {
  const long M = grid_.n_steps();
  const long J = grid_.n_cells_J;
  if (noise.n_steps != M || noise.n_cells != J)
    throw std::invalid_argument(
        "noise array shape does not match the simulation grid");

  SolutionPath path;
  path.n_steps = M;
  path.n_nodes = J + 1;
  path.model = model_;
  path.grid = grid_;
  path.seed = noise.seed;
  path.stream_id = noise.stream_id;
  path.values.assign(static_cast<std::size_t>((M + 1) * (J + 1)), 0.0);

  double* u = path.values.data();
  const double* det = det_.data();
  for (long i = 0; i <= J; ++i) u[i] = det[i];

  const double lam = model_.lambda_level;
  if (lam == 0.0) {
    for (long m = 1; m <= M; ++m)
      for (long i = 0; i <= J; ++i)
        u[m * (J + 1) + i] = det[m * (J + 1) + i];
    return path;
  }

  // sigma at cell midpoints of the current row, pre-multiplied by the noise
  // increment: S[j][k] = sigma((u_{j,k} + u_{j,k+1}) / 2) * xi_{j,k}
  std::vector<double> S(static_cast<std::size_t>(M * J), 0.0);
  auto fill_row = [&](long j) {
    const double* uj = u + j * (J + 1);
    double* Sj = S.data() + j * J;
    for (long k = 0; k < J; ++k)
      Sj[k] = model_.sigma.eval(0.5 * (uj[k] + uj[k + 1])) * noise.at(j, k);
  };
  fill_row(0);

  std::vector<double> acc(static_cast<std::size_t>(J + 1));
  for (long m = 1; m <= M; ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (long j = 0; j < m; ++j) {
      const double* B = table_->level(static_cast<int>(m - j));
      const double* Sj = S.data() + j * J;
      for (long i = 1; i < J; ++i) {
        const double* Bi = B + i * J;
        double dot = 0.0;
        for (long k = 0; k < J; ++k) dot += Bi[k] * Sj[k];
        acc[static_cast<std::size_t>(i)] += dot;
      }
    }
    double* um = u + m * (J + 1);
    const double* dm = det + m * (J + 1);
    um[0] = 0.0;
    um[J] = 0.0;
    for (long i = 1; i < J; ++i) {
      double v = dm[i] + lam * acc[static_cast<std::size_t>(i)];
      if (!std::isfinite(v) || std::fabs(v) > kBlowupGuard) {
        path.aborted = true;
        path.abort_step = m;
        path.abort_node = i;
        return path;
      }
      um[i] = v;
    }
    if (m < M) fill_row(m);
  }
  return path;
}

SolutionPath simulate(const ModelSpec& model, const GridSpec& grid,
                      const NoiseArray& noise) {
  return Simulator(model, grid).run(noise);
}

std::vector<double> project_mode1(const SolutionPath& path) {
  const long M = path.n_steps;
  const long J = path.n_nodes - 1;
  const double L = path.model.domain.length;
  SpectralBasis basis(path.model.domain);
  const double dx = L / static_cast<double>(J);
  std::vector<double> phi(static_cast<std::size_t>(J + 1));
  for (long i = 0; i <= J; ++i)
    phi[static_cast<std::size_t>(i)] =
        basis.phi(1, static_cast<double>(i) * dx);
  std::vector<double> out(static_cast<std::size_t>(M + 1), 0.0);
  for (long m = 0; m <= M; ++m) {
    const double* um = path.values.data() + m * (J + 1);
    double acc = 0.5 * (um[0] * phi[0] + um[J] * phi[static_cast<std::size_t>(J)]);
    for (long i = 1; i < J; ++i) acc += um[i] * phi[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(m)] = acc * dx;
  }
  return out;
}

}  // namespace fracheat
