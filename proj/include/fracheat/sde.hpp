#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fracheat/noise.hpp"
#include "fracheat/special.hpp"
#include "fracheat/spectral.hpp"

namespace fracheat {

struct ModelSpec {
  double beta = 0.5;          // time-fractional order in (0, 1]
  double lambda_level = 1.0;  // noise level, >= 0
  DomainSpec domain;
  SigmaSpec sigma;
  InitialCondition u0;
  double kernel_tol = 1e-6;  // absolute truncation tolerance for kernels
  void validate() const;
};

struct SolutionPath {
  std::vector<double> values;  // (M+1) x (J+1), row-major over time levels
  long n_steps = 0;
  long n_nodes = 0;  // J + 1
  ModelSpec model;
  GridSpec grid;
  std::uint64_t seed = 0;
  long stream_id = 0;
  bool aborted = false;  // blow-up guard tripped (|u| > 1e12 or non-finite)
  long abort_step = -1;
  long abort_node = -1;

  double at(long m, long i) const {
    return values[static_cast<std::size_t>(m * n_nodes + i)];
  }
};

// Owns the per-(model, grid) precomputation — kernel lag table and the
// deterministic drift rows — and advances replicas against it.  The table is
// read-only after construction, so one Simulator serves any number of
// replicas.
class Simulator {
 public:
  Simulator(ModelSpec model, GridSpec grid, const EvalPolicy& policy = {});
  SolutionPath run(const NoiseArray& noise) const;
  const ModelSpec& model() const { return model_; }
  const GridSpec& grid() const { return grid_; }

 private:
  ModelSpec model_;
  GridSpec grid_;
  SpectralBasis basis_;
  std::unique_ptr<KernelTable> table_;  // absent when lambda_level == 0
  std::vector<double> det_;             // (M+1) x (J+1) deterministic part
  std::vector<double> nodes_;
};

/// Convenience wrapper: one-shot precompute + advance.
SolutionPath simulate(const ModelSpec& model, const GridSpec& grid,
                      const NoiseArray& noise);

// Trapezoidal <u_{t_m}, phi_1> for every time level.
std::vector<double> project_mode1(const SolutionPath& path);

}  // namespace fracheat
