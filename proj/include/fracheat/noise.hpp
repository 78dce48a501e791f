#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fracheat {

struct GridSpec {
  long n_cells_J = 16;
  double dt = 0.01;
  double t_final = 1.0;
  void validate() const;
  long n_steps() const;  // t_final / dt, which must be integral
};

struct SigmaSpec {
  enum class Kind { linear };
  Kind kind = Kind::linear;
  double c = 1.0;  // linear: sigma(u) = c u
  double lipschitz_upper = 1.0;
  double lipschitz_lower = 1.0;

  static SigmaSpec linear_sigma(double c);
  void validate() const;
  double eval(double u) const { return c * u; }
};

// Space-time white-noise increments on the M x J grid of time-space cells,
// each Normal(0, dt * dx); reproducible from (seed, stream_id).
struct NoiseArray {
  long n_steps = 0;
  long n_cells = 0;
  std::vector<double> increments;  // row-major, [m * n_cells + k]
  std::uint64_t seed = 0;
  long stream_id = 0;

  double at(long m, long k) const {
    return increments[static_cast<std::size_t>(m * n_cells + k)];
  }
};

NoiseArray sample_noise(const GridSpec& grid, double length,
                        std::uint64_t seed, long stream_id);

// Deterministic RNG plumbing, exposed so every consumer derives streams the
// same way: a splitmix64 scramble of (seed, stream) seeds one mt19937_64.
std::uint64_t mix_seed(std::uint64_t seed, long stream_id);

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, long stream_id);
  double next();  // standard normal via Box-Muller

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fracheat
