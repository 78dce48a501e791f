#include "fracheat/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fracheat {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

void GridSpec::validate() const {
  std::ostringstream bad;
  if (n_cells_J < 2) bad << " [n_cells_J must be >= 2]";
  if (!(dt > 0.0) || !std::isfinite(dt)) bad << " [dt must be positive]";
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    bad << " [t_final must be positive]";
  if (dt > 0.0 && t_final > 0.0) {
    double steps = t_final / dt;
    double rounded = std::nearbyint(steps);
    if (rounded < 1.0 || std::fabs(steps - rounded) > 1e-9 * rounded)
      bad << " [t_final must be an integral number of steps]";
  }
  std::string msg = bad.str();
  if (!msg.empty()) throw std::invalid_argument("invalid grid:" + msg);
}

long GridSpec::n_steps() const {
  return static_cast<long>(std::llround(t_final / dt));
}

SigmaSpec SigmaSpec::linear_sigma(double c) {
  SigmaSpec s;
  s.kind = Kind::linear;
  s.c = c;
  s.lipschitz_upper = std::fabs(c);
  s.lipschitz_lower = std::fabs(c);
  return s;
}

void SigmaSpec::validate() const {
  std::ostringstream bad;
  if (!std::isfinite(c)) bad << " [coefficient must be finite]";
  if (!(lipschitz_lower >= 0.0) || !std::isfinite(lipschitz_lower))
    bad << " [lower slope bound must be >= 0]";
  if (!(lipschitz_upper >= lipschitz_lower))
    bad << " [slope bounds must satisfy lower <= upper]";
  if (kind == Kind::linear &&
      (lipschitz_upper != std::fabs(c) || lipschitz_lower != std::fabs(c)))
    bad << " [linear sigma has both slope bounds equal to |c|]";
  std::string msg = bad.str();
  if (!msg.empty())
    throw std::invalid_argument("invalid noise coefficient:" + msg);
}

std::uint64_t mix_seed(std::uint64_t seed, long stream_id) {
  std::uint64_t s =
      seed ^ (0x632BE59BD9B4E019ull * (static_cast<std::uint64_t>(stream_id) +
                                       0x9E3779B97F4A7C15ull));
  splitmix64(s);
  return splitmix64(s);
}

GaussianStream::GaussianStream(std::uint64_t seed, long stream_id)
    : eng_(mix_seed(seed, stream_id)) {}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // (0, 1] uniforms keep the log finite
  double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

NoiseArray sample_noise(const GridSpec& grid, double length,
                        std::uint64_t seed, long stream_id) {
  grid.validate();
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("invalid grid: [length must be positive]");
  NoiseArray out;
  out.n_steps = grid.n_steps();
  out.n_cells = grid.n_cells_J;
  out.seed = seed;
  out.stream_id = stream_id;
  double sd = std::sqrt(grid.dt * length / static_cast<double>(out.n_cells));
  out.increments.resize(static_cast<std::size_t>(out.n_steps * out.n_cells));
  GaussianStream g(seed, stream_id);
  for (double& v : out.increments) v = sd * g.next();
  return out;
}

}  // namespace fracheat
