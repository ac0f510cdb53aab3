// System configuration, discrete phase codebooks and the RIS phase-noise
// distortion constants consumed by every other module.
#ifndef RISBEAM_CONFIG_HPP
#define RISBEAM_CONFIG_HPP

#include "risbeam/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace risbeam {

// Codebook enumeration stays trivial below this; practical designs use 1-2 bits.
inline constexpr int kMaxQuantBits = 16;

/// All scalar system parameters. Power and noise variance are linear watts;
/// dBm conversion happens once at the CLI boundary. The CSI inaccuracies
/// sigma_d_sq / sigma_m_sq are relative to the per-entry channel gain; the
/// channel generator turns them into absolute error variances.
struct SystemConfig {
  int n_tx = 8;        // BS antennas
  int n_rx = 8;        // user antennas
  int n_streams = 8;   // data streams, <= min(n_tx, n_rx)
  int n_ris = 64;      // RIS reflecting elements
  int bits = 2;        // phase-shift quantization bits
  double power = dbm_to_watts(20.0);       // transmit power budget [W]
  double noise_var = dbm_to_watts(-100.0); // receiver noise variance [W]
  double beta_t = 0.08;       // transmitter distortion level, in [0,1]
  double beta_r = 0.08;       // receiver distortion level, in [0,1]
  double sigma_d_sq = 0.01;   // direct-channel estimation inaccuracy
  double sigma_m_sq = 0.01;   // per-compound-channel estimation inaccuracy
};

inline const SystemConfig& validate_config(const SystemConfig& cfg) {
  const auto fail = [](const std::string& what) { throw config_error(what); };
  if (cfg.n_tx < 1) fail("n_tx must be a positive integer");
  if (cfg.n_rx < 1) fail("n_rx must be a positive integer");
  if (cfg.n_ris < 1) fail("n_ris must be a positive integer");
  if (cfg.n_streams < 1) fail("n_streams must be a positive integer");
  if (cfg.n_streams > std::min(cfg.n_tx, cfg.n_rx)) {
    std::ostringstream os;
    os << "n_streams (" << cfg.n_streams << ") exceeds min(n_tx, n_rx) = "
       << std::min(cfg.n_tx, cfg.n_rx);
    fail(os.str());
  }
  if (cfg.bits < 1 || cfg.bits > kMaxQuantBits)
    fail("bits must lie in [1, " + std::to_string(kMaxQuantBits) + "]");
  if (!(cfg.power > 0.0)) fail("power must be strictly positive");
  if (!(cfg.noise_var > 0.0)) fail("noise_var must be strictly positive");
  if (cfg.beta_t < 0.0 || cfg.beta_t > 1.0) fail("beta_t must lie in [0,1]");
  if (cfg.beta_r < 0.0 || cfg.beta_r > 1.0) fail("beta_r must lie in [0,1]");
  if (cfg.sigma_d_sq < 0.0) fail("sigma_d_sq must be nonnegative");
  if (cfg.sigma_m_sq < 0.0) fail("sigma_m_sq must be nonnegative");
  return cfg;
}

/// The feasible set of a b-bit phase shifter: the 2^b-point uniform grid
/// -pi + k * 2pi/2^b on [-pi, pi), sorted ascending.
class PhaseCodebook {
 public:
  explicit PhaseCodebook(int bits) : bits_(bits) {
    if (bits < 1 || bits > kMaxQuantBits)
      throw config_error("codebook bits must lie in [1, " +
                         std::to_string(kMaxQuantBits) + "]");
    size_ = std::size_t{1} << bits;
    step_ = 2.0 * kPi / static_cast<double>(size_);
    phases_.resize(static_cast<Eigen::Index>(size_));
    for (std::size_t k = 0; k < size_; ++k)
      phases_(static_cast<Eigen::Index>(k)) = -kPi + static_cast<double>(k) * step_;
  }

  int bits() const { return bits_; }
  std::size_t size() const { return size_; }
  double step() const { return step_; }
  const RVec& phases() const { return phases_; }
  double phase(std::size_t k) const { return phases_(static_cast<Eigen::Index>(k)); }

  /// Index of the codebook phase with minimum circular distance to `angle`.
  /// Ties at the half-step boundary break toward the smaller phase value.
  std::size_t nearest_index(double angle) const {
    const double t = (wrap_angle(angle) + kPi) / step_;
    auto k = static_cast<long long>(std::ceil(t - 0.5));
    const auto n = static_cast<long long>(size_);
    k %= n;
    if (k < 0) k += n;
    return static_cast<std::size_t>(k);
  }

  double nearest(double angle) const { return phase(nearest_index(angle)); }

 private:
  int bits_;
  std::size_t size_;
  double step_;
  RVec phases_;
};

inline PhaseCodebook phase_codebook(int bits) { return PhaseCodebook(bits); }

/// Average phase distortion level eps_b and the companion shrinkage
/// omega_b = (2^b/pi) sin(pi/2^b); eps_b = 1 - omega_b^2.
struct DistortionConstants {
  double eps_b;
  double omega_b;
};

inline DistortionConstants distortion_constants(int bits) {
  if (bits < 1 || bits > kMaxQuantBits)
    throw config_error("distortion constants: bits must lie in [1, " +
                       std::to_string(kMaxQuantBits) + "]");
  const double n = std::pow(2.0, bits);
  const double omega = (n / kPi) * std::sin(kPi / n);
  return {1.0 - omega * omega, omega};
}

}  // namespace risbeam

#endif  // RISBEAM_CONFIG_HPP
