// Channel generation: log-distance path loss with shadowing, ULA/UPA array
// responses, Rayleigh direct and Rician compound channel estimates, pure-LoS
// rank-1 compounds, and sampling of true channels around an estimate under
// the statistical CSI-error and RIS phase-noise model.
#ifndef RISBEAM_CHANNEL_HPP
#define RISBEAM_CHANNEL_HPP

#include "risbeam/config.hpp"
#include "risbeam/rng.hpp"
#include "risbeam/types.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace risbeam {

/// Node positions and large-scale fading parameters.
struct Geometry {
  Vec3 bs_pos{0.0, 0.0, 5.0};
  Vec3 ris_pos{0.0, 85.0, 10.0};
  Vec3 user_pos{5.0, 120.0, 1.5};
  double pl0_db = 30.0;       // path loss at the 1 m reference distance
  double alpha_bu = 3.75;     // BS-user path-loss exponent
  double alpha_br = 2.2;      // BS-RIS path-loss exponent
  double alpha_ru = 2.2;      // RIS-user path-loss exponent
  double shadow_std_db = 3.0; // log-normal shadowing std deviation
};

/// LoS geometry of the BS-RIS-user hop: departure/arrival angles, complex
/// path gains and the UPA layout (m_x * m_y must equal the RIS size).
struct LoSAngles {
  double psi_tx = 0.0;  // AoD at the BS
  double psi_rx = 0.0;  // AoA at the user
  double psi_a = 0.0;   // azimuth AoA at the RIS
  double theta_a = 0.0; // elevation AoA at the RIS
  double psi_d = 0.0;   // azimuth AoD at the RIS
  double theta_d = 0.0; // elevation AoD at the RIS
  cplx nu_i{1.0, 0.0};  // LoS gain of the BS-RIS link
  cplx nu_r{1.0, 0.0};  // LoS gain of the RIS-user link
  double spacing_ratio = 0.5;  // antenna spacing over wavelength
  int m_x = 1;
  int m_y = 1;
};

/// Estimated channels plus the absolute per-entry CSI-error variances.
struct ChannelEstimate {
  CMat h_d_bar;              // estimated direct channel, N_R x N_T
  std::vector<CMat> g_bars;  // estimated compound channels, one per element
  double sigma_d_sq = 0.0;   // per-entry error variance of h_d_bar
  double sigma_m_sq = 0.0;   // per-entry error variance of each g_bar

  int n_ris() const { return static_cast<int>(g_bars.size()); }
  Eigen::Index n_rx() const { return h_d_bar.rows(); }
  Eigen::Index n_tx() const { return h_d_bar.cols(); }
  double sigma_m_total() const { return sigma_m_sq * static_cast<double>(g_bars.size()); }
};

/// One realization of the true channels and RIS phase noise.
struct TrueChannelSample {
  CMat h_d;
  std::vector<CMat> g_list;
  RVec phase_noise;  // per-element distortion, each in [-pi/2^b, pi/2^b]
};

inline double path_loss_db(double distance_m, double exponent,
                           double shadow_std_db, Rng& rng, double pl0_db = 30.0) {
  if (distance_m < 1.0)
    throw config_error("path_loss_db: distance below the 1 m reference");
  double pl = pl0_db + 10.0 * exponent * std::log10(distance_m);
  if (shadow_std_db > 0.0) pl += shadow_std_db * rng.normal();
  return pl;
}

/// ULA response, element k = exp(j 2 pi s k sin(psi)) / sqrt(n).
inline CVec ula_steering(int n, double psi, double spacing_ratio) {
  if (n < 1) throw config_error("ula_steering: n must be positive");
  CVec a(n);
  const double w = 2.0 * kPi * spacing_ratio * std::sin(psi);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) a(k) = scale * std::polar(1.0, w * k);
  return a;
}

/// UPA response flattened row-major (index p*m_y + q), element
/// exp(j 2 pi s [p sin(psi) sin(theta) + q sin(theta)]) / sqrt(m_x m_y).
inline CVec upa_steering(double psi, double theta, int m_x, int m_y,
                         double spacing_ratio) {
  if (m_x < 1 || m_y < 1) throw config_error("upa_steering: dims must be positive");
  const int m = m_x * m_y;
  CVec a(m);
  const double wx = 2.0 * kPi * spacing_ratio * std::sin(psi) * std::sin(theta);
  const double wy = 2.0 * kPi * spacing_ratio * std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int p = 0; p < m_x; ++p)
    for (int q = 0; q < m_y; ++q)
      a(p * m_y + q) = scale * std::polar(1.0, wx * p + wy * q);
  return a;
}

/// Near-square factorization of the RIS size into UPA rows/columns.
inline std::pair<int, int> upa_dims(int m) {
  int mx = static_cast<int>(std::floor(std::sqrt(static_cast<double>(m))));
  while (mx > 1 && m % mx != 0) --mx;
  return {mx, m / mx};
}

inline LoSAngles random_los_angles(int n_ris, Rng& rng, double spacing_ratio = 0.5) {
  LoSAngles a;
  a.psi_tx = rng.uniform(-kPi / 2, kPi / 2);
  a.psi_rx = rng.uniform(-kPi / 2, kPi / 2);
  a.psi_a = rng.uniform(-kPi / 2, kPi / 2);
  a.psi_d = rng.uniform(-kPi / 2, kPi / 2);
  a.theta_a = rng.uniform(0.0, kPi / 2);
  a.theta_d = rng.uniform(0.0, kPi / 2);
  a.nu_i = std::polar(1.0, rng.uniform(-kPi, kPi));
  a.nu_r = std::polar(1.0, rng.uniform(-kPi, kPi));
  a.spacing_ratio = spacing_ratio;
  std::tie(a.m_x, a.m_y) = upa_dims(n_ris);
  return a;
}

/// Per-element LoS compound gains nu_m = nu_r nu_i^* [a_RD]_m^* [a_RA]_m.
inline CVec nu_coefficients(const LoSAngles& ang) {
  const CVec a_ra = upa_steering(ang.psi_a, ang.theta_a, ang.m_x, ang.m_y,
                                 ang.spacing_ratio);
  const CVec a_rd = upa_steering(ang.psi_d, ang.theta_d, ang.m_x, ang.m_y,
                                 ang.spacing_ratio);
  const int m = ang.m_x * ang.m_y;
  CVec nu(m);
  const cplx lead = ang.nu_r * std::conj(ang.nu_i);
  for (int i = 0; i < m; ++i) nu(i) = lead * std::conj(a_rd(i)) * a_ra(i);
  return nu;
}

namespace detail {

inline double link_distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Linear per-entry power gain of one hop, shadowing sampled from rng.
inline double sample_link_gain(double distance_m, double exponent,
                               const Geometry& geom, Rng& rng) {
  const double pl =
      path_loss_db(distance_m, exponent, geom.shadow_std_db, rng, geom.pl0_db);
  return db_to_linear(-pl);
}

inline std::vector<CMat> rician_compounds(const SystemConfig& cfg,
                                          const LoSAngles& ang,
                                          double entry_var, double rician_k,
                                          Rng& rng) {
  const CVec a_tx = ula_steering(cfg.n_tx, ang.psi_tx, ang.spacing_ratio);
  const CVec a_rx = ula_steering(cfg.n_rx, ang.psi_rx, ang.spacing_ratio);
  const CVec nu = nu_coefficients(ang);
  const double amp =
      std::sqrt(entry_var * static_cast<double>(cfg.n_rx) * cfg.n_tx);
  const double w_los = std::sqrt(rician_k / (1.0 + rician_k));
  const double w_nlos = std::sqrt(1.0 / (1.0 + rician_k));
  std::vector<CMat> g;
  g.reserve(cfg.n_ris);
  for (int m = 0; m < cfg.n_ris; ++m) {
    const double mag = std::abs(nu(m));
    const cplx ray = mag > 0.0 ? nu(m) / mag : cplx{1.0, 0.0};
    const CMat los = (amp * ray) * (a_rx * a_tx.adjoint());
    g.push_back(w_los * los +
                w_nlos * rng.cgauss_matrix(cfg.n_rx, cfg.n_tx, entry_var));
  }
  return g;
}

}  // namespace detail

/// Rayleigh direct-channel estimate; per-entry variance is the linear BS-user
/// path gain with a fresh shadowing sample.
inline CMat gen_direct_estimate(const SystemConfig& cfg, const Geometry& geom,
                                Rng& rng) {
  const double gain = detail::sample_link_gain(
      detail::link_distance(geom.bs_pos, geom.user_pos), geom.alpha_bu, geom, rng);
  return rng.cgauss_matrix(cfg.n_rx, cfg.n_tx, gain);
}

/// Rician compound-channel estimates, one per RIS element, scaled by the
/// product of the BS-RIS and RIS-user link gains (double path loss).
inline std::vector<CMat> gen_compound_estimates(const SystemConfig& cfg,
                                                const Geometry& geom,
                                                const LoSAngles& ang, Rng& rng,
                                                double rician_k = 0.75) {
  const double g_br = detail::sample_link_gain(
      detail::link_distance(geom.bs_pos, geom.ris_pos), geom.alpha_br, geom, rng);
  const double g_ru = detail::sample_link_gain(
      detail::link_distance(geom.ris_pos, geom.user_pos), geom.alpha_ru, geom, rng);
  return detail::rician_compounds(cfg, ang, g_br * g_ru, rician_k, rng);
}

/// Full estimate for one Monte-Carlo trial. The relative inaccuracies in cfg
/// are scaled by the realized per-entry link gains into the absolute error
/// variances carried by the estimate.
inline ChannelEstimate make_channel_estimate(const SystemConfig& cfg,
                                             const Geometry& geom,
                                             const LoSAngles& ang, Rng& rng,
                                             double rician_k = 0.75) {
  ChannelEstimate est;
  const double g_bu = detail::sample_link_gain(
      detail::link_distance(geom.bs_pos, geom.user_pos), geom.alpha_bu, geom, rng);
  const double g_br = detail::sample_link_gain(
      detail::link_distance(geom.bs_pos, geom.ris_pos), geom.alpha_br, geom, rng);
  const double g_ru = detail::sample_link_gain(
      detail::link_distance(geom.ris_pos, geom.user_pos), geom.alpha_ru, geom, rng);
  est.h_d_bar = rng.cgauss_matrix(cfg.n_rx, cfg.n_tx, g_bu);
  est.g_bars = detail::rician_compounds(cfg, ang, g_br * g_ru, rician_k, rng);
  est.sigma_d_sq = cfg.sigma_d_sq * g_bu;
  est.sigma_m_sq = cfg.sigma_m_sq * g_br * g_ru;
  return est;
}

/// Pure-LoS estimate g_bar_m = nu_m a_RX a_TX^H with no direct link; the
/// error variances are taken as given (absolute).
inline ChannelEstimate los_channel_estimate(const SystemConfig& cfg,
                                            const LoSAngles& ang,
                                            double sigma_d_abs = 0.0,
                                            double sigma_m_abs = 0.0) {
  const CVec a_tx = ula_steering(cfg.n_tx, ang.psi_tx, ang.spacing_ratio);
  const CVec a_rx = ula_steering(cfg.n_rx, ang.psi_rx, ang.spacing_ratio);
  const CVec nu = nu_coefficients(ang);
  ChannelEstimate est;
  est.h_d_bar = CMat::Zero(cfg.n_rx, cfg.n_tx);
  est.g_bars.reserve(cfg.n_ris);
  for (int m = 0; m < cfg.n_ris; ++m)
    est.g_bars.push_back(nu(m) * (a_rx * a_tx.adjoint()));
  est.sigma_d_sq = sigma_d_abs;
  est.sigma_m_sq = sigma_m_abs;
  return est;
}

/// Unit-scale synthetic estimate with i.i.d. CSCG entries; handy for desk
/// experiments and self-checks. Error variances are absolute here.
inline ChannelEstimate synthetic_estimate(const SystemConfig& cfg, Rng& rng,
                                          double direct_var = 1.0,
                                          double compound_var = 1.0,
                                          double sigma_d_abs = 0.0,
                                          double sigma_m_abs = 0.0) {
  ChannelEstimate est;
  est.h_d_bar = rng.cgauss_matrix(cfg.n_rx, cfg.n_tx, direct_var);
  est.g_bars.reserve(cfg.n_ris);
  for (int m = 0; m < cfg.n_ris; ++m)
    est.g_bars.push_back(rng.cgauss_matrix(cfg.n_rx, cfg.n_tx, compound_var));
  est.sigma_d_sq = sigma_d_abs;
  est.sigma_m_sq = sigma_m_abs;
  return est;
}

/// Draw true channels around the estimate: CSI errors are i.i.d. CSCG with
/// the estimate's variances, phase noise is uniform on [-pi/2^b, pi/2^b].
inline TrueChannelSample sample_true_channel(const ChannelEstimate& est,
                                             const SystemConfig& cfg, Rng& rng) {
  TrueChannelSample s;
  s.h_d = est.h_d_bar;
  if (est.sigma_d_sq > 0.0)
    s.h_d += rng.cgauss_matrix(est.h_d_bar.rows(), est.h_d_bar.cols(), est.sigma_d_sq);
  s.g_list.reserve(est.g_bars.size());
  for (const CMat& g : est.g_bars) {
    CMat gt = g;
    if (est.sigma_m_sq > 0.0)
      gt += rng.cgauss_matrix(g.rows(), g.cols(), est.sigma_m_sq);
    s.g_list.push_back(std::move(gt));
  }
  const double half = kPi / std::pow(2.0, cfg.bits);
  s.phase_noise.resize(static_cast<Eigen::Index>(est.g_bars.size()));
  for (Eigen::Index m = 0; m < s.phase_noise.size(); ++m)
    s.phase_noise(m) = rng.uniform(-half, half);
  return s;
}

}  // namespace risbeam

#endif  // RISBEAM_CHANNEL_HPP
