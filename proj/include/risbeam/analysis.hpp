// Closed-form results: the jointly optimal precoder/phase solution for
// pure-LoS cascaded channels, the MISO average-MSE lower bound with its
// high-SNR floor, and the per-impairment floor formulas.
#ifndef RISBEAM_ANALYSIS_HPP
#define RISBEAM_ANALYSIS_HPP

#include "risbeam/mse.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace risbeam {

struct LosCoefficients {
  double c1 = 0.0;  // coherent cascaded-channel power at the chosen phases
  double c2 = 0.0;  // (1 + beta_R^2) sigma^2
  double c3 = 0.0;  // (1 + beta_T^2 + beta_R^2) (sigma_d^2 + sum_m sigma_m^2)
  CVec nu_m;        // per-element LoS compound gains
};

struct LosSolution {
  CVec w_star;
  PhaseVector theta_star;
  double g_star = 0.0;
  LosCoefficients coeffs;
};

/// Global optimum for pure-LoS cascaded channels (no direct link): full-power
/// transmission along the BS steering vector and codebook phases maximizing
/// the coherent combining gain. cfg's error variances are taken as the
/// absolute variances of the synthetic LoS instance.
inline LosSolution los_optimal(const SystemConfig& cfg, const LoSAngles& ang,
                               const DistortionConstants& consts,
                               const PhaseCodebook& book) {
  if (ang.m_x * ang.m_y != cfg.n_ris)
    throw dimension_error("los_optimal: UPA layout does not match n_ris");
  LosSolution sol;
  sol.coeffs.nu_m = nu_coefficients(ang);

  auto [phases, combine] = align_phases_discrete(sol.coeffs.nu_m, book);
  sol.theta_star = make_phase_vector(std::move(phases));

  const CVec a_tx = ula_steering(cfg.n_tx, ang.psi_tx, ang.spacing_ratio);
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;
  const double s = cfg.power / (1.0 + bt2);
  sol.w_star = std::sqrt(s) * a_tx;

  sol.coeffs.c1 = consts.omega_b * consts.omega_b * combine * combine;
  sol.coeffs.c2 = (1.0 + br2) * cfg.noise_var;
  sol.coeffs.c3 =
      (1.0 + bt2 + br2) * (cfg.sigma_d_sq + cfg.n_ris * cfg.sigma_m_sq);

  const double kappa =
      sol.coeffs.c1 + consts.eps_b * sol.coeffs.nu_m.squaredNorm();
  const double nt = cfg.n_tx;
  const double nr = cfg.n_rx;
  sol.g_star = sol.coeffs.c1 * nt * nr /
               ((sol.coeffs.c2 / s + sol.coeffs.c3) * nt * nr +
                kappa * (bt2 * nr + nt * (nr + br2)));
  return sol;
}

namespace detail {

inline void require_miso(const ChannelEstimate& est) {
  if (est.n_rx() != 1)
    throw dimension_error("analysis: operation requires a MISO estimate (N_R = 1)");
}

inline CVec miso_direct(const ChannelEstimate& est) {
  return est.h_d_bar.adjoint().col(0);
}

inline CMat miso_compound_matrix(const ChannelEstimate& est) {
  CMat g(est.n_tx(), est.n_ris());
  for (int m = 0; m < est.n_ris(); ++m)
    g.col(m) = est.g_bars[static_cast<std::size_t>(m)].adjoint().col(0);
  return g;
}

/// Impairment covariance of the MISO bound.
inline CMat miso_q_matrix(const ChannelEstimate& est, const SystemConfig& cfg,
                          const DistortionConstants& consts) {
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;
  const Eigen::Index nt = est.n_tx();
  CMat q = (1.0 + bt2 + br2) * (est.sigma_d_sq + est.sigma_m_total()) *
           CMat::Identity(nt, nt);
  const CMat gmat = miso_compound_matrix(est);
  for (int m = 0; m < est.n_ris(); ++m) {
    const CMat outer = gmat.col(m) * gmat.col(m).adjoint();
    q += consts.eps_b * ((1.0 + br2) * outer + bt2 * keep_diagonal(outer));
  }
  return hermitize(q);
}

/// (M+1) * lambda_max(H_cat^H B^{-1} H_cat), computed on whichever side of
/// the pencil is smaller.
inline double miso_gram_lambda(const CMat& h_cat, const CMat& b_mat) {
  const Eigen::Index nt = h_cat.rows();
  const Eigen::Index cols = h_cat.cols();
  double lam = 0.0;
  if (cols <= nt) {
    const CMat gram = hermitize(h_cat.adjoint() * b_mat.ldlt().solve(h_cat));
    Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
    lam = es.eigenvalues().maxCoeff();
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(
        hermitize(h_cat * h_cat.adjoint()), b_mat, Eigen::EigenvaluesOnly);
    lam = es.eigenvalues().maxCoeff();
  }
  return static_cast<double>(cols) * lam;
}

inline CMat miso_h_cat(const ChannelEstimate& est, const DistortionConstants& consts) {
  CMat h(est.n_tx(), est.n_ris() + 1);
  h.col(0) = miso_direct(est);
  const CMat gmat = miso_compound_matrix(est);
  for (int m = 0; m < est.n_ris(); ++m) h.col(m + 1) = consts.omega_b * gmat.col(m);
  return h;
}

}  // namespace detail

/// Lower bound on the achievable average MSE of the MISO system at transmit
/// power P; lies in (0, 1).
inline double miso_lower_bound(const ChannelEstimate& est, const SystemConfig& cfg,
                               const DistortionConstants& consts) {
  detail::require_miso(est);
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;
  const CMat b_mat =
      detail::miso_q_matrix(est, cfg, consts) +
      (1.0 + bt2) * (cfg.noise_var / cfg.power) *
          CMat::Identity(est.n_tx(), est.n_tx());
  const double x = detail::miso_gram_lambda(detail::miso_h_cat(est, consts), b_mat);
  return 1.0 - x / (1.0 + (1.0 + br2) * x);
}

/// High-SNR limit of the lower bound: the irreducible MSE floor.
inline double miso_floor(const ChannelEstimate& est, const SystemConfig& cfg,
                         const DistortionConstants& consts) {
  detail::require_miso(est);
  const CMat q = detail::miso_q_matrix(est, cfg, consts);
  if (q.norm() == 0.0) return 0.0;  // no impairments: no floor
  Eigen::SelfAdjointEigenSolver<CMat> es(q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-14 * es.eigenvalues().maxCoeff())
    throw numerical_error("miso_floor: impairment covariance is singular");
  const double br2 = cfg.beta_r * cfg.beta_r;
  const double x = detail::miso_gram_lambda(detail::miso_h_cat(est, consts), q);
  return 1.0 - x / (1.0 + (1.0 + br2) * x);
}

/// Floor under transceiver distortion alone (ideal RIS, perfect CSI).
inline double floor_hwi(int n_tx, double beta_t, double beta_r) {
  if (n_tx < 1) throw config_error("floor_hwi: n_tx must be positive");
  const double nt = n_tx;
  return 1.0 - nt / (beta_t * beta_t + (1.0 + beta_r * beta_r) * nt);
}

/// Floor under CSI error alone, for a given phase vector.
inline double floor_csi(const ChannelEstimate& est, const PhaseVector& pv,
                        double sigma_d_sq, double sigma_m_sq_total) {
  detail::require_miso(est);
  const CVec h =
      detail::miso_direct(est) + detail::miso_compound_matrix(est) * pv.theta;
  const double e = h.squaredNorm();
  return 1.0 - e / (sigma_d_sq + sigma_m_sq_total + e);
}

/// Floor under RIS phase noise alone, for a given phase vector; requires the
/// compound matrix to have full row rank.
inline double floor_phase_noise(const ChannelEstimate& est, const PhaseVector& pv,
                                int bits) {
  detail::require_miso(est);
  const DistortionConstants dc = distortion_constants(bits);
  const CVec hd = detail::miso_direct(est);
  const CMat gmat = detail::miso_compound_matrix(est);
  const CMat gg = hermitize(gmat * gmat.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(gg, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
    throw numerical_error("floor_phase_noise: compound matrix is rank deficient");

  const auto ldlt = gg.ldlt();
  const CVec gt = gmat * pv.theta;
  const CVec u = ldlt.solve(hd);
  const CVec y = ldlt.solve(gt);
  const double w = dc.omega_b;
  const double num = 1.0 - w * w;
  const double den = num + w * w * (gt.adjoint() * y)(0).real() +
                     2.0 * w * (gt.adjoint() * u)(0).real() +
                     (hd.adjoint() * u)(0).real();
  return num / den;
}

}  // namespace risbeam

#endif  // RISBEAM_ANALYSIS_HPP
