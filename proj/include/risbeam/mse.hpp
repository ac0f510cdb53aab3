// The objective kernel: effective channel, received-signal covariances, the
// closed-form total average MSE and its post-equalizer form g_mse, the Wiener
// equalizer, and a Monte-Carlo estimator that validates the analytic
// expectation by sampling true channels.
#ifndef RISBEAM_MSE_HPP
#define RISBEAM_MSE_HPP

#include "risbeam/channel.hpp"
#include "risbeam/config.hpp"
#include "risbeam/rng.hpp"
#include "risbeam/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace risbeam {

struct Precoder {
  CMat w;  // N_T x d
};

struct Equalizer {
  CMat c;  // d x N_R
};

/// Unit-modulus RIS reflection coefficients theta_m = exp(j phi_m) with every
/// phi_m a codebook member. Phases are the source of truth; theta is cached.
struct PhaseVector {
  RVec phases;
  CVec theta;
};

inline PhaseVector make_phase_vector(RVec phases) {
  PhaseVector pv;
  pv.theta.resize(phases.size());
  for (Eigen::Index m = 0; m < phases.size(); ++m)
    pv.theta(m) = std::polar(1.0, phases(m));
  pv.phases = std::move(phases);
  return pv;
}

inline PhaseVector identity_phase_vector(int n_ris, const PhaseCodebook& book) {
  return make_phase_vector(RVec::Constant(n_ris, book.nearest(0.0)));
}

inline PhaseVector random_phase_vector(int n_ris, const PhaseCodebook& book,
                                       Rng& rng) {
  RVec phases(n_ris);
  for (int m = 0; m < n_ris; ++m) {
    const auto k = static_cast<std::size_t>(rng.next_u64() % book.size());
    phases(m) = book.phase(k);
  }
  return make_phase_vector(std::move(phases));
}

/// Maximize |offset + sum_m c_m exp(j phi_m)| over codebook phases. Every
/// optimum is an elementwise projection of some common reference angle, so a
/// sweep over the per-element switch points is exhaustive. Without an offset
/// the objective is invariant under whole-codebook rotations and one step of
/// the grid suffices; with an offset the full circle matters, so the sweep is
/// replicated across steps while that stays cheap and otherwise anchored at
/// the offset's angle.
inline std::pair<RVec, double> align_phases_discrete(const CVec& coeff,
                                                     const PhaseCodebook& book,
                                                     cplx offset = {0.0, 0.0}) {
  const Eigen::Index m = coeff.size();
  const double step = book.step();
  std::vector<double> refs;
  refs.push_back(0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (coeff(i) == cplx{0.0, 0.0}) continue;
    double br = std::fmod(std::arg(coeff(i)) + 0.5 * step, step);
    if (br < 0.0) br += step;
    refs.push_back(br);
  }
  std::sort(refs.begin(), refs.end());
  std::vector<double> candidates = refs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double next = i + 1 < refs.size() ? refs[i + 1] : refs.front() + step;
    candidates.push_back(0.5 * (refs[i] + next));
  }
  if (offset != cplx{0.0, 0.0}) {
    if (static_cast<double>(m) * static_cast<double>(book.size()) <= 4096.0) {
      const std::size_t base = candidates.size();
      for (std::size_t k = 1; k < book.size(); ++k)
        for (std::size_t i = 0; i < base; ++i)
          candidates.push_back(candidates[i] + static_cast<double>(k) * step);
    }
    candidates.push_back(std::arg(offset));
  }

  RVec best_phases(m);
  double best = -1.0;
  RVec phases(m);
  for (double psi : candidates) {
    cplx v = offset;
    for (Eigen::Index i = 0; i < m; ++i) {
      phases(i) = book.nearest(psi - std::arg(coeff(i)));
      v += coeff(i) * std::polar(1.0, phases(i));
    }
    if (std::abs(v) > best) {
      best = std::abs(v);
      best_phases = phases;
    }
  }
  return {std::move(best_phases), best};
}

/// Effective channel and the Hermitian covariance pieces of the average MSE;
/// y_total = t_cas + eps_b * t_com + t_si is positive definite for sigma^2 > 0.
struct CovarianceBundle {
  CMat h_bar_theta;
  CMat t_cas;
  CMat t_com;
  CMat t_si;
  CMat y_total;
};

/// Whether the receiver-distortion covariance keeps the beta_T^2 beta_R^2
/// cross term (exact) or drops it (the approximation the closed-form average
/// MSE is built on). Both the analytic path and the sampler default to the
/// approximate form so they estimate the same quantity.
enum class DistortionModel { A2Approx, A1Exact };

/// h_bar_theta = h_d_bar + omega_b * sum_m theta_m g_bar_m.
inline CMat effective_channel(const ChannelEstimate& est, const PhaseVector& pv,
                              const DistortionConstants& consts) {
  CMat h = est.h_d_bar;
  for (int m = 0; m < est.n_ris(); ++m)
    h += (consts.omega_b * pv.theta(m)) * est.g_bars[static_cast<std::size_t>(m)];
  return h;
}

inline CovarianceBundle received_covariance(const Precoder& w,
                                            const PhaseVector& pv,
                                            const ChannelEstimate& est,
                                            const SystemConfig& cfg,
                                            const DistortionConstants& consts) {
  CovarianceBundle b;
  b.h_bar_theta = effective_channel(est, pv, consts);
  const CMat q1 = w.w * w.w.adjoint();
  const CMat q2 = keep_diagonal(q1);
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;

  const CMat sig = b.h_bar_theta * q1 * b.h_bar_theta.adjoint();
  b.t_cas = hermitize(sig + bt2 * b.h_bar_theta * q2 * b.h_bar_theta.adjoint() +
                      br2 * keep_diagonal(sig));

  b.t_com = CMat::Zero(cfg.n_rx, cfg.n_rx);
  for (const CMat& g : est.g_bars) {
    const CMat s1 = g * q1 * g.adjoint();
    b.t_com += s1 + bt2 * g * q2 * g.adjoint() + br2 * keep_diagonal(s1);
  }
  b.t_com = hermitize(b.t_com);

  const double err_total = est.sigma_d_sq + est.sigma_m_total();
  b.t_si = ((1.0 + br2) * cfg.noise_var +
            (1.0 + bt2 + br2) * q1.trace().real() * err_total) *
           CMat::Identity(cfg.n_rx, cfg.n_rx);

  b.y_total = hermitize(b.t_cas + consts.eps_b * b.t_com + b.t_si);
  return b;
}

namespace detail {

/// Solve y * x = rhs for Hermitian positive-definite y, rejecting
/// ill-conditioned systems.
inline CMat hermitian_solve_checked(const CMat& y, const CMat& rhs,
                                    double cond_limit = 1e12) {
  Eigen::SelfAdjointEigenSolver<CMat> es(y, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > cond_limit)
    throw numerical_error("received-signal covariance is ill-conditioned");
  return y.ldlt().solve(rhs);
}

}  // namespace detail

/// Wiener equalizer C = W^H H^H Y^{-1}, the unconstrained minimizer of the
/// average MSE in C.
inline Equalizer wiener_equalizer(const Precoder& w, const PhaseVector& pv,
                                  const ChannelEstimate& est,
                                  const SystemConfig& cfg,
                                  const DistortionConstants& consts) {
  const CovarianceBundle b = received_covariance(w, pv, est, cfg, consts);
  const CMat x = b.h_bar_theta * w.w;
  return {detail::hermitian_solve_checked(b.y_total, x).adjoint()};
}

/// Total average MSE Tr(I - C H W - W^H H^H C^H + C Y C^H).
inline double total_average_mse(const Equalizer& c, const Precoder& w,
                                const PhaseVector& pv, const ChannelEstimate& est,
                                const SystemConfig& cfg,
                                const DistortionConstants& consts) {
  const CovarianceBundle b = received_covariance(w, pv, est, cfg, consts);
  const CMat chw = c.c * b.h_bar_theta * w.w;
  const double d = static_cast<double>(w.w.cols());
  return d - 2.0 * chw.trace().real() +
         (c.c * b.y_total * c.c.adjoint()).trace().real();
}

/// Post-equalizer objective g = Tr(W^H H^H Y^{-1} H W); the total MSE at the
/// Wiener equalizer equals d - g.
inline double g_mse(const Precoder& w, const PhaseVector& pv,
                    const ChannelEstimate& est, const SystemConfig& cfg,
                    const DistortionConstants& consts) {
  const CovarianceBundle b = received_covariance(w, pv, est, cfg, consts);
  const CMat x = b.h_bar_theta * w.w;
  return (x.adjoint() * detail::hermitian_solve_checked(b.y_total, x))
      .trace()
      .real();
}

/// MSE matrix conditioned on one true-channel realization: the ideal-system
/// part plus the transceiver-distortion part.
inline CMat mse_matrix_sample(const Equalizer& c, const Precoder& w,
                              const TrueChannelSample& sample,
                              const PhaseVector& pv, const SystemConfig& cfg,
                              DistortionModel model = DistortionModel::A2Approx) {
  CMat h_cas = sample.h_d;
  for (std::size_t m = 0; m < sample.g_list.size(); ++m)
    h_cas += (pv.theta(static_cast<Eigen::Index>(m)) *
              std::polar(1.0, sample.phase_noise(static_cast<Eigen::Index>(m)))) *
             sample.g_list[m];

  const CMat q1 = w.w * w.w.adjoint();
  const CMat q2 = keep_diagonal(q1);
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;
  const Eigen::Index d = w.w.cols();

  const CMat sig = h_cas * q1 * h_cas.adjoint();
  const CMat chw = c.c * h_cas * w.w;
  const CMat eye_r = CMat::Identity(cfg.n_rx, cfg.n_rx);
  const CMat e_ideal = CMat::Identity(d, d) - chw - chw.adjoint() +
                       c.c * (sig + cfg.noise_var * eye_r) * c.c.adjoint();

  const CMat tx_dist = bt2 * h_cas * q2 * h_cas.adjoint();
  CMat rx_seen = sig + cfg.noise_var * eye_r;
  if (model == DistortionModel::A1Exact) rx_seen += tx_dist;
  const CMat e_add = c.c * (tx_dist + br2 * keep_diagonal(rx_seen)) * c.c.adjoint();
  return hermitize(e_ideal + e_add);
}

/// Sample mean and standard error of Tr(MSE) over independent draws of the
/// CSI errors and RIS phase noise; the oracle for the closed-form average.
inline std::pair<double, double> mc_average_mse(
    const Equalizer& c, const Precoder& w, const PhaseVector& pv,
    const ChannelEstimate& est, const SystemConfig& cfg, int n_samples, Rng& rng,
    DistortionModel model = DistortionModel::A2Approx) {
  if (n_samples < 1) throw config_error("mc_average_mse: n_samples must be >= 1");
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const TrueChannelSample s = sample_true_channel(est, cfg, rng);
    const double tr = mse_matrix_sample(c, w, s, pv, cfg, model).trace().real();
    const double delta = tr - mean;
    mean += delta / (i + 1);
    m2 += delta * (tr - mean);
  }
  const double std_err =
      n_samples > 1 ? std::sqrt(m2 / (n_samples - 1.0) / n_samples) : 0.0;
  return {mean, std_err};
}

}  // namespace risbeam

#endif  // RISBEAM_MSE_HPP
