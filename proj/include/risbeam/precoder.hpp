// One majorization step for the transmit precoder: quadratic surrogate
// assembly, the closed-form regularized solve, and the Lagrange-multiplier
// bisection that enforces the total power constraint.
#ifndef RISBEAM_PRECODER_HPP
#define RISBEAM_PRECODER_HPP

#include "risbeam/mse.hpp"

#include <cmath>
#include <utility>

namespace risbeam {

/// Locally tight lower bound of g_mse in W at the expansion point W_t:
///   g_low(W) = 2 Re Tr(rhs^H W) - Tr(W^H z W) + const_term.
/// The constant is the W-independent noise piece of the expansion; it does
/// not move the maximizer but is needed for value-level tightness.
struct PrecoderSurrogate {
  CMat w_hat;  // d x N_R,   X_t^H Y_t^{-1}
  CMat z;      // N_T x N_T, Hermitian PSD quadratic coefficient
  CMat rhs;    // N_T x d,   H^H Y_t^{-1} X_t
  double const_term = 0.0;
};

inline PrecoderSurrogate build_surrogate(const Precoder& w_t,
                                         const PhaseVector& pv,
                                         const ChannelEstimate& est,
                                         const SystemConfig& cfg,
                                         const DistortionConstants& consts) {
  const CovarianceBundle b = received_covariance(w_t, pv, est, cfg, consts);
  const CMat x_t = b.h_bar_theta * w_t.w;
  const CMat p_t = detail::hermitian_solve_checked(b.y_total, x_t);  // Y^{-1} X

  PrecoderSurrogate s;
  s.w_hat = p_t.adjoint();
  s.rhs = b.h_bar_theta.adjoint() * p_t;

  // Quadratic coefficient: the unique Z with Tr(Z W W^H) = Tr(W_hat^H W_hat Y_W)
  // for every W, expanding each covariance piece via Tr(A diag(B)) = Tr(diag(A) B).
  const CMat a = hermitize(s.w_hat.adjoint() * s.w_hat);  // N_R x N_R
  const CMat ha = b.h_bar_theta.adjoint() * a;
  const double bt2 = cfg.beta_t * cfg.beta_t;
  const double br2 = cfg.beta_r * cfg.beta_r;

  const CMat z_sig = ha * b.h_bar_theta;
  CMat z = z_sig + bt2 * keep_diagonal(z_sig) +
           br2 * b.h_bar_theta.adjoint() * keep_diagonal(a) * b.h_bar_theta;

  CMat z_com = CMat::Zero(cfg.n_tx, cfg.n_tx);
  const CMat da = keep_diagonal(a);
  for (const CMat& g : est.g_bars) {
    const CMat gs = g.adjoint() * a * g;
    z_com += gs + bt2 * keep_diagonal(gs) + br2 * g.adjoint() * da * g;
  }
  z += consts.eps_b * z_com;

  const double err_total = est.sigma_d_sq + est.sigma_m_total();
  z += (1.0 + bt2 + br2) * err_total * a.trace().real() *
       CMat::Identity(cfg.n_tx, cfg.n_tx);

  s.z = hermitize(z);
  s.const_term = -(1.0 + br2) * cfg.noise_var * a.trace().real();
  return s;
}

/// Surrogate value at an arbitrary precoder.
inline double precoder_surrogate_value(const PrecoderSurrogate& s, const CMat& w) {
  return 2.0 * (s.rhs.adjoint() * w).trace().real() -
         (w.adjoint() * s.z * w).trace().real() + s.const_term;
}

/// W(lambda) = (Z + lambda I)^{-1} rhs, the unconstrained maximizer of the
/// surrogate Lagrangian.
inline Precoder optimal_precoder(const PrecoderSurrogate& s, double lambda) {
  const CMat reg =
      s.z + lambda * CMat::Identity(s.z.rows(), s.z.cols());
  const CMat w = reg.ldlt().solve(s.rhs);
  if (!w.allFinite())
    throw numerical_error("optimal_precoder: Z + lambda I is singular");
  return {w};
}

/// Multiplier search: lambda = 0 when the unconstrained solution already
/// meets Tr(W W^H) <= P / (1 + beta_T^2), otherwise bisection on the
/// monotonically non-increasing transmit power.
inline std::pair<double, Precoder> solve_lambda(const PrecoderSurrogate& s,
                                                const SystemConfig& cfg) {
  const double target = cfg.power / (1.0 + cfg.beta_t * cfg.beta_t);
  const auto power_of = [&](double lambda) -> std::pair<double, Precoder> {
    Precoder w = optimal_precoder(s, lambda);
    return {(w.w.adjoint() * w.w).trace().real(), std::move(w)};
  };

  bool interior_ok = true;
  double p0 = 0.0;
  Precoder w0;
  try {
    std::tie(p0, w0) = power_of(0.0);
  } catch (const numerical_error&) {
    interior_ok = false;  // singular Z: the constraint must be active
  }
  if (interior_ok && p0 <= target * (1.0 + 1e-12)) return {0.0, std::move(w0)};

  double hi = 1.0;
  auto [p_hi, w_hi] = power_of(hi);
  int doublings = 0;
  while (p_hi > target) {
    if (++doublings > 60)
      throw numerical_error("solve_lambda: no bracket after 60 doublings");
    hi *= 2.0;
    std::tie(p_hi, w_hi) = power_of(hi);
  }

  // Invariant: power(lo) > target >= power(hi); keep the feasible endpoint.
  double lo = 0.0;
  double lambda = hi;
  Precoder best = std::move(w_hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto [p_mid, w_mid] = power_of(mid);
    // Relative power tolerance, tightened so that complementary slackness
    // lambda * |power - target| stays below 1e-6 * target as well.
    const double tol = std::min(1e-8, 1e-6 / std::max(mid, 1.0)) * target;
    if (std::abs(p_mid - target) <= tol) return {mid, std::move(w_mid)};
    if (p_mid > target) {
      lo = mid;
    } else {
      hi = mid;
      lambda = mid;
      best = std::move(w_mid);
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return {lambda, std::move(best)};
}

}  // namespace risbeam

#endif  // RISBEAM_PRECODER_HPP
