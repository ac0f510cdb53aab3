// Modified Riemannian gradient ascent for the discrete phase vector:
// project the Euclidean gradient of the quadratic surrogate onto the tangent
// space of the unit-modulus manifold, step, retract onto the codebook, and
// backtrack the step size whenever the surrogate value would decrease.
#ifndef RISBEAM_RIS_RGA_HPP
#define RISBEAM_RIS_RGA_HPP

#include "risbeam/ris_mm.hpp"

#include <cmath>
#include <utility>

namespace risbeam {

struct RgaConfig {
  double rho_0 = 0.0;   // initial step; <= 0 selects 1 / lambda_max(K3)
  double shrink = 0.5;  // backtracking factor in (0,1)
  double tol = 1e-6;    // relative stopping threshold on the surrogate
  int max_iter = 100;
  int max_backtracks = 30;
};

/// Tangent-space projection of the Euclidean surrogate gradient
/// 2 (xi_bar_2 - k_bar_2 - K3 theta): removes the radial component so that
/// Re{grad_m theta_m^*} = 0 for every element.
inline CVec riemannian_gradient(const CVec& theta_n, const QuadraticSurrogate& q) {
  const CVec euclid = 2.0 * (q.xi_bar_2 - q.k_bar_2 - q.k_bar_3 * theta_n);
  CVec grad(euclid.size());
  for (Eigen::Index m = 0; m < euclid.size(); ++m) {
    const double radial = (euclid(m) * std::conj(theta_n(m))).real();
    grad(m) = euclid(m) - radial * theta_n(m);
  }
  return grad;
}

/// Map each entry to the codebook phase circularly nearest to its angle.
/// A zero entry has no angle and is rejected.
inline PhaseVector retract(const CVec& theta_prime, const PhaseCodebook& book) {
  RVec phases(theta_prime.size());
  for (Eigen::Index m = 0; m < theta_prime.size(); ++m) {
    if (theta_prime(m) == cplx{0.0, 0.0})
      throw numerical_error("retract: zero entry has undefined direction");
    phases(m) = book.nearest(std::arg(theta_prime(m)));
  }
  return make_phase_vector(std::move(phases));
}

namespace detail {

// Optimizer-side retraction: zero-magnitude entries keep their previous phase.
inline PhaseVector retract_or_keep(const CVec& theta_prime,
                                   const PhaseVector& prev,
                                   const PhaseCodebook& book) {
  RVec phases(theta_prime.size());
  for (Eigen::Index m = 0; m < theta_prime.size(); ++m)
    phases(m) = theta_prime(m) == cplx{0.0, 0.0}
                    ? prev.phases(m)
                    : book.nearest(std::arg(theta_prime(m)));
  return make_phase_vector(std::move(phases));
}

}  // namespace detail

/// Gradient-ascent loop over the surrogate built once at pv0 (the AO anchor);
/// monotone by construction, exits cleanly when no improving step exists.
inline PhaseVector rga_optimize(const Precoder& w, const PhaseVector& pv0,
                                const ChannelEstimate& est,
                                const SystemConfig& cfg,
                                const DistortionConstants& consts,
                                const PhaseCodebook& book,
                                const RgaConfig& rga = {}) {
  const QuadraticSurrogate q = build_quadratic(w, pv0, est, cfg, consts);
  const double rho_init =
      rga.rho_0 > 0.0 ? rga.rho_0 : 1.0 / std::max(q.lip, 1e-12);

  PhaseVector pv = pv0;
  double val = quadratic_surrogate_value(q, pv.theta);
  for (int n = 0; n < rga.max_iter; ++n) {
    const CVec euclid = 2.0 * (q.xi_bar_2 - q.k_bar_2 - q.k_bar_3 * pv.theta);
    const CVec grad = riemannian_gradient(pv.theta, q);
    if (grad.norm() <= 1e-12 * std::max(euclid.norm(), 1e-300)) break;

    double rho = rho_init;
    PhaseVector cand;
    double cand_val = 0.0;
    bool improved = false;
    for (int bt = 0; bt <= rga.max_backtracks; ++bt) {
      cand = detail::retract_or_keep(pv.theta + rho * grad, pv, book);
      cand_val = quadratic_surrogate_value(q, cand.theta);
      if (cand_val >= val) {
        improved = true;
        break;
      }
      rho *= rga.shrink;
    }
    if (!improved) break;

    const bool moved = cand.phases != pv.phases;
    const double delta = std::abs(cand_val - val);
    pv = std::move(cand);
    val = cand_val;
    if (!moved) break;
    if (delta < rga.tol * std::max(1.0, std::abs(val))) break;
  }
  return pv;
}

}  // namespace risbeam

#endif  // RISBEAM_RIS_RGA_HPP
