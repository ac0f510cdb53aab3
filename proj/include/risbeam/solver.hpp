// The outer alternating loop: precoder update by the KKT closed form, phase
// update by either the two-tier MM projection or the modified RGA, with
// ideal-system initialization and convergence bookkeeping.
#ifndef RISBEAM_SOLVER_HPP
#define RISBEAM_SOLVER_HPP

#include "risbeam/precoder.hpp"
#include "risbeam/ris_mm.hpp"
#include "risbeam/ris_rga.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace risbeam {

enum class RisMethod { MM, RGA, Fixed };

struct SolverOptions {
  double tol = 1e-4;      // absolute stall threshold on g_mse
  int max_outer = 100;
  double mm_tol = 1e-6;   // inner MM relative tolerance
  int mm_max_iter = 50;
  RgaConfig rga = {};
};

struct BeamformingSolution {
  Precoder w;
  PhaseVector theta;
  Equalizer c;
  double objective = 0.0;  // final g_mse
  double anmse = 0.0;      // (d - objective) / d
  std::vector<double> trace;  // g_mse per outer iteration, non-decreasing
  int iterations = 0;
  RisMethod ris_method = RisMethod::MM;
};

struct Initial {
  Precoder w;
  PhaseVector theta;
};

/// Full-power precoder along the dominant right singular vectors of the
/// effective channel at the given phases.
inline Initial init_for_phases(const ChannelEstimate& est, const SystemConfig& cfg,
                               const DistortionConstants& consts, PhaseVector pv) {
  Initial init;
  init.theta = std::move(pv);
  const CMat h = effective_channel(est, init.theta, consts);
  Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeThinV);
  const double col_power =
      cfg.power / ((1.0 + cfg.beta_t * cfg.beta_t) * cfg.n_streams);
  init.w.w = svd.matrixV().leftCols(cfg.n_streams) * std::sqrt(col_power);
  return init;
}

/// Cyclic per-element phase alignment maximizing the effective-channel
/// Frobenius energy over the codebook; deterministic from the all-zero start.
inline PhaseVector aligned_phase_vector(const ChannelEstimate& est,
                                        const SystemConfig& cfg,
                                        const DistortionConstants& consts,
                                        const PhaseCodebook& book,
                                        int passes = 4) {
  PhaseVector pv = identity_phase_vector(cfg.n_ris, book);
  CMat h = effective_channel(est, pv, consts);
  for (int sweep = 0; sweep < passes; ++sweep) {
    bool changed = false;
    for (int m = 0; m < cfg.n_ris; ++m) {
      const CMat& g = est.g_bars[static_cast<std::size_t>(m)];
      const CMat rest = h - (consts.omega_b * pv.theta(m)) * g;
      const cplx align = (rest.conjugate().cwiseProduct(g)).sum();
      const double phase =
          align == cplx{0.0, 0.0} ? pv.phases(m) : book.nearest(-std::arg(align));
      if (phase != pv.phases(m)) {
        changed = true;
        pv.phases(m) = phase;
        pv.theta(m) = std::polar(1.0, phase);
      }
      h = rest + (consts.omega_b * pv.theta(m)) * g;
    }
    if (!changed) break;
  }
  return pv;
}

/// Cyclic elementwise best response on the true objective at fixed W.
/// Bounded work, used only as an initialization polish for small codebooks.
inline PhaseVector greedy_phase_refine(const ChannelEstimate& est,
                                       const SystemConfig& cfg,
                                       const DistortionConstants& consts,
                                       const PhaseCodebook& book,
                                       const Precoder& w, PhaseVector pv,
                                       int passes = 2) {
  for (int sweep = 0; sweep < passes; ++sweep) {
    bool changed = false;
    for (int m = 0; m < cfg.n_ris; ++m) {
      double best_phase = pv.phases(m);
      double best_g = g_mse(w, pv, est, cfg, consts);
      for (std::size_t k = 0; k < book.size(); ++k) {
        if (book.phase(k) == pv.phases(m)) continue;
        PhaseVector trial = pv;
        trial.phases(m) = book.phase(k);
        trial.theta(m) = std::polar(1.0, book.phase(k));
        const double g = g_mse(w, trial, est, cfg, consts);
        if (g > best_g) {
          best_g = g;
          best_phase = book.phase(k);
        }
      }
      if (best_phase != pv.phases(m)) {
        changed = true;
        pv.phases(m) = best_phase;
        pv.theta(m) = std::polar(1.0, best_phase);
      }
    }
    if (!changed) break;
  }
  return pv;
}

/// Alignment candidate for strongly rank-one compound channels: scalarize
/// every channel through the dominant left/right singular pair of the
/// compound set and solve the resulting coherent-combining problem exactly.
inline PhaseVector rank_one_aligned_phase_vector(const ChannelEstimate& est,
                                                 const SystemConfig& cfg,
                                                 const DistortionConstants& consts,
                                                 const PhaseCodebook& book) {
  CMat t_rx = CMat::Zero(cfg.n_rx, cfg.n_rx);
  CMat t_tx = CMat::Zero(cfg.n_tx, cfg.n_tx);
  for (const CMat& g : est.g_bars) {
    t_rx += g * g.adjoint();
    t_tx += g.adjoint() * g;
  }
  Eigen::SelfAdjointEigenSolver<CMat> er(hermitize(t_rx));
  Eigen::SelfAdjointEigenSolver<CMat> et(hermitize(t_tx));
  const CVec u = er.eigenvectors().col(cfg.n_rx - 1);
  const CVec v = et.eigenvectors().col(cfg.n_tx - 1);

  CVec coeff(cfg.n_ris);
  for (int m = 0; m < cfg.n_ris; ++m)
    coeff(m) = consts.omega_b *
               (u.adjoint() * est.g_bars[static_cast<std::size_t>(m)] * v)(0);
  const cplx offset = (u.adjoint() * est.h_d_bar * v)(0);
  return make_phase_vector(align_phases_discrete(coeff, book, offset).first);
}

/// Deterministic cold start. Candidates: identity phases, the energy-aligned
/// phases, the rank-one scalarized alignment, and (for small codebooks, where
/// discrete basins are far apart) whole-codebook rotations of the aligned
/// start. Each candidate pairs the SVD precoder with a few closed-form
/// precoder refinements before ranking; the winner gets an elementwise
/// best-response polish when the codebook is small.
inline Initial default_init(const ChannelEstimate& est, const SystemConfig& cfg,
                            const DistortionConstants& consts,
                            const PhaseCodebook& book) {
  std::vector<PhaseVector> candidates;
  candidates.push_back(identity_phase_vector(cfg.n_ris, book));
  candidates.push_back(aligned_phase_vector(est, cfg, consts, book));
  if (book.size() <= 8) {
    const RVec base = candidates.back().phases;
    for (std::size_t k = 1; k < book.size(); ++k) {
      RVec rotated(base.size());
      for (Eigen::Index m = 0; m < base.size(); ++m)
        rotated(m) = book.nearest(base(m) + static_cast<double>(k) * book.step());
      candidates.push_back(make_phase_vector(std::move(rotated)));
    }
  }
  candidates.push_back(rank_one_aligned_phase_vector(est, cfg, consts, book));

  Initial best;
  double best_g = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j)
      if (candidates[j].phases == candidates[i].phases) {
        seen = true;
        break;
      }
    if (seen) continue;
    Initial cand = init_for_phases(est, cfg, consts, candidates[i]);
    for (int step = 0; step < 6; ++step) {
      const PrecoderSurrogate s =
          build_surrogate(cand.w, cand.theta, est, cfg, consts);
      cand.w = solve_lambda(s, cfg).second;
    }
    const double g = g_mse(cand.w, cand.theta, est, cfg, consts);
    if (g > best_g) {
      best_g = g;
      best = std::move(cand);
    }
  }
  if (book.size() <= 16) {
    PhaseVector refined =
        greedy_phase_refine(est, cfg, consts, book, best.w, best.theta);
    if (refined.phases != best.theta.phases &&
        g_mse(best.w, refined, est, cfg, consts) > best_g)
      best.theta = std::move(refined);
  }
  return best;
}

inline BeamformingSolution ao_solve(const ChannelEstimate& est,
                                    const SystemConfig& cfg,
                                    const DistortionConstants& consts,
                                    const PhaseCodebook& book, RisMethod method,
                                    const SolverOptions& opts = {},
                                    const std::optional<Initial>& init = {});

/// Solve the companion ideal system (no distortion, no CSI error, same
/// codebook) and return its solution, rescaled if needed so the precoder is
/// feasible under the impairment-inflated power constraint.
inline Initial ideal_init(const ChannelEstimate& est, const SystemConfig& cfg,
                          const DistortionConstants& consts,
                          const PhaseCodebook& book, RisMethod method,
                          const SolverOptions& opts = {}) {
  SystemConfig ideal_cfg = cfg;
  ideal_cfg.beta_t = 0.0;
  ideal_cfg.beta_r = 0.0;
  ideal_cfg.sigma_d_sq = 0.0;
  ideal_cfg.sigma_m_sq = 0.0;
  ChannelEstimate ideal_est = est;
  ideal_est.sigma_d_sq = 0.0;
  ideal_est.sigma_m_sq = 0.0;
  SolverOptions ideal_opts = opts;
  ideal_opts.max_outer = 30;

  BeamformingSolution sol =
      ao_solve(ideal_est, ideal_cfg, consts, book, method, ideal_opts);

  const double target = cfg.power / (1.0 + cfg.beta_t * cfg.beta_t);
  const double pw = (sol.w.w.adjoint() * sol.w.w).trace().real();
  if (pw > target * (1.0 + 1e-12)) sol.w.w *= std::sqrt(target / pw);
  return {std::move(sol.w), std::move(sol.theta)};
}

inline BeamformingSolution ao_solve(const ChannelEstimate& est,
                                    const SystemConfig& cfg,
                                    const DistortionConstants& consts,
                                    const PhaseCodebook& book, RisMethod method,
                                    const SolverOptions& opts,
                                    const std::optional<Initial>& init) {
  BeamformingSolution sol;
  sol.ris_method = method;
  if (init) {
    sol.w = init->w;
    sol.theta = init->theta;
  } else {
    Initial d = default_init(est, cfg, consts, book);
    sol.w = std::move(d.w);
    sol.theta = std::move(d.theta);
  }

  double g_prev = g_mse(sol.w, sol.theta, est, cfg, consts);
  sol.trace.push_back(g_prev);
  for (int t = 0; t < opts.max_outer; ++t) {
    sol.iterations = t + 1;
    const PrecoderSurrogate s = build_surrogate(sol.w, sol.theta, est, cfg, consts);
    sol.w = solve_lambda(s, cfg).second;
    switch (method) {
      case RisMethod::MM:
        sol.theta = mm_phase_optimize(sol.w, sol.theta, est, cfg, consts, book,
                                      opts.mm_tol, opts.mm_max_iter);
        break;
      case RisMethod::RGA:
        sol.theta = rga_optimize(sol.w, sol.theta, est, cfg, consts, book, opts.rga);
        break;
      case RisMethod::Fixed:
        break;
    }
    const double g = g_mse(sol.w, sol.theta, est, cfg, consts);
    sol.trace.push_back(g);
    const double delta = std::abs(g - g_prev);
    g_prev = g;
    if (delta < opts.tol) break;
  }

  sol.objective = g_prev;
  sol.anmse = (cfg.n_streams - g_prev) / cfg.n_streams;
  sol.c = wiener_equalizer(sol.w, sol.theta, est, cfg, consts);
  return sol;
}

}  // namespace risbeam

#endif  // RISBEAM_SOLVER_HPP
