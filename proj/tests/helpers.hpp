// Shared instance factories and small oracles for the test suites.
#ifndef RISBEAM_TESTS_HELPERS_HPP
#define RISBEAM_TESTS_HELPERS_HPP

#include "risbeam/risbeam.hpp"

#include <utility>
#include <vector>

namespace testutil {

using namespace risbeam;

/// Small unit-scale instance with all impairments active.
inline SystemConfig tiny_config(int n = 2, int m = 4, int bits = 2) {
  SystemConfig cfg;
  cfg.n_tx = cfg.n_rx = cfg.n_streams = n;
  cfg.n_ris = m;
  cfg.bits = bits;
  cfg.power = 1.0;
  cfg.noise_var = 0.01;
  cfg.beta_t = 0.08;
  cfg.beta_r = 0.08;
  cfg.sigma_d_sq = 0.01;
  cfg.sigma_m_sq = 0.01;
  return cfg;
}

/// Desk-scale instance used by the heavier statistical checks.
inline SystemConfig desk_config() {
  SystemConfig cfg = tiny_config(4, 16, 2);
  return cfg;
}

/// Synthetic estimate with unit-ish scales; compound gain split across
/// elements so the reflected path carries energy comparable to the direct.
inline ChannelEstimate random_estimate(const SystemConfig& cfg, Rng& rng,
                                       double sigma_scale = 1.0) {
  const double compound_var = 1.0 / cfg.n_ris;
  return synthetic_estimate(cfg, rng, 1.0, compound_var,
                            cfg.sigma_d_sq * sigma_scale,
                            cfg.sigma_m_sq * compound_var * sigma_scale);
}

inline Precoder random_feasible_precoder(const SystemConfig& cfg, Rng& rng) {
  Precoder w{rng.cgauss_matrix(cfg.n_tx, cfg.n_streams, 1.0)};
  const double target = cfg.power / (1.0 + cfg.beta_t * cfg.beta_t);
  const double pw = (w.w.adjoint() * w.w).trace().real();
  w.w *= std::sqrt(rng.uniform(0.2, 1.0) * target / pw);
  return w;
}

/// All codebook phase vectors of length m (2^(bits*m) total); only call for
/// tiny instances.
inline std::vector<PhaseVector> enumerate_phase_vectors(int m,
                                                        const PhaseCodebook& book) {
  std::vector<PhaseVector> out;
  const std::size_t n = book.size();
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= n;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    RVec phases(m);
    std::size_t c = code;
    for (int i = 0; i < m; ++i) {
      phases(i) = book.phase(c % n);
      c /= n;
    }
    out.push_back(make_phase_vector(std::move(phases)));
  }
  return out;
}

/// Precoder-only alternating optimization at fixed phases (oracle building
/// block for exhaustive enumerations).
inline double converged_precoder_objective(const ChannelEstimate& est,
                                           const SystemConfig& cfg,
                                           const DistortionConstants& dc,
                                           const PhaseCodebook& book,
                                           const PhaseVector& pv,
                                           int max_outer = 200) {
  SolverOptions opts;
  opts.tol = 1e-9;
  opts.max_outer = max_outer;
  const Initial init = init_for_phases(est, cfg, dc, pv);
  return ao_solve(est, cfg, dc, book, RisMethod::Fixed, opts, init).objective;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace testutil

#endif  // RISBEAM_TESTS_HELPERS_HPP
