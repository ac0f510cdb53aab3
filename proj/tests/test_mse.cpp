#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace risbeam;

namespace {

constexpr DistortionConstants kContinuous{0.0, 1.0};

// Term-by-term evaluation of the covariance pieces, written independently of
// the library path (plain loops over entries and elements).
CMat oracle_y_total(const CMat& w, const CVec& theta, const ChannelEstimate& est,
                    const SystemConfig& cfg, const DistortionConstants& dc) {
  const Eigen::Index nr = est.n_rx();
  CMat h = est.h_d_bar;
  for (int m = 0; m < est.n_ris(); ++m) h += dc.omega_b * theta(m) * est.g_bars[size_t(m)];

  const CMat q1 = w * w.adjoint();
  CMat q2 = CMat::Zero(q1.rows(), q1.cols());
  for (Eigen::Index i = 0; i < q1.rows(); ++i) q2(i, i) = q1(i, i);
  const double bt2 = cfg.beta_t * cfg.beta_t, br2 = cfg.beta_r * cfg.beta_r;

  CMat t_cas = h * q1 * h.adjoint() + bt2 * h * q2 * h.adjoint();
  const CMat sig = h * q1 * h.adjoint();
  for (Eigen::Index i = 0; i < nr; ++i) t_cas(i, i) += br2 * sig(i, i);

  CMat t_com = CMat::Zero(nr, nr);
  for (int m = 0; m < est.n_ris(); ++m) {
    const CMat& g = est.g_bars[size_t(m)];
    const CMat s1 = g * q1 * g.adjoint();
    t_com += s1 + bt2 * g * q2 * g.adjoint();
    for (Eigen::Index i = 0; i < nr; ++i) t_com(i, i) += br2 * s1(i, i);
  }

  const double err = est.sigma_d_sq + est.n_ris() * est.sigma_m_sq;
  const CMat t_si = ((1.0 + br2) * cfg.noise_var +
                     (1.0 + bt2 + br2) * q1.trace().real() * err) *
                    CMat::Identity(nr, nr);
  return t_cas + dc.eps_b * t_com + t_si;
}

}  // namespace

TEST_CASE("effective channel") {
  SystemConfig cfg = testutil::tiny_config(2, 2, 1);
  Rng rng(1);

  SECTION("no reflected path leaves the direct channel") {
    ChannelEstimate est = testutil::random_estimate(cfg, rng);
    for (auto& g : est.g_bars) g.setZero();
    const auto pv = identity_phase_vector(cfg.n_ris, phase_codebook(cfg.bits));
    CHECK(effective_channel(est, pv, distortion_constants(1)) == est.h_d_bar);
  }

  SECTION("continuous-phase limit with one element adds the compound channel") {
    SystemConfig c1 = testutil::tiny_config(2, 1, 1);
    ChannelEstimate est = testutil::random_estimate(c1, rng);
    const auto pv = identity_phase_vector(1, phase_codebook(1));  // theta_1 = 1
    const CMat h = effective_channel(est, pv, kContinuous);
    CHECK((h - est.h_d_bar - est.g_bars[0]).norm() < 1e-14);
  }

  SECTION("matches an independent elementwise evaluation, b=1, M=2") {
    ChannelEstimate est = testutil::random_estimate(cfg, rng);
    const PhaseCodebook book(1);
    const PhaseVector pv = random_phase_vector(2, book, rng);
    const DistortionConstants dc = distortion_constants(1);
    const CMat h = effective_channel(est, pv, dc);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) {
        const cplx want = est.h_d_bar(i, j) +
                          dc.omega_b * (pv.theta(0) * est.g_bars[0](i, j) +
                                        pv.theta(1) * est.g_bars[1](i, j));
        CHECK(std::abs(h(i, j) - want) < 1e-14);
      }
  }
}

TEST_CASE("received covariance") {
  SystemConfig cfg = testutil::tiny_config(2, 2);
  Rng rng(2);
  const ChannelEstimate est = testutil::random_estimate(cfg, rng);
  const PhaseCodebook book(cfg.bits);
  const DistortionConstants dc = distortion_constants(cfg.bits);

  SECTION("ideal reduction") {
    SystemConfig ideal = cfg;
    ideal.beta_t = ideal.beta_r = 0.0;
    ChannelEstimate e2 = est;
    e2.sigma_d_sq = e2.sigma_m_sq = 0.0;
    const Precoder w = testutil::random_feasible_precoder(ideal, rng);
    const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
    const auto b = received_covariance(w, pv, e2, ideal, kContinuous);
    const CMat want = b.h_bar_theta * w.w * w.w.adjoint() * b.h_bar_theta.adjoint() +
                      ideal.noise_var * CMat::Identity(2, 2);
    CHECK((b.y_total - want).norm() < 1e-12 * want.norm());
  }

  SECTION("Hermitian with noise-floor eigenvalue bound") {
    for (int i = 0; i < 10; ++i) {
      const Precoder w = testutil::random_feasible_precoder(cfg, rng);
      const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
      const auto b = received_covariance(w, pv, est, cfg, dc);
      CHECK((b.y_total - b.y_total.adjoint()).norm() < 1e-12 * b.y_total.norm());
      Eigen::SelfAdjointEigenSolver<CMat> es(b.y_total, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >=
            (1.0 + cfg.beta_r * cfg.beta_r) * cfg.noise_var - 1e-10);
    }
  }

  SECTION("matches the term-by-term oracle") {
    for (int i = 0; i < 10; ++i) {
      const Precoder w = testutil::random_feasible_precoder(cfg, rng);
      const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
      const auto b = received_covariance(w, pv, est, cfg, dc);
      const CMat want = oracle_y_total(w.w, pv.theta, est, cfg, dc);
      CHECK((b.y_total - want).norm() < 1e-12 * want.norm());
    }
  }
}

TEST_CASE("Wiener equalizer") {
  SECTION("scalar case gives 1/(1+1)") {
    SystemConfig cfg = testutil::tiny_config(1, 1, 2);
    cfg.noise_var = 1.0;
    cfg.beta_t = cfg.beta_r = 0.0;
    ChannelEstimate est;
    est.h_d_bar = CMat::Constant(1, 1, cplx{1.0, 0.0});
    est.g_bars = {CMat::Zero(1, 1)};
    const Precoder w{CMat::Constant(1, 1, cplx{1.0, 0.0})};
    const auto pv = identity_phase_vector(1, phase_codebook(2));
    const Equalizer c = wiener_equalizer(w, pv, est, cfg, kContinuous);
    CHECK(std::abs(c.c(0, 0) - cplx{0.5, 0.0}) < 1e-12);
    CHECK(g_mse(w, pv, est, cfg, kContinuous) == Catch::Approx(0.5).epsilon(1e-12));
  }

  SECTION("ideal reduction equals the textbook MMSE receiver") {
    SystemConfig cfg = testutil::tiny_config(3, 4);
    cfg.beta_t = cfg.beta_r = 0.0;
    Rng rng(3);
    ChannelEstimate est = testutil::random_estimate(cfg, rng);
    est.sigma_d_sq = est.sigma_m_sq = 0.0;
    const PhaseCodebook book(cfg.bits);
    const Precoder w = testutil::random_feasible_precoder(cfg, rng);
    const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
    const Equalizer c = wiener_equalizer(w, pv, est, cfg, kContinuous);
    const CMat h = effective_channel(est, pv, kContinuous);
    const CMat y = h * w.w * w.w.adjoint() * h.adjoint() +
                   cfg.noise_var * CMat::Identity(cfg.n_rx, cfg.n_rx);
    const CMat mmse = w.w.adjoint() * h.adjoint() * y.inverse();
    CHECK((c.c - mmse).norm() < 1e-10 * mmse.norm());
  }

  SECTION("first-order optimality under random perturbations") {
    SystemConfig cfg = testutil::tiny_config(2, 4);
    Rng rng(4);
    const ChannelEstimate est = testutil::random_estimate(cfg, rng);
    const DistortionConstants dc = distortion_constants(cfg.bits);
    const PhaseCodebook book(cfg.bits);
    const Precoder w = testutil::random_feasible_precoder(cfg, rng);
    const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
    const Equalizer c0 = wiener_equalizer(w, pv, est, cfg, dc);
    const double f0 = total_average_mse(c0, w, pv, est, cfg, dc);
    for (int i = 0; i < 25; ++i) {
      CMat dc_mat = rng.cgauss_matrix(cfg.n_streams, cfg.n_rx, 1.0);
      dc_mat *= 1e-4 / dc_mat.norm();
      const Equalizer c{c0.c + dc_mat};
      CHECK(total_average_mse(c, w, pv, est, cfg, dc) >= f0 - 1e-9);
    }
  }
}

TEST_CASE("total MSE and g_mse identities") {
  SystemConfig cfg = testutil::tiny_config(2, 4);
  Rng rng(5);
  const ChannelEstimate est = testutil::random_estimate(cfg, rng);
  const DistortionConstants dc = distortion_constants(cfg.bits);
  const PhaseCodebook book(cfg.bits);

  SECTION("zero equalizer leaves the identity term") {
    const Precoder w = testutil::random_feasible_precoder(cfg, rng);
    const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
    const Equalizer c{CMat::Zero(cfg.n_streams, cfg.n_rx)};
    CHECK(total_average_mse(c, w, pv, est, cfg, dc) ==
          Catch::Approx(double(cfg.n_streams)).epsilon(1e-14));
  }

  SECTION("zero precoder gives zero objective") {
    const Precoder w{CMat::Zero(cfg.n_tx, cfg.n_streams)};
    const PhaseVector pv = identity_phase_vector(cfg.n_ris, book);
    CHECK(g_mse(w, pv, est, cfg, dc) == Catch::Approx(0.0).margin(1e-14));
  }

  SECTION("f(C*) = d - g and global phase invariance") {
    for (int i = 0; i < 10; ++i) {
      const Precoder w = testutil::random_feasible_precoder(cfg, rng);
      const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
      const Equalizer c = wiener_equalizer(w, pv, est, cfg, dc);
      const double f = total_average_mse(c, w, pv, est, cfg, dc);
      const double g = g_mse(w, pv, est, cfg, dc);
      CHECK(std::abs(f - (cfg.n_streams - g)) < 1e-10);
      CHECK(g >= 0.0);
      CHECK(g < cfg.n_streams);

      const Precoder w_rot{std::polar(1.0, rng.uniform(-kPi, kPi)) * w.w};
      CHECK(g_mse(w_rot, pv, est, cfg, dc) == Catch::Approx(g).epsilon(1e-11));
    }
  }
}

TEST_CASE("conditioning guard rejects near-singular covariance") {
  SystemConfig cfg = testutil::tiny_config(2, 2);
  cfg.noise_var = 1e-300;
  cfg.beta_t = cfg.beta_r = 0.0;
  Rng rng(6);
  ChannelEstimate est = testutil::random_estimate(cfg, rng);
  est.sigma_d_sq = est.sigma_m_sq = 0.0;
  const PhaseCodebook book(cfg.bits);
  Precoder w = testutil::random_feasible_precoder(cfg, rng);
  w.w.col(1).setZero();  // rank-deficient signal part
  const PhaseVector pv = identity_phase_vector(cfg.n_ris, book);
  CHECK_THROWS_AS(wiener_equalizer(w, pv, est, cfg, kContinuous), numerical_error);
}

TEST_CASE("sampled MSE matrix") {
  SystemConfig cfg = testutil::tiny_config(2, 4);
  Rng rng(7);
  const ChannelEstimate est = testutil::random_estimate(cfg, rng);
  const PhaseCodebook book(cfg.bits);
  const DistortionConstants dc = distortion_constants(cfg.bits);
  const Precoder w = testutil::random_feasible_precoder(cfg, rng);
  const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
  const Equalizer c = wiener_equalizer(w, pv, est, cfg, dc);

  SECTION("hermitian positive semidefinite") {
    for (int i = 0; i < 10; ++i) {
      const TrueChannelSample s = sample_true_channel(est, cfg, rng);
      const CMat e = mse_matrix_sample(c, w, s, pv, cfg);
      Eigen::SelfAdjointEigenSolver<CMat> es(e, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }

  SECTION("no distortion leaves only the ideal part") {
    SystemConfig ideal = cfg;
    ideal.beta_t = ideal.beta_r = 0.0;
    const TrueChannelSample s = sample_true_channel(est, ideal, rng);
    CMat h_cas = s.h_d;
    for (int m = 0; m < ideal.n_ris; ++m)
      h_cas += pv.theta(m) * std::polar(1.0, s.phase_noise(m)) * s.g_list[size_t(m)];
    const CMat chw = c.c * h_cas * w.w;
    const CMat want =
        CMat::Identity(2, 2) - chw - chw.adjoint() +
        c.c *
            (h_cas * w.w * w.w.adjoint() * h_cas.adjoint() +
             ideal.noise_var * CMat::Identity(2, 2)) *
            c.c.adjoint();
    CHECK((mse_matrix_sample(c, w, s, pv, ideal) - hermitize(want)).norm() <
          1e-12 * want.norm());
  }

  SECTION("exact receiver-distortion model adds a PSD correction") {
    // The dropped cross term is beta_R^2 diag(beta_T^2 H Q2 H^H), so the
    // exact model can only increase the trace, and only slightly.
    for (int i = 0; i < 5; ++i) {
      const TrueChannelSample s = sample_true_channel(est, cfg, rng);
      const double a2 =
          mse_matrix_sample(c, w, s, pv, cfg, DistortionModel::A2Approx)
              .trace()
              .real();
      const double a1 =
          mse_matrix_sample(c, w, s, pv, cfg, DistortionModel::A1Exact)
              .trace()
              .real();
      CHECK(a1 >= a2 - 1e-14);
      CHECK(a1 - a2 <= 0.01 * a2);
    }
  }

  SECTION("per-sample Wiener trace matches the classical MMSE identity") {
    SystemConfig ideal = cfg;
    ideal.beta_t = ideal.beta_r = 0.0;
    const TrueChannelSample s = sample_true_channel(est, ideal, rng);
    CMat h_cas = s.h_d;
    for (int m = 0; m < ideal.n_ris; ++m)
      h_cas += pv.theta(m) * std::polar(1.0, s.phase_noise(m)) * s.g_list[size_t(m)];
    const CMat y = h_cas * w.w * w.w.adjoint() * h_cas.adjoint() +
                   ideal.noise_var * CMat::Identity(2, 2);
    const Equalizer cs{w.w.adjoint() * h_cas.adjoint() * y.inverse()};
    const double tr = mse_matrix_sample(cs, w, s, pv, ideal).trace().real();
    const double want =
        ideal.n_streams -
        (w.w.adjoint() * h_cas.adjoint() * y.inverse() * h_cas * w.w).trace().real();
    CHECK(tr == Catch::Approx(want).margin(1e-10));
  }
}

TEST_CASE("Monte-Carlo oracle validates the closed-form expectation") {
  SystemConfig cfg = testutil::tiny_config(2, 4, 2);
  Rng rng(8);
  const ChannelEstimate est = testutil::random_estimate(cfg, rng);
  const PhaseCodebook book(cfg.bits);
  const DistortionConstants dc = distortion_constants(cfg.bits);
  const Precoder w = testutil::random_feasible_precoder(cfg, rng);
  const PhaseVector pv = random_phase_vector(cfg.n_ris, book, rng);
  const Equalizer c = wiener_equalizer(w, pv, est, cfg, dc);

  SECTION("degenerate case has no randomness") {
    ChannelEstimate exact = est;
    exact.sigma_d_sq = exact.sigma_m_sq = 0.0;
    TrueChannelSample s;
    s.h_d = exact.h_d_bar;
    s.g_list = exact.g_bars;
    s.phase_noise = RVec::Zero(cfg.n_ris);
    const Equalizer ci = wiener_equalizer(w, pv, exact, cfg, kContinuous);
    const double sample_tr = mse_matrix_sample(ci, w, s, pv, cfg).trace().real();
    const double analytic = total_average_mse(ci, w, pv, exact, cfg, kContinuous);
    CHECK(std::abs(sample_tr - analytic) < 1e-10);
  }

  SECTION("sampled mean matches the analytic value within tolerance") {
    const double analytic = total_average_mse(c, w, pv, est, cfg, dc);
    auto [mean, se] = mc_average_mse(c, w, pv, est, cfg, 20000, rng);
    CHECK(std::abs(mean - analytic) <= std::max(3.0 * se, 0.01 * analytic));
  }

  SECTION("standard error shrinks like 1/sqrt(n)") {
    auto [m1, se1] = mc_average_mse(c, w, pv, est, cfg, 4000, rng);
    auto [m2, se2] = mc_average_mse(c, w, pv, est, cfg, 8000, rng);
    CHECK(se2 / se1 == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(0.20));
  }
}
