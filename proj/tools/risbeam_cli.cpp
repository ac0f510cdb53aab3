// Command-line front end: single-instance solves, Monte-Carlo sweeps with CSV
// output, bound/floor evaluation, and a quick self-test of the core oracles.
#include "risbeam/risbeam.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace risbeam;

struct CommonArgs {
  std::string config_path;
  std::string schemes = "ao-mm";
  int trials = -1;
  std::uint64_t seed = 1;
  std::string out_path = "sweep.csv";
  std::string ris_method = "mm";
  bool paper_scale = false;
};

BenchConfig load_config(const CommonArgs& args) {
  BenchConfig bc = args.config_path.empty() ? default_bench_config()
                                            : parse_config_file(args.config_path);
  if (args.paper_scale) {
    const SystemConfig scale = paper_scale_config();
    bc.sys.n_tx = scale.n_tx;
    bc.sys.n_rx = scale.n_rx;
    bc.sys.n_streams = scale.n_streams;
    bc.sys.n_ris = scale.n_ris;
    if (args.trials < 0) bc.sweep.trials = 500;
    std::cerr << "warning: paper-scale run (8x8, M=64, 500 trials by default) "
                 "may take hours\n";
  }
  if (args.trials > 0) bc.sweep.trials = args.trials;
  bc.sweep.seed = args.seed;
  validate_config(bc.sys);
  return bc;
}

std::vector<Scheme> parse_scheme_list(const std::string& csv) {
  std::vector<Scheme> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "all") return all_schemes();
    out.push_back(parse_scheme(part));
  }
  if (out.empty()) throw config_error("no schemes given");
  return out;
}

int cmd_solve(const CommonArgs& args) {
  const BenchConfig bc = load_config(args);
  const SystemConfig& cfg = bc.sys;
  const DistortionConstants dc = distortion_constants(cfg.bits);
  Rng rng = Rng::derive(args.seed, {0xC0DEu, 0, 0});
  const LoSAngles angles = random_los_angles(cfg.n_ris, rng);
  const ChannelEstimate est = make_channel_estimate(cfg, bc.geom, angles, rng);

  if (args.schemes.find(',') != std::string::npos)
    throw config_error("solve takes a single --scheme");
  Scheme scheme = parse_scheme(args.schemes);
  if (scheme == Scheme::AoMm && args.ris_method == "rga") scheme = Scheme::AoRga;
  Rng scheme_rng = Rng::derive(args.seed, {0x5C4Eu, 0, 0, 0});
  const BeamformingSolution sol = run_scheme(scheme, est, cfg, dc, scheme_rng);

  const double power = (1.0 + cfg.beta_t * cfg.beta_t) *
                       (sol.w.w.adjoint() * sol.w.w).trace().real();
  std::printf("scheme           : %s\n", scheme_name(scheme));
  std::printf("dimensions       : N_T=%d N_R=%d d=%d M=%d b=%d\n", cfg.n_tx,
              cfg.n_rx, cfg.n_streams, cfg.n_ris, cfg.bits);
  std::printf("objective g_mse  : %.8g\n", sol.objective);
  std::printf("ANMSE            : %.8g\n", sol.anmse);
  std::printf("outer iterations : %d\n", sol.iterations);
  std::printf("tx power / budget: %.6g / %.6g W\n", power, cfg.power);
  std::printf("g_mse trace      :");
  for (double g : sol.trace) std::printf(" %.6g", g);
  std::printf("\n");
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const BenchConfig bc = load_config(args);
  const std::vector<Scheme> schemes = parse_scheme_list(args.schemes);
  const SweepReport report = run_sweep(bc.sweep, bc.sys, bc.geom, schemes);
  emit_csv(report, args.out_path);
  std::printf("%-12s %-12s %-18s %-12s %-12s %s\n", "variable", "value",
              "scheme", "anmse_mean", "anmse_std", "trials(ok/fail)");
  for (const SweepRow& r : report.rows)
    std::printf("%-12s %-12.6g %-18s %-12.6g %-12.6g %d/%d\n",
                r.variable.c_str(), r.value, r.scheme.c_str(), r.anmse_mean,
                r.anmse_std, r.n_ok, r.n_failed);
  std::printf("wrote %s\n", args.out_path.c_str());
  return 0;
}

int cmd_analyze(const CommonArgs& args) {
  BenchConfig bc = load_config(args);
  SystemConfig cfg = bc.sys;
  cfg.n_rx = 1;
  cfg.n_streams = 1;
  validate_config(cfg);
  const DistortionConstants dc = distortion_constants(cfg.bits);

  Rng rng = Rng::derive(args.seed, {0xA11Au});
  const ChannelEstimate est =
      synthetic_estimate(cfg, rng, 1.0, 1.0 / cfg.n_ris, cfg.sigma_d_sq,
                         cfg.sigma_m_sq / cfg.n_ris);
  const PhaseCodebook book(cfg.bits);
  const PhaseVector ident = identity_phase_vector(cfg.n_ris, book);

  std::printf("HWI-only floor (N_T=%d, beta_T=%.3g, beta_R=%.3g): %.8g\n",
              cfg.n_tx, cfg.beta_t, cfg.beta_r,
              floor_hwi(cfg.n_tx, cfg.beta_t, cfg.beta_r));
  std::printf("CSI-only floor at identity phases             : %.8g\n",
              floor_csi(est, ident, est.sigma_d_sq, est.sigma_m_total()));
  if (cfg.n_ris >= cfg.n_tx)
    std::printf("phase-noise-only floor at identity phases     : %.8g\n",
                floor_phase_noise(est, ident, cfg.bits));
  std::printf("\n%-12s %-16s\n", "SNR [dB]", "MISO lower bound");
  for (double snr_db = 0.0; snr_db <= 60.0; snr_db += 10.0) {
    SystemConfig c2 = cfg;
    c2.noise_var = c2.power / db_to_linear(snr_db);
    std::printf("%-12.4g %-16.8g\n", snr_db, miso_lower_bound(est, c2, dc));
  }
  std::printf("%-12s %-16.8g\n", "floor", miso_floor(est, cfg, dc));
  return 0;
}

int selftest_check(const char* name, bool ok, int& failures) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
  if (!ok) ++failures;
  return failures;
}

int cmd_selftest() {
  int failures = 0;

  {
    const auto d1 = distortion_constants(1);
    const auto d2 = distortion_constants(2);
    selftest_check("distortion constants match closed forms",
                   std::abs(d1.eps_b - (1.0 - 4.0 / (kPi * kPi))) < 1e-12 &&
                       std::abs(d2.eps_b - (1.0 - 8.0 / (kPi * kPi))) < 1e-12,
                   failures);
  }

  SystemConfig cfg;
  cfg.n_tx = cfg.n_rx = cfg.n_streams = 2;
  cfg.n_ris = 4;
  cfg.bits = 2;
  cfg.power = 1.0;
  cfg.noise_var = 0.01;
  const DistortionConstants dc = distortion_constants(cfg.bits);
  const PhaseCodebook book(cfg.bits);
  Rng rng(7);
  const ChannelEstimate est = synthetic_estimate(cfg, rng, 1.0, 0.25, 0.01, 0.01);
  const Initial init = default_init(est, cfg, dc, book);

  {
    const Equalizer c = wiener_equalizer(init.w, init.theta, est, cfg, dc);
    const double analytic = total_average_mse(c, init.w, init.theta, est, cfg, dc);
    auto [mc, se] = mc_average_mse(c, init.w, init.theta, est, cfg, 20000, rng);
    selftest_check("closed-form average MSE agrees with Monte-Carlo sampling",
                   std::abs(mc - analytic) <
                       std::max(4.0 * se, 0.01 * std::abs(analytic)),
                   failures);
  }

  {
    const PrecoderSurrogate s = build_surrogate(init.w, init.theta, est, cfg, dc);
    const double tight = precoder_surrogate_value(s, init.w.w);
    const double g = g_mse(init.w, init.theta, est, cfg, dc);
    selftest_check("precoder surrogate is tight at its anchor",
                   std::abs(tight - g) < 1e-9 * std::max(1.0, std::abs(g)),
                   failures);
  }

  {
    const QuadraticSurrogate q = build_quadratic(init.w, init.theta, est, cfg, dc);
    const double tight = quadratic_surrogate_value(q, init.theta.theta);
    const double g = g_mse(init.w, init.theta, est, cfg, dc);
    selftest_check("phase surrogate is tight at its anchor",
                   std::abs(tight - g) < 1e-9 * std::max(1.0, std::abs(g)),
                   failures);
  }

  {
    const BeamformingSolution sol =
        ao_solve(est, cfg, dc, book, RisMethod::MM, {});
    bool monotone = true;
    for (std::size_t i = 1; i < sol.trace.size(); ++i)
      if (sol.trace[i] < sol.trace[i - 1] - 1e-9) monotone = false;
    selftest_check("alternating optimization is monotone", monotone, failures);
  }

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust RIS-aided MIMO beamforming solver and benchmark"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", args.config_path, "key=value config file");
    sub->add_option("--scheme", args.schemes,
                    "comma-separated scheme list (or 'all')");
    sub->add_option("--trials", args.trials, "Monte-Carlo trials per point");
    sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("--ris-method", args.ris_method, "mm or rga")
        ->check(CLI::IsMember({"mm", "rga"}));
    sub->add_flag("--paper-scale", args.paper_scale,
                  "run at the full-scale 8x8 / 64-element setup (slow)");
    if (with_out) sub->add_option("--out", args.out_path, "output CSV path");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one seeded instance");
  add_common(solve, false);
  CLI::App* sweep = app.add_subcommand("sweep", "run a Monte-Carlo sweep");
  add_common(sweep, true);
  CLI::App* analyze =
      app.add_subcommand("analyze", "evaluate MISO bounds and MSE floors");
  add_common(analyze, false);
  app.add_subcommand("selftest", "run quick oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (analyze->parsed()) return cmd_analyze(args);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
