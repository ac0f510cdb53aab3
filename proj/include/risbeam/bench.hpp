// Experiment harness: benchmark scheme implementations, seeded Monte-Carlo
// sweeps over system parameters with concurrent trials, ANMSE aggregation and
// CSV emission, plus the key-value config-file format used by the CLI.
#ifndef RISBEAM_BENCH_HPP
#define RISBEAM_BENCH_HPP

#include "risbeam/analysis.hpp"
#include "risbeam/solver.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace risbeam {

// Codebook resolution used to emulate continuous phase shifts.
inline constexpr int kContinuousBits = 14;

enum class Scheme {
  AoMm,
  AoRga,
  PerfectHardware,
  PerfectCsi,
  RandomPhase,
  IdentityPhase,
  Nonrobust,
};

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::AoMm: return "ao-mm";
    case Scheme::AoRga: return "ao-rga";
    case Scheme::PerfectHardware: return "perfect-hardware";
    case Scheme::PerfectCsi: return "perfect-csi";
    case Scheme::RandomPhase: return "random-phase";
    case Scheme::IdentityPhase: return "identity-phase";
    case Scheme::Nonrobust: return "nonrobust";
  }
  return "?";
}

inline std::vector<Scheme> all_schemes() {
  return {Scheme::AoMm,        Scheme::AoRga,         Scheme::PerfectHardware,
          Scheme::PerfectCsi,  Scheme::RandomPhase,   Scheme::IdentityPhase,
          Scheme::Nonrobust};
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : all_schemes())
    if (name == scheme_name(s)) return s;
  throw config_error("unknown scheme '" + name + "'");
}

enum class SweepVariable { PowerDbm, BetaR, BetaT, SigmaMSq, Bits, NRis };

inline const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::PowerDbm: return "power_dbm";
    case SweepVariable::BetaR: return "beta_r";
    case SweepVariable::BetaT: return "beta_t";
    case SweepVariable::SigmaMSq: return "sigma_m_sq";
    case SweepVariable::Bits: return "bits";
    case SweepVariable::NRis: return "n_ris";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& name) {
  for (SweepVariable v :
       {SweepVariable::PowerDbm, SweepVariable::BetaR, SweepVariable::BetaT,
        SweepVariable::SigmaMSq, SweepVariable::Bits, SweepVariable::NRis})
    if (name == sweep_variable_name(v)) return v;
  throw config_error("unknown sweep variable '" + name + "'");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::PowerDbm;
  std::vector<double> values{20.0};
  int trials = 100;
  std::uint64_t seed = 1;
};

struct SweepRow {
  std::string variable;
  double value = 0.0;
  std::string scheme;
  double anmse_mean = 0.0;
  double anmse_std = 0.0;
  double mean_iterations = 0.0;
  double mean_wallclock_s = 0.0;
  int n_ok = 0;      // bookkeeping only, not emitted
  int n_failed = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

/// Solve one instance under the given scheme. Bound schemes (perfect
/// hardware / perfect CSI) are designed and evaluated in their idealized
/// world; the nonrobust scheme is designed assuming ideal conditions and
/// evaluated under the true impaired objective.
inline BeamformingSolution run_scheme(Scheme scheme, const ChannelEstimate& est,
                                      const SystemConfig& cfg,
                                      const DistortionConstants& consts,
                                      Rng& rng, const SolverOptions& opts = {}) {
  switch (scheme) {
    case Scheme::AoMm:
    case Scheme::AoRga: {
      const PhaseCodebook book(cfg.bits);
      const RisMethod method =
          scheme == Scheme::AoMm ? RisMethod::MM : RisMethod::RGA;
      const Initial init = ideal_init(est, cfg, consts, book, method, opts);
      return ao_solve(est, cfg, consts, book, method, opts, init);
    }
    case Scheme::PerfectHardware: {
      SystemConfig c2 = cfg;
      c2.beta_t = 0.0;
      c2.beta_r = 0.0;
      c2.bits = kContinuousBits;
      const DistortionConstants dc2 = distortion_constants(c2.bits);
      const PhaseCodebook book(c2.bits);
      const Initial init = ideal_init(est, c2, dc2, book, RisMethod::MM, opts);
      return ao_solve(est, c2, dc2, book, RisMethod::MM, opts, init);
    }
    case Scheme::PerfectCsi: {
      SystemConfig c2 = cfg;
      c2.sigma_d_sq = 0.0;
      c2.sigma_m_sq = 0.0;
      ChannelEstimate e2 = est;
      e2.sigma_d_sq = 0.0;
      e2.sigma_m_sq = 0.0;
      const PhaseCodebook book(cfg.bits);
      const Initial init = ideal_init(e2, c2, consts, book, RisMethod::MM, opts);
      return ao_solve(e2, c2, consts, book, RisMethod::MM, opts, init);
    }
    case Scheme::RandomPhase:
    case Scheme::IdentityPhase: {
      const PhaseCodebook book(cfg.bits);
      PhaseVector pv = scheme == Scheme::RandomPhase
                           ? random_phase_vector(cfg.n_ris, book, rng)
                           : identity_phase_vector(cfg.n_ris, book);
      const Initial init = init_for_phases(est, cfg, consts, std::move(pv));
      return ao_solve(est, cfg, consts, book, RisMethod::Fixed, opts, init);
    }
    case Scheme::Nonrobust: {
      SystemConfig cid = cfg;
      cid.beta_t = 0.0;
      cid.beta_r = 0.0;
      cid.sigma_d_sq = 0.0;
      cid.sigma_m_sq = 0.0;
      cid.bits = kContinuousBits;
      ChannelEstimate eid = est;
      eid.sigma_d_sq = 0.0;
      eid.sigma_m_sq = 0.0;
      const DistortionConstants dcid = distortion_constants(cid.bits);
      const PhaseCodebook bookid(cid.bits);
      const Initial init = ideal_init(eid, cid, dcid, bookid, RisMethod::MM, opts);
      BeamformingSolution designed =
          ao_solve(eid, cid, dcid, bookid, RisMethod::MM, opts, init);

      const PhaseCodebook book(cfg.bits);
      RVec phases(cfg.n_ris);
      for (int m = 0; m < cfg.n_ris; ++m)
        phases(m) = book.nearest(designed.theta.phases(m));

      BeamformingSolution sol;
      sol.ris_method = RisMethod::MM;
      sol.theta = make_phase_vector(std::move(phases));
      sol.w = std::move(designed.w);
      const double target = cfg.power / (1.0 + cfg.beta_t * cfg.beta_t);
      const double pw = (sol.w.w.adjoint() * sol.w.w).trace().real();
      if (pw > target * (1.0 + 1e-12)) sol.w.w *= std::sqrt(target / pw);

      sol.objective = g_mse(sol.w, sol.theta, est, cfg, consts);
      sol.anmse = (cfg.n_streams - sol.objective) / cfg.n_streams;
      sol.trace = {sol.objective};
      sol.iterations = designed.iterations;
      sol.c = wiener_equalizer(sol.w, sol.theta, est, cfg, consts);
      return sol;
    }
  }
  throw config_error("run_scheme: unreachable scheme");
}

inline SystemConfig apply_sweep_value(SystemConfig cfg, SweepVariable var,
                                      double value) {
  switch (var) {
    case SweepVariable::PowerDbm: cfg.power = dbm_to_watts(value); break;
    case SweepVariable::BetaR: cfg.beta_r = value; break;
    case SweepVariable::BetaT: cfg.beta_t = value; break;
    case SweepVariable::SigmaMSq: cfg.sigma_m_sq = value; break;
    case SweepVariable::Bits: cfg.bits = static_cast<int>(std::lround(value)); break;
    case SweepVariable::NRis: cfg.n_ris = static_cast<int>(std::lround(value)); break;
  }
  return cfg;
}

inline int worker_count() {
  if (const char* env = std::getenv("RRB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Run every (value, trial, scheme) cell: fresh channels per trial from the
/// seeded stream, schemes share the trial's channels, trials run concurrently.
/// Failed trials are counted and excluded from the aggregates.
inline SweepReport run_sweep(const SweepSpec& spec, const SystemConfig& base_cfg,
                             const Geometry& geom,
                             const std::vector<Scheme>& schemes,
                             const SolverOptions& opts = {}) {
  if (spec.values.empty()) throw config_error("run_sweep: empty value list");
  if (spec.trials < 1) throw config_error("run_sweep: trials must be >= 1");
  if (schemes.empty()) throw config_error("run_sweep: no schemes selected");

  const std::size_t n_values = spec.values.size();
  const std::size_t n_schemes = schemes.size();
  std::vector<SystemConfig> cfgs;
  cfgs.reserve(n_values);
  for (double v : spec.values)
    cfgs.push_back(validate_config(apply_sweep_value(base_cfg, spec.variable, v)));

  struct Cell {
    double anmse = 0.0;
    double iterations = 0.0;
    double wall = 0.0;
    bool ok = false;
  };
  std::vector<Cell> cells(n_values * spec.trials * n_schemes);
  const auto cell_at = [&](std::size_t v, std::size_t t, std::size_t s) -> Cell& {
    return cells[(v * spec.trials + t) * n_schemes + s];
  };

  const std::size_t n_tasks = n_values * spec.trials;
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t v_idx = task / spec.trials;
      const std::size_t t_idx = task % spec.trials;
      const SystemConfig& cfg = cfgs[v_idx];
      const DistortionConstants dc = distortion_constants(cfg.bits);
      Rng chan_rng = Rng::derive(spec.seed, {0xC0DEu, v_idx, t_idx});
      const LoSAngles angles = random_los_angles(cfg.n_ris, chan_rng);
      const ChannelEstimate est = make_channel_estimate(cfg, geom, angles, chan_rng);
      for (std::size_t s_idx = 0; s_idx < n_schemes; ++s_idx) {
        Rng scheme_rng = Rng::derive(spec.seed, {0x5C4Eu, v_idx, t_idx, s_idx});
        Cell& cell = cell_at(v_idx, t_idx, s_idx);
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const BeamformingSolution sol =
              run_scheme(schemes[s_idx], est, cfg, dc, scheme_rng, opts);
          cell.anmse = sol.anmse;
          cell.iterations = sol.iterations;
          cell.ok = true;
        } catch (const numerical_error&) {
          cell.ok = false;
        }
        cell.wall = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      }
    }
  };

  const int n_threads =
      std::min<std::size_t>(worker_count(), std::max<std::size_t>(n_tasks, 1));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  SweepReport report;
  report.rows.reserve(n_values * n_schemes);
  for (std::size_t v = 0; v < n_values; ++v) {
    for (std::size_t s = 0; s < n_schemes; ++s) {
      SweepRow row;
      row.variable = sweep_variable_name(spec.variable);
      row.value = spec.values[v];
      row.scheme = scheme_name(schemes[s]);
      double sum = 0.0, sum_it = 0.0, sum_wall = 0.0;
      for (int t = 0; t < spec.trials; ++t) {
        const Cell& c = cell_at(v, t, s);
        if (!c.ok) {
          ++row.n_failed;
          continue;
        }
        ++row.n_ok;
        sum += c.anmse;
        sum_it += c.iterations;
        sum_wall += c.wall;
      }
      if (row.n_ok > 0) {
        row.anmse_mean = sum / row.n_ok;
        row.mean_iterations = sum_it / row.n_ok;
        row.mean_wallclock_s = sum_wall / row.n_ok;
        double ss = 0.0;
        for (int t = 0; t < spec.trials; ++t) {
          const Cell& c = cell_at(v, t, s);
          if (!c.ok) continue;
          const double d = c.anmse - row.anmse_mean;
          ss += d * d;
        }
        row.anmse_std = row.n_ok > 1 ? std::sqrt(ss / (row.n_ok - 1)) : 0.0;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

namespace detail {

inline std::string fmt_g10(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "variable,value,scheme,anmse_mean,anmse_std,mean_iterations,mean_wallclock_s";

inline void emit_csv(const SweepReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  out << kCsvHeader << "\n";
  for (const SweepRow& r : report.rows) {
    out << r.variable << ',' << detail::fmt_g10(r.value) << ',' << r.scheme << ','
        << detail::fmt_g10(r.anmse_mean) << ',' << detail::fmt_g10(r.anmse_std)
        << ',' << detail::fmt_g10(r.mean_iterations) << ','
        << detail::fmt_g10(r.mean_wallclock_s) << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

inline SweepReport parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("parse_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("parse_csv: bad header in '" + path + "'");
  SweepReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    SweepRow r;
    std::getline(ss, r.variable, ',');
    std::getline(ss, field, ',');
    r.value = std::stod(field);
    std::getline(ss, r.scheme, ',');
    std::getline(ss, field, ',');
    r.anmse_mean = std::stod(field);
    std::getline(ss, field, ',');
    r.anmse_std = std::stod(field);
    std::getline(ss, field, ',');
    r.mean_iterations = std::stod(field);
    std::getline(ss, field, ',');
    r.mean_wallclock_s = std::stod(field);
    report.rows.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines mirroring the system, geometry and sweep
// fields; power and noise are given in dBm at this boundary.

struct BenchConfig {
  SystemConfig sys;
  Geometry geom;
  SweepSpec sweep;
};

inline SystemConfig desk_scale_config() {
  SystemConfig cfg;
  cfg.n_tx = 4;
  cfg.n_rx = 4;
  cfg.n_streams = 4;
  cfg.n_ris = 16;
  return cfg;
}

inline SystemConfig paper_scale_config() { return SystemConfig{}; }

inline BenchConfig default_bench_config() {
  BenchConfig bc;
  bc.sys = desk_scale_config();
  return bc;
}

namespace detail {

inline Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  std::stringstream ss(text);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ','))
      throw config_error("expected 3 comma-separated coordinates, got '" + text + "'");
    v(i) = std::stod(part);
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline BenchConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  BenchConfig bc = default_bench_config();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) +
                         ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));

    if (key == "n_tx") bc.sys.n_tx = std::stoi(val);
    else if (key == "n_rx") bc.sys.n_rx = std::stoi(val);
    else if (key == "n_streams") bc.sys.n_streams = std::stoi(val);
    else if (key == "n_ris") bc.sys.n_ris = std::stoi(val);
    else if (key == "bits") bc.sys.bits = std::stoi(val);
    else if (key == "power_dbm") bc.sys.power = dbm_to_watts(std::stod(val));
    else if (key == "noise_dbm") bc.sys.noise_var = dbm_to_watts(std::stod(val));
    else if (key == "beta_t") bc.sys.beta_t = std::stod(val);
    else if (key == "beta_r") bc.sys.beta_r = std::stod(val);
    else if (key == "sigma_d_sq") bc.sys.sigma_d_sq = std::stod(val);
    else if (key == "sigma_m_sq") bc.sys.sigma_m_sq = std::stod(val);
    else if (key == "bs_pos") bc.geom.bs_pos = detail::parse_vec3(val);
    else if (key == "ris_pos") bc.geom.ris_pos = detail::parse_vec3(val);
    else if (key == "user_pos") bc.geom.user_pos = detail::parse_vec3(val);
    else if (key == "pl0_db") bc.geom.pl0_db = std::stod(val);
    else if (key == "alpha_bu") bc.geom.alpha_bu = std::stod(val);
    else if (key == "alpha_br") bc.geom.alpha_br = std::stod(val);
    else if (key == "alpha_ru") bc.geom.alpha_ru = std::stod(val);
    else if (key == "shadow_std_db") bc.geom.shadow_std_db = std::stod(val);
    else if (key == "variable") bc.sweep.variable = parse_sweep_variable(val);
    else if (key == "values") bc.sweep.values = detail::parse_list(val);
    else if (key == "trials") bc.sweep.trials = std::stoi(val);
    else if (key == "seed") bc.sweep.seed = std::stoull(val);
    else throw config_error("config line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
  }
  validate_config(bc.sys);
  return bc;
}

}  // namespace risbeam

#endif  // RISBEAM_BENCH_HPP
