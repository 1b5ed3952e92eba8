#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdlkg/checkpoint.hpp"
#include "fdlkg/config.hpp"
#include "fdlkg/ergodic.hpp"
#include "fdlkg/hash.hpp"
#include "fdlkg/measure_checks.hpp"

namespace fdlkg {

using ordered_json = nlohmann::ordered_json;

// Everything an experiment needs, resolved once from the [domain], [basis],
// [noise], [dynamics] and [run] sections. Experiment-specific sections are
// read by the runners; cfg.finish() then rejects whatever nobody consumed.
struct RunContext {
  ConfigMap cfg;
  DomainSpec domain;
  int padding = 2;
  SpectralBasis basis;
  NoiseSpec noise;
  double alpha = 0.1;
  double dt = 0.01;
  bool cubic = true;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
};

inline RunContext make_context(ConfigMap cfg) {
  RunContext ctx;
  const std::string kind = cfg.get_str("domain", "kind", "torus");
  if (kind == "torus")
    ctx.domain.kind = DomainKind::torus;
  else if (kind == "interval")
    ctx.domain.kind = DomainKind::interval;
  else
    throw config_error("config key [domain] kind: expected torus or interval, got " + kind);
  ctx.domain.dimension = static_cast<int>(cfg.get_long("domain", "dimension", 1));
  ctx.domain.mass_squared = cfg.get_double("domain", "mass_squared", 1.0);

  const int n_modes = static_cast<int>(cfg.get_long("basis", "n_modes", 17));
  ctx.padding = static_cast<int>(cfg.get_long("basis", "padding", 2));
  ctx.basis = build_basis(ctx.domain, n_modes, ctx.padding);

  const std::string profile = cfg.get_str("noise", "profile", "inverse_sq");
  if (profile == "inverse_sq") {
    ctx.noise = NoiseSpec::inverse_sq(ctx.basis);
  } else if (profile == "flat_first") {
    const int cutoff = static_cast<int>(cfg.get_long("noise", "cutoff", n_modes));
    const double amp = cfg.get_double("noise", "amplitude", 1.0);
    ctx.noise = NoiseSpec::flat_first(ctx.basis, cutoff, amp);
  } else if (profile == "custom") {
    ctx.noise = NoiseSpec::custom(ctx.basis, cfg.get_list("noise", "amplitudes", {}));
  } else {
    throw config_error("config key [noise] profile: unknown profile " + profile);
  }

  ctx.alpha = cfg.get_double("dynamics", "alpha", 0.1);
  ctx.dt = cfg.get_double("dynamics", "dt", 0.01);
  ctx.cubic = cfg.get_bool("dynamics", "cubic", true);
  if (!(ctx.alpha >= 0.0) || ctx.alpha > 1.0)
    throw config_error("config key [dynamics] alpha: needs 0 <= alpha <= 1");
  if (!(ctx.dt > 0.0)) throw config_error("config key [dynamics] dt: must be positive");

  ctx.seed = static_cast<std::uint64_t>(cfg.get_long("run", "seed", 1));
  ctx.threads = static_cast<int>(cfg.get_long("run", "threads", 1));
  if (ctx.threads < 1) throw config_error("config key [run] threads: must be >= 1");
  ctx.out_dir = cfg.get_str("run", "out", "out");
  ctx.cfg = std::move(cfg);
  return ctx;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << content;
}

inline std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline void write_csv(const std::string& dir, const std::string& name,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& col : columns)
    if (col.size() != rows) throw config_error("csv: ragged columns");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      s += (c ? "," : "") + detail::fmt_g(columns[c][r]);
    s += "\n";
  }
  detail::write_text_file((std::filesystem::path(dir) / name).string(), s);
}

inline ordered_json base_summary(const RunContext& ctx, const std::string& experiment) {
  ordered_json j;
  j["experiment"] = experiment;
  j["config_hash"] = git_blob_sha1(ctx.cfg.canonical());
  j["seed"] = ctx.seed;
  j["threads"] = ctx.threads;
  j["domain"] = {{"kind", ctx.domain.kind == DomainKind::torus ? "torus" : "interval"},
                 {"dimension", ctx.domain.dimension},
                 {"mass_squared", ctx.domain.mass_squared}};
  j["basis"] = {{"n_modes", ctx.basis.n_modes}, {"padding", ctx.padding}};
  j["noise"] = {{"profile", ctx.noise.profile},
                {"A0", ctx.noise.A0(ctx.basis)},
                {"A1", ctx.noise.A1(ctx.basis)}};
  j["alpha"] = ctx.alpha;
  return j;
}

inline void finalize_summary(const RunContext& ctx, ordered_json& j) {
  j["config"] = ctx.cfg.canonical();
  std::filesystem::create_directories(ctx.out_dir);
  detail::write_text_file((std::filesystem::path(ctx.out_dir) / "summary.json").string(),
                          j.dump(2) + "\n");
}

// Fast structural checks: orthonormality, the propagator semigroup, the
// stationary Lyapunov solution and the zero-noise reduction.
inline ordered_json run_selftest(RunContext& ctx) {
  ctx.cfg.finish();
  ordered_json j = base_summary(ctx, "selftest");
  ordered_json checks = ordered_json::array();
  bool all_ok = true;
  auto push = [&](const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    checks.push_back({{"name", name}, {"value", value}, {"tol", tol}, {"ok", ok}});
    all_ok = all_ok && ok;
  };

  const SpectralBasis& b = ctx.basis;
  double gram = 0.0;
  for (int i = 0; i < b.n_modes; ++i)
    for (int k = i; k < b.n_modes; ++k) {
      double s = 0.0;
      const auto ri = b.mode_row(i), rk = b.mode_row(k);
      for (int g = 0; g < b.n_grid; ++g) s += b.grid_w[g] * ri[g] * rk[g];
      gram = std::max(gram, std::abs(s - (i == k ? 1.0 : 0.0)));
    }
  push("basis_orthonormality", gram, 1e-10);

  const double omega = std::sqrt(b.omega_sq[b.n_modes / 2]);
  const StepLaw two = step_mean_cov(omega, 0.3, 0.9, 0.4);
  const StepLaw halves =
      compose(step_mean_cov(omega, 0.3, 0.9, 0.2), step_mean_cov(omega, 0.3, 0.9, 0.2));
  double semi = std::abs(two.T.a11 - halves.T.a11) + std::abs(two.T.a12 - halves.T.a12) +
                std::abs(two.Q.c11 - halves.Q.c11) + std::abs(two.Q.c22 - halves.Q.c22);
  push("propagator_semigroup", semi, 1e-11);

  const Cov2 S = stationary_cov(omega, 0.3, 0.9);
  const double wsq = omega * omega;
  const double lyap = std::abs(2.0 * S.c12) +
                      std::abs(S.c22 - wsq * S.c11 - 0.3 * wsq * S.c12) +
                      std::abs(-2.0 * wsq * S.c12 - 2.0 * 0.3 * wsq * S.c22 + 0.3 * 0.81);
  push("stationary_lyapunov", lyap, 1e-12);

  const NoiseSpec none = NoiseSpec::custom(b, std::vector<double>(b.n_modes, 0.0));
  SdeStepper sde(b, none, {ctx.dt, ctx.alpha, true});
  DeterministicStepper det(b, {ctx.dt, Scheme::lie, ctx.alpha, true});
  RngStream rng(ctx.seed, 0);
  FieldState ys = FieldState::zero(b.n_modes), yd = ys;
  ys.u[0] = yd.u[0] = 0.5;
  double dev = 0.0;
  for (int s = 0; s < 50; ++s) {
    sde.step(ys, rng);
    det.step(yd);
    for (int m = 0; m < b.n_modes; ++m)
      dev = std::max({dev, std::abs(ys.u[m] - yd.u[m]), std::abs(ys.v[m] - yd.v[m])});
  }
  push("zero_noise_reduction", dev, 0.0);

  j["checks"] = checks;
  j["passed"] = all_ok;
  finalize_summary(ctx, j);
  return j;
}

// Closed-form and Monte Carlo facts about the alpha-independent linear law.
inline ordered_json run_linear_check(RunContext& ctx) {
  const double t = ctx.cfg.get_double("linear", "t", 2.0);
  const double dt = ctx.cfg.get_double("linear", "dt", 0.02);
  const int n_paths = static_cast<int>(ctx.cfg.get_long("linear", "n_paths", 256));
  const double eps_frac = ctx.cfg.get_double("linear", "epsilon_frac", 0.5);
  ctx.cfg.finish();
  if (!(ctx.alpha > 0.0)) throw config_error("linear check needs alpha > 0");

  ordered_json j = base_summary(ctx, "linear-check");
  const auto rows = check_moment_bounds(ctx.basis, ctx.noise, ctx.alpha);
  ordered_json jrows = ordered_json::array();
  bool ok = true;
  for (const auto& r : rows) {
    jrows.push_back({{"p", r.p}, {"moment", r.moment}, {"bound", r.bound}, {"ok", r.ok}});
    ok = ok && r.ok;
  }
  j["stationary_moments"] = jrows;

  j["norm21_mean_finite_t"] = norm21_moment(ctx.basis, ctx.noise, ctx.alpha, t);
  j["norm21_mean_stationary"] = norm21_raw_moments(ctx.basis, ctx.noise, ctx.alpha)[0];

  const double cap = kappa(ctx.basis) / (2.0 * ctx.noise.A1(ctx.basis) * std::exp(1.0));
  const ExpControlReport ec = check_exponential_control(ctx.basis, ctx.noise, ctx.alpha,
                                                        eps_frac * cap, t, dt, n_paths, ctx.seed);
  j["exp_control"] = {{"epsilon", ec.epsilon}, {"estimate", ec.estimate},
                      {"se", ec.se},           {"bound", ec.bound},
                      {"ok", ec.ok}};
  j["passed"] = ok && ec.ok;
  finalize_summary(ctx, j);
  return j;
}

namespace detail {

inline FieldState initial_state(const RunContext& ctx) {
  const std::string init = ctx.cfg.get_str("simulate", "init", "single_mode");
  FieldState y = FieldState::zero(ctx.basis.n_modes);
  if (init == "rest") return y;
  if (init == "single_mode") {
    const int m = static_cast<int>(ctx.cfg.get_long("simulate", "init_mode", 1));
    const double amp = ctx.cfg.get_double("simulate", "init_amp", 1.0);
    if (m < 0 || m >= ctx.basis.n_modes) throw config_error("config key [simulate] init_mode: out of range");
    y.u[m] = amp;
    return y;
  }
  if (init == "random") {
    const double amp = ctx.cfg.get_double("simulate", "init_amp", 1.0);
    RngStream rng(ctx.seed, 0xF1E1Du);
    for (int m = 0; m < ctx.basis.n_modes; ++m) {
      y.u[m] = amp * rng.normal() / ctx.basis.omega_sq[m];
      y.v[m] = amp * rng.normal() / std::sqrt(ctx.basis.omega_sq[m]);
    }
    return y;
  }
  throw config_error("config key [simulate] init: expected rest, single_mode or random");
}

}  // namespace detail

// One trajectory of either the Hamiltonian or the damped driven flow, with the
// standard observable series on a checkpoint grid.
inline ordered_json run_simulate(RunContext& ctx) {
  const double T = ctx.cfg.get_double("simulate", "T", 10.0);
  const std::string scheme_s = ctx.cfg.get_str("simulate", "scheme", "strang");
  const bool stochastic = ctx.cfg.get_bool("simulate", "stochastic", false);
  const long stride = ctx.cfg.get_long("simulate", "observer_stride", 10);
  const bool want_ckpt = ctx.cfg.get_bool("simulate", "checkpoint", false);
  const FieldState y0 = detail::initial_state(ctx);
  ctx.cfg.finish();
  if (stride < 1) throw config_error("config key [simulate] observer_stride: must be >= 1");

  const SpectralBasis& b = ctx.basis;
  const std::vector<Observable> obs = {
      {"energy", [&](const FieldState& y) { return energy(y, b); }},
      {"norm10", [&](const FieldState& y) { return product_norm(y, 1, 0, b); }},
      {"norm21", [&](const FieldState& y) { return product_norm(y, 2, 1, b); }},
  };
  const long n_steps = std::llround(T / ctx.dt);

  ordered_json j = base_summary(ctx, "simulate");
  std::vector<double> times;
  std::vector<std::vector<double>> series(obs.size());
  FieldState yT;
  if (stochastic) {
    if (!(ctx.alpha > 0.0)) throw config_error("stochastic simulate needs alpha > 0");
    SdeStepper st(b, ctx.noise, {ctx.dt, ctx.alpha, ctx.cubic});
    RngStream rng(ctx.seed, 0);
    FieldState y = y0;
    times.push_back(0.0);
    for (std::size_t k = 0; k < obs.size(); ++k) series[k].push_back(obs[k].fn(y));
    for (long s = 1; s <= n_steps; ++s) {
      st.step(y, rng);
      check_finite(y, s * ctx.dt);
      if (s % stride == 0) {
        times.push_back(s * ctx.dt);
        for (std::size_t k = 0; k < obs.size(); ++k) series[k].push_back(obs[k].fn(y));
      }
    }
    yT = std::move(y);
  } else {
    Scheme sc;
    if (scheme_s == "strang")
      sc = Scheme::strang;
    else if (scheme_s == "lie")
      sc = Scheme::lie;
    else
      throw config_error("config key [simulate] scheme: expected strang or lie");
    DeterministicStepper st(b, {ctx.dt, sc, ctx.alpha, ctx.cubic});
    EvolveResult r = evolve(y0, st, n_steps, stride, obs);
    times = std::move(r.times);
    series = std::move(r.values);
    yT = std::move(r.final_state);
  }

  j["T"] = T;
  j["dt"] = ctx.dt;
  j["stochastic"] = stochastic;
  j["n_records"] = times.size();
  j["energy_initial"] = series[0].front();
  j["energy_final"] = series[0].back();
  j["energy_drift_rel"] =
      series[0].front() != 0.0
          ? std::abs(series[0].back() - series[0].front()) / std::abs(series[0].front())
          : 0.0;
  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "series.csv", {"t", "energy", "norm10", "norm21"},
            {times, series[0], series[1], series[2]});
  if (want_ckpt)
    write_checkpoint((std::filesystem::path(ctx.out_dir) / "checkpoint.bin").string(), b,
                     ctx.noise, {T}, {yT});
  finalize_summary(ctx, j);
  return j;
}

namespace detail {

struct StationaryData {
  StationarySamples run;
  std::vector<ScalarSample> scalars;
  EssInfo ess;
  bool want_checkpoint = true;
};

inline StationaryData stationary_core(RunContext& ctx, const std::string& section,
                                      double alpha, std::uint64_t stream) {
  StationaryRunConfig rc;
  rc.T = ctx.cfg.get_double(section, "T", 2000.0);
  rc.dt = ctx.cfg.get_double(section, "dt", ctx.dt);
  rc.burn_in = ctx.cfg.get_double(section, "burn_in", -1.0);
  rc.thin = ctx.cfg.get_double(section, "thin", -1.0);
  rc.cubic = ctx.cubic;
  // Consume the checkpoint flag here so runners sharing this section accept it.
  const bool want_ckpt = ctx.cfg.get_bool(section, "checkpoint", true);
  RngStream rng(ctx.seed, stream);
  StationaryData d;
  d.run = simulate_stationary(ctx.basis, ctx.noise, alpha, rc, rng);
  d.scalars = extract_scalars(d.run.states, ctx.basis, ctx.noise, alpha);
  d.ess = energy_ess(d.scalars);
  d.want_checkpoint = want_ckpt;
  return d;
}

inline ordered_json scalar_stats(const std::vector<double>& x, const EssInfo& ess) {
  double m = 0.0;
  for (double v : x) m += v;
  m = x.empty() ? 0.0 : m / x.size();
  return {{"mean", m}, {"se", se_with_ess(x, ess)}};
}

}  // namespace detail

// Long damped driven run from rest; the samples stand in for the invariant
// measure at this alpha.
inline ordered_json run_stationary(RunContext& ctx) {
  detail::StationaryData d = detail::stationary_core(ctx, "stationary", ctx.alpha, 0);
  const bool want_ckpt = d.want_checkpoint;
  ctx.cfg.finish();

  ordered_json j = base_summary(ctx, "stationary");
  j["n_steps"] = d.run.n_steps;
  j["burn_in"] = d.run.burn_in;
  j["thin"] = d.run.thin;
  j["n_samples"] = d.run.states.size();
  j["low_sample_warning"] = d.run.low_sample_warning;
  j["autocorr_time"] = d.ess.tau;
  j["ess"] = d.ess.ess;
  j["energy"] = detail::scalar_stats(pick(d.scalars, &ScalarSample::E), d.ess);
  j["g1"] = detail::scalar_stats(pick(d.scalars, &ScalarSample::G1), d.ess);
  j["l1"] = detail::scalar_stats(pick(d.scalars, &ScalarSample::L1), d.ess);
  j["h21_sq"] = detail::scalar_stats(pick(d.scalars, &ScalarSample::H21sq), d.ess);

  const BalanceL1Report bal = check_balance_l1(d.scalars, ctx.basis, ctx.noise);
  j["balance_l1"] = {{"target", bal.target}, {"estimate", bal.estimate}, {"se", bal.se},
                     {"z", bal.z},           {"passed", bal.passed},
                     {"inconclusive", bal.inconclusive}};

  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "scalars.csv", {"t", "energy", "g1", "l1", "h21_sq", "u_l2"},
            {d.run.times, pick(d.scalars, &ScalarSample::E), pick(d.scalars, &ScalarSample::G1),
             pick(d.scalars, &ScalarSample::L1), pick(d.scalars, &ScalarSample::H21sq),
             pick(d.scalars, &ScalarSample::u_l2)});
  if (want_ckpt)
    write_checkpoint((std::filesystem::path(ctx.out_dir) / "checkpoint.bin").string(), ctx.basis,
                     ctx.noise, d.run.times, d.run.states);
  finalize_summary(ctx, j);
  return j;
}

// Per-trajectory residual of the modified-energy identity, at two resolutions.
inline ordered_json run_ito(RunContext& ctx) {
  ItoConfig ic;
  ic.T = ctx.cfg.get_double("ito", "T", 2.0);
  ic.dt = ctx.cfg.get_double("ito", "dt", 0.04);
  ic.n_checkpoints = static_cast<int>(ctx.cfg.get_long("ito", "checkpoints", 10));
  ic.ensemble = static_cast<int>(ctx.cfg.get_long("ito", "ensemble", 20000));
  ic.threads = ctx.threads;
  const double amp = ctx.cfg.get_double("ito", "init_amp", 0.5);
  ctx.cfg.finish();
  if (!(ctx.alpha > 0.0)) throw config_error("ito check needs alpha > 0");

  FieldState y0 = FieldState::zero(ctx.basis.n_modes);
  y0.u[std::min(1, ctx.basis.n_modes - 1)] = amp;
  const ItoReport rep = check_ito_identity_g1(ctx.basis, ctx.noise, ctx.alpha, y0, ic, ctx.seed);

  ordered_json j = base_summary(ctx, "ito");
  j["T"] = ic.T;
  j["dt_coarse"] = ic.dt;
  j["ensemble"] = ic.ensemble;
  j["max_abs_z_extrapolated"] = rep.max_abs_z_extrapolated;
  j["bias_ratio"] = rep.bias_ratio;
  j["passed_residual"] = rep.passed_residual;
  j["passed_ratio"] = rep.passed_ratio;
  j["passed"] = rep.passed_residual && rep.passed_ratio;
  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "residuals.csv",
            {"t", "resid_coarse", "se_coarse", "resid_fine", "se_fine"},
            {rep.times, rep.resid_coarse, rep.se_coarse, rep.resid_fine, rep.se_fine});
  finalize_summary(ctx, j);
  return j;
}

// Stationary balance laws, moment bounds, density regularity and tails.
inline ordered_json run_balance(RunContext& ctx) {
  const double bump_center = ctx.cfg.get_double("balance", "bump_center", -1.0);
  const double bump_width = ctx.cfg.get_double("balance", "bump_width", -1.0);
  double sigma = ctx.cfg.get_double("balance", "sigma_tail", -1.0);
  detail::StationaryData d = detail::stationary_core(ctx, "stationary", ctx.alpha, 0);
  ctx.cfg.finish();

  ordered_json j = base_summary(ctx, "balance");
  j["n_samples"] = d.run.states.size();
  j["ess"] = d.ess.ess;

  const BalanceL1Report bal = check_balance_l1(d.scalars, ctx.basis, ctx.noise);
  j["balance_l1"] = {{"target", bal.target}, {"estimate", bal.estimate}, {"se", bal.se},
                     {"z", bal.z},           {"passed", bal.passed},
                     {"inconclusive", bal.inconclusive}};

  ordered_json jm = ordered_json::array();
  bool moments_ok = true;
  for (const auto& r : moment_bound_report(d.scalars, ctx.basis, ctx.noise)) {
    jm.push_back({{"p", r.p}, {"estimate", r.estimate}, {"se", r.se}, {"bound", r.bound},
                  {"passed", r.passed}});
    moments_ok = moments_ok && r.passed;
  }
  j["g1_moment_bounds"] = jm;

  auto es = pick(d.scalars, &ScalarSample::E);
  std::sort(es.begin(), es.end());
  const double med = es[es.size() / 2];
  const double spread = es[es.size() * 9 / 10] - es[es.size() / 10];
  const BumpFunction bump(bump_center > 0.0 ? bump_center : med,
                          bump_width > 0.0 ? bump_width : std::max(spread, 1e-6));
  const BalanceIdentityReport rep = check_balance_identity(d.scalars, ctx.basis, ctx.noise, bump);
  ordered_json jv = ordered_json::array();
  for (const auto& v : rep.variants)
    jv.push_back({{"a0_coeff", v.a0_coeff}, {"sign", v.sign}, {"residual", v.residual},
                  {"se", v.se}, {"z", v.z}});
  j["balance_identity"] = {{"bump_center", rep.bump_center}, {"bump_width", rep.bump_width},
                           {"variants", jv},                 {"vanishing_index", rep.vanishing_index},
                           {"passed", rep.passed},           {"inconclusive", rep.inconclusive}};

  const DensityReport dens = hamiltonian_density_report(d.scalars);
  j["density"] = {{"max_mass_coarse", dens.max_mass_coarse},
                  {"max_mass_fine", dens.max_mass_fine},
                  {"halving_ratio", dens.halving_ratio},
                  {"atom_fraction", dens.atom_fraction},
                  {"passed_halving", dens.passed_halving},
                  {"passed_no_atom", dens.passed_no_atom}};

  if (sigma <= 0.0) sigma = 0.25 * gamma0(ctx.basis) / ctx.noise.A0(ctx.basis);
  const TailReport tail = tail_check(d.scalars, sigma);
  j["tail"] = {{"sigma", tail.sigma},
               {"fit_rate", tail.fit_rate},
               {"fit_se", tail.fit_se},
               {"exp_moment", tail.exp_moment},
               {"exp_moment_se", tail.exp_moment_se},
               {"passed_rate", tail.passed_rate},
               {"passed_envelope", tail.passed_envelope},
               {"passed", tail.passed}};

  j["passed"] = bal.passed && moments_ok && rep.passed && dens.passed_halving &&
                dens.passed_no_atom && tail.passed;
  j["inconclusive"] = bal.inconclusive || rep.inconclusive;
  finalize_summary(ctx, j);
  return j;
}

namespace detail {

struct CouplingPartial {
  std::vector<double> sup_disc_sq, sup_z;
  long n_indicator = 0, n_exceed_given_indicator = 0;
};

}  // namespace detail

// Pathwise comparison of the damped driven flow against the Hamiltonian flow
// on shared noise, repeated over initial data drawn from the stationary run.
inline ordered_json run_coupling(RunContext& ctx) {
  const std::vector<double> alphas =
      ctx.cfg.get_list("coupling", "alphas", {0.4, 0.2, 0.1, 0.05});
  const double T = ctx.cfg.get_double("coupling", "T", 1.0);
  const double dt = ctx.cfg.get_double("coupling", "dt", 0.01);
  const double r = ctx.cfg.get_double("coupling", "r", 1.0);
  const double delta = ctx.cfg.get_double("coupling", "delta", 0.1);
  const int n_rep = static_cast<int>(ctx.cfg.get_long("coupling", "n_rep", 200));
  const double warm_T = ctx.cfg.get_double("coupling", "warm_T", 200.0);
  ctx.cfg.finish();

  ordered_json j = base_summary(ctx, "coupling");
  ordered_json rows = ordered_json::array();
  std::vector<double> col_alpha, col_mean, col_q90, col_ind, col_exceed;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    // initial data from the invariant measure at this alpha
    StationaryRunConfig rc;
    rc.T = warm_T;
    rc.dt = dt;
    rc.burn_in = 0.5 * warm_T;
    rc.thin = std::max(dt, (0.5 * warm_T) / n_rep);
    rc.cubic = ctx.cubic;
    RngStream warm_rng(ctx.seed, 0x7A00u + ai);
    const StationarySamples warm = simulate_stationary(ctx.basis, ctx.noise, alpha, rc, warm_rng);
    if (warm.states.empty()) throw config_error("coupling: warm-up produced no samples");

    auto partials = parallel_chunks<detail::CouplingPartial>(
        static_cast<std::size_t>(n_rep), ctx.threads, 16,
        [&](std::size_t, std::size_t lo, std::size_t hi, detail::CouplingPartial& part) {
          for (std::size_t rep = lo; rep < hi; ++rep) {
            const FieldState& w = warm.states[rep % warm.states.size()];
            RngStream rng(ctx.seed, (0xC0u + ai) * 65536u + rep);
            const CouplingResult res =
                coupled_pair_evolve(w, ctx.basis, ctx.noise, alpha, T, dt, r, rng);
            part.sup_disc_sq.push_back(res.sup_disc_sq);
            part.sup_z.push_back(res.sup_z_h2);
            if (res.indicator) {
              ++part.n_indicator;
              if (res.sup_disc_sq > delta) ++part.n_exceed_given_indicator;
            }
          }
        });

    std::vector<double> sup;
    long n_ind = 0, n_exc = 0;
    for (const auto& p : partials) {
      sup.insert(sup.end(), p.sup_disc_sq.begin(), p.sup_disc_sq.end());
      n_ind += p.n_indicator;
      n_exc += p.n_exceed_given_indicator;
    }
    std::sort(sup.begin(), sup.end());
    double mean = 0.0;
    for (double x : sup) mean += x;
    mean /= sup.size();
    const double q90 = sup[static_cast<std::size_t>(0.9 * (sup.size() - 1))];
    const double frac_ind = static_cast<double>(n_ind) / n_rep;
    const double frac_exc = n_ind > 0 ? static_cast<double>(n_exc) / n_ind : 0.0;
    rows.push_back({{"alpha", alpha}, {"mean_sup_disc_sq", mean}, {"q90_sup_disc_sq", q90},
                    {"frac_indicator", frac_ind}, {"frac_exceed_given_indicator", frac_exc}});
    col_alpha.push_back(alpha);
    col_mean.push_back(mean);
    col_q90.push_back(q90);
    col_ind.push_back(frac_ind);
    col_exceed.push_back(frac_exc);
  }
  j["T"] = T;
  j["r"] = r;
  j["delta"] = delta;
  j["n_rep"] = n_rep;
  j["rows"] = rows;
  // the conditional exceedance must not grow as alpha -> 0 (alphas sorted desc)
  bool sorted_desc = true;
  for (std::size_t k = 1; k < col_alpha.size(); ++k)
    sorted_desc = sorted_desc && col_alpha[k] < col_alpha[k - 1];
  j["alphas_sorted_desc"] = sorted_desc;
  if (sorted_desc && col_exceed.size() >= 2)
    j["passed"] = col_exceed.back() <= col_exceed.front() + 1e-12;
  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "coupling.csv",
            {"alpha", "mean_sup_disc_sq", "q90_sup_disc_sq", "frac_indicator",
             "frac_exceed_given_indicator"},
            {col_alpha, col_mean, col_q90, col_ind, col_exceed});
  finalize_summary(ctx, j);
  return j;
}

// Stationary runs across a ladder of alphas; the H^2 x H^1 moment trend is the
// uniform-bound diagnostic for the inviscid limit.
inline ordered_json run_sweep(RunContext& ctx) {
  const std::vector<double> alphas = ctx.cfg.get_list("sweep", "alphas", {0.5, 0.2, 0.1});
  detail::StationaryData first = detail::stationary_core(ctx, "stationary", alphas[0], 0);
  ordered_json j = base_summary(ctx, "sweep");

  std::vector<double> est, ses, balz;
  ordered_json rows = ordered_json::array();
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    detail::StationaryData d =
        ai == 0 ? std::move(first) : detail::stationary_core(ctx, "stationary", alphas[ai], ai);
    const auto h21 = pick(d.scalars, &ScalarSample::H21sq);
    const auto stats = detail::scalar_stats(h21, d.ess);
    est.push_back(stats["mean"]);
    ses.push_back(stats["se"]);
    const BalanceL1Report bal = check_balance_l1(d.scalars, ctx.basis, ctx.noise);
    balz.push_back(bal.z);
    rows.push_back({{"alpha", alphas[ai]}, {"h21_sq_mean", stats["mean"]},
                    {"h21_sq_se", stats["se"]}, {"ess", d.ess.ess},
                    {"balance_z", bal.z}, {"n_samples", d.scalars.size()}});
  }
  ctx.cfg.finish();

  const TrendReport tr = check_h21_moment(alphas, est, ses);
  j["rows"] = rows;
  j["trend"] = {{"slope", tr.slope}, {"se_slope", tr.se_slope}, {"passed", tr.passed}};
  j["passed"] = tr.passed;
  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "sweep.csv", {"alpha", "h21_sq_mean", "h21_sq_se", "balance_z"},
            {alphas, est, ses, balz});
  finalize_summary(ctx, j);
  return j;
}

// Birkhoff averages, time correlation against the product bound, late-time
// recurrence and return times, all along the Hamiltonian flow started from
// stationary samples.
inline ordered_json run_ergodic(RunContext& ctx) {
  const double t_corr = ctx.cfg.get_double("ergodic", "t_corr", 10.0);
  const double horizon = ctx.cfg.get_double("ergodic", "horizon", 20.0);
  const double dt_flow = ctx.cfg.get_double("ergodic", "dt_flow", ctx.dt);
  const int n_samples = static_cast<int>(ctx.cfg.get_long("ergodic", "n_samples", 200));
  const double radius_scale = ctx.cfg.get_double("ergodic", "radius_scale", 1.0);
  const double birkhoff_T = ctx.cfg.get_double("ergodic", "birkhoff_T", 100.0);
  const double return_horizon = ctx.cfg.get_double("ergodic", "return_horizon", 200.0);
  detail::StationaryData d = detail::stationary_core(ctx, "stationary", ctx.alpha, 0);
  ctx.cfg.finish();
  if (d.run.states.empty()) throw config_error("ergodic: no stationary samples");

  std::vector<FieldState> samples = d.run.states;
  if (static_cast<int>(samples.size()) > n_samples) {
    // evenly spaced subsample to keep the flow budget fixed
    std::vector<FieldState> keep;
    for (int k = 0; k < n_samples; ++k)
      keep.push_back(samples[k * samples.size() / n_samples]);
    samples = std::move(keep);
  }

  std::vector<double> norms;
  for (const auto& y : samples) norms.push_back(product_norm(y, 1, 0, ctx.basis));
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const double radius = radius_scale * sorted[sorted.size() / 2];
  const PhaseSet A = PhaseSet::ball(FieldState::zero(ctx.basis.n_modes), radius, 1.0, 0.0);
  auto es = pick(d.scalars, &ScalarSample::E);
  std::sort(es.begin(), es.end());
  const PhaseSet B = PhaseSet::energy_band(0.0, es[es.size() / 2]);

  ordered_json j = base_summary(ctx, "ergodic");
  j["n_samples"] = samples.size();
  j["ball_radius"] = radius;
  j["band_hi"] = B.hi;

  const auto [corr, rec] = correlation_and_recurrence(samples, A, B, ctx.basis, t_corr, horizon,
                                                      dt_flow, ctx.threads, ctx.seed);
  j["correlation"] = {{"mu_A", corr.mu_A},   {"mu_B", corr.mu_B},
                      {"time_avg", corr.time_avg_corr}, {"product_bound", corr.product_bound},
                      {"se", corr.se},       {"z", corr.z},
                      {"passed", corr.passed}};
  j["recurrence"] = {{"mu_A", rec.mu_A},
                     {"best_value", rec.best_value},
                     {"best_time", rec.best_time},
                     {"threshold", rec.mu_A * rec.mu_A},
                     {"se", rec.se},
                     {"passed", rec.passed}};

  const SpectralBasis& b = ctx.basis;
  const Observable en{"energy", [&](const FieldState& y) { return energy(y, b); }};
  const BirkhoffReport bk = birkhoff_average(samples.front(), en, b, birkhoff_T, dt_flow, 10);
  j["birkhoff"] = {{"final_average", bk.partial_averages.back()},
                   {"last_delta", bk.cauchy_deltas.back()},
                   {"energy_drift_rel", bk.energy_drift_rel}};

  const auto entries = return_times(samples.front(), A, b, return_horizon, dt_flow,
                                    0.05 * radius);
  j["return_times"] = {{"count", entries.size()},
                       {"first", entries.empty() ? -1.0 : entries.front()}};

  j["passed"] = corr.passed && rec.passed;
  std::filesystem::create_directories(ctx.out_dir);
  write_csv(ctx.out_dir, "recurrence.csv", {"t", "mu_A_cap_phi_inv_A"},
            {rec.grid_times, rec.correlation});
  finalize_summary(ctx, j);
  return j;
}

}  // namespace fdlkg
