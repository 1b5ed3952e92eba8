#pragma once

#include <cmath>
#include <vector>

#include "fdlkg/deterministic_flow.hpp"
#include "fdlkg/noise.hpp"
#include "fdlkg/rng.hpp"

namespace fdlkg {

struct SdeConfig {
  double dt = 0.01;
  double alpha = 0.1;
  bool cubic = true;

  void validate() const {
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    if (!(alpha >= 0.0)) throw config_error("alpha must be nonnegative");
  }
};

// Exact affine-Gaussian map of the damped driven linear part over a full step,
// followed by the cubic kick. Repeated, the composition telescopes to a Strang
// product in the interior of a run. Modes with a_j = 0 draw nothing, so the
// zero-noise stepper replays the deterministic lie scheme bit for bit.
struct SdeStepper {
  SdeConfig cfg;
  const SpectralBasis* basis;
  std::vector<Mat2> T;
  std::vector<std::array<double, 3>> L;
  std::vector<int> noisy;

  SdeStepper(const SpectralBasis& b, const NoiseSpec& n, SdeConfig c) : cfg(c), basis(&b) {
    cfg.validate();
    T.resize(b.n_modes);
    L.resize(b.n_modes);
    for (int j = 0; j < b.n_modes; ++j) {
      const StepLaw law = step_mean_cov(std::sqrt(b.omega_sq[j]), cfg.alpha, n.a[j], cfg.dt);
      T[j] = law.T;
      L[j] = chol2(law.Q);
      if (L[j][0] != 0.0 || L[j][2] != 0.0) noisy.push_back(j);
    }
  }

  void add_noise(FieldState& y, RngStream& rng) const {
    for (int j : noisy) {
      const double g1 = rng.normal(), g2 = rng.normal();
      y.u[j] += L[j][0] * g1;
      y.v[j] += L[j][1] * g1 + L[j][2] * g2;
    }
  }

  void step(FieldState& y, RngStream& rng) const {
    apply_linear(y, T);
    add_noise(y, rng);
    if (cfg.cubic) apply_cubic_kick(y, cfg.dt, *basis);
  }
};

struct StationaryRunConfig {
  double T = 1000.0;
  double dt = 0.01;
  double burn_in = -1.0;  // < 0: max(0.2 T, 10/(gamma0 alpha))
  double thin = -1.0;     // < 0: 1/(gamma0 alpha) of model time between samples
  bool cubic = true;

  double resolved_burn_in(double g0, double alpha) const {
    return burn_in >= 0.0 ? burn_in : std::max(0.2 * T, 10.0 / (g0 * alpha));
  }
  double resolved_thin(double g0, double alpha) const {
    return thin > 0.0 ? thin : 1.0 / (g0 * alpha);
  }
};

struct StationarySamples {
  std::vector<double> times;
  std::vector<FieldState> states;
  long n_steps = 0;
  double burn_in = 0.0, thin = 0.0;
  bool low_sample_warning = false;
};

// Krylov-Bogoliubov sampling: start at rest, discard the burn-in window, then
// keep every thin-interval snapshot of the time average.
inline StationarySamples simulate_stationary(const SpectralBasis& b, const NoiseSpec& n,
                                             double alpha, const StationaryRunConfig& rc,
                                             RngStream& rng) {
  if (!(alpha > 0.0)) throw config_error("stationary sampling needs alpha > 0");
  const double g0 = gamma0(b);
  StationarySamples out;
  out.burn_in = rc.resolved_burn_in(g0, alpha);
  out.thin = rc.resolved_thin(g0, alpha);
  if (out.burn_in >= rc.T)
    throw config_error("stationary run too short: burn-in consumes the whole horizon");

  SdeStepper st(b, n, {rc.dt, alpha, rc.cubic});
  const long n_steps = std::llround(rc.T / rc.dt);
  const long burn_steps = std::llround(out.burn_in / rc.dt);
  const long stride = std::max<long>(1, std::llround(out.thin / rc.dt));

  FieldState y = FieldState::zero(b.n_modes);
  for (long s = 1; s <= n_steps; ++s) {
    st.step(y, rng);
    if ((s & 1023) == 0) check_finite(y, s * rc.dt);
    if (s >= burn_steps && (s - burn_steps) % stride == 0) {
      check_finite(y, s * rc.dt);
      out.times.push_back(s * rc.dt);
      out.states.push_back(y);
    }
  }
  out.n_steps = n_steps;
  out.low_sample_warning = out.states.size() < 100;
  return out;
}

struct CouplingResult {
  double sup_disc_sq = 0.0;  // sup_t || y_alpha(t) - y_0(t) ||_{1,0}^2
  double sup_z_h2 = 0.0;     // sup_t || z(t) ||_2
  bool indicator = false;    // sup_z_h2 <= sqrt(alpha) r
};

// Runs the damped driven flow, the Hamiltonian flow and the linear Gaussian
// z-process on one noise realization, from the same initial state w.
inline CouplingResult coupled_pair_evolve(const FieldState& w, const SpectralBasis& b,
                                          const NoiseSpec& n, double alpha, double T, double dt,
                                          double r, RngStream& rng) {
  SdeStepper sde(b, n, {dt, alpha, true});
  DeterministicStepper ham(b, {dt, Scheme::strang, 0.0, true});
  FieldState ya = w, y0 = w, z = FieldState::zero(b.n_modes);

  CouplingResult out;
  const long n_steps = std::llround(T / dt);
  for (long s = 1; s <= n_steps; ++s) {
    apply_linear(ya, sde.T);
    apply_linear(z, sde.T);
    for (int j : sde.noisy) {
      const double g1 = rng.normal(), g2 = rng.normal();
      ya.u[j] += sde.L[j][0] * g1;
      ya.v[j] += sde.L[j][1] * g1 + sde.L[j][2] * g2;
      z.u[j] += sde.L[j][0] * g1;
      z.v[j] += sde.L[j][1] * g1 + sde.L[j][2] * g2;
    }
    apply_cubic_kick(ya, dt, b);
    ham.step(y0);
    check_finite(ya, s * dt);
    check_finite(y0, s * dt);

    double disc = 0.0;
    for (int j = 0; j < b.n_modes; ++j) {
      const double du = ya.u[j] - y0.u[j], dv = ya.v[j] - y0.v[j];
      disc += b.omega_sq[j] * du * du + dv * dv;
    }
    out.sup_disc_sq = std::max(out.sup_disc_sq, disc);
    out.sup_z_h2 = std::max(out.sup_z_h2, sobolev_norm(z.u, 2.0, b));
  }
  out.indicator = out.sup_z_h2 <= std::sqrt(alpha) * r;
  return out;
}

}  // namespace fdlkg
