#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fdlkg/functionals.hpp"
#include "fdlkg/gaussian_oracle.hpp"

namespace fdlkg {

enum class Scheme { strang, lie };

struct StepperConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::strang;
  double alpha = 0.0;  // 0 recovers the Hamiltonian flow
  bool cubic = true;

  void validate() const {
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    if (alpha < 0.0) throw config_error("alpha must be nonnegative");
  }
};

inline std::vector<Mat2> linear_propagator(const SpectralBasis& b, double alpha, double h) {
  std::vector<Mat2> T(b.n_modes);
  for (int j = 0; j < b.n_modes; ++j)
    T[j] = step_mean_cov(std::sqrt(b.omega_sq[j]), alpha, 0.0, h).T;
  return T;
}

inline void apply_linear(FieldState& y, const std::vector<Mat2>& T) {
  for (std::size_t j = 0; j < T.size(); ++j) {
    const Vec2 z = apply(T[j], {y.u[j], y.v[j]});
    y.u[j] = z.x;
    y.v[j] = z.y;
  }
}

// One-off exact flow of the damped linear part over time h.
inline void linear_step_exact(FieldState& y, const SpectralBasis& b, double alpha, double h) {
  const auto T = linear_propagator(b, alpha, h);
  apply_linear(y, T);
}

inline void apply_cubic_kick(FieldState& y, double h, const SpectralBasis& b) {
  const std::vector<double> c = cubic_term(y.u, b);
  for (int j = 0; j < b.n_modes; ++j) y.v[j] -= h * c[j];
}

// Splitting with the linear half solved exactly per mode. strang: half step,
// kick, half step (order 2); lie: full step then kick, the same composition the
// stochastic integrator uses.
struct DeterministicStepper {
  StepperConfig cfg;
  const SpectralBasis* basis;
  std::vector<Mat2> half, full;

  DeterministicStepper(const SpectralBasis& b, StepperConfig c) : cfg(c), basis(&b) {
    cfg.validate();
    if (cfg.scheme == Scheme::strang) half = linear_propagator(b, cfg.alpha, 0.5 * cfg.dt);
    full = linear_propagator(b, cfg.alpha, cfg.dt);
  }

  void step(FieldState& y) const {
    if (cfg.scheme == Scheme::strang) {
      apply_linear(y, half);
      if (cfg.cubic) apply_cubic_kick(y, cfg.dt, *basis);
      apply_linear(y, half);
    } else {
      apply_linear(y, full);
      if (cfg.cubic) apply_cubic_kick(y, cfg.dt, *basis);
    }
  }
};

struct Observable {
  std::string name;
  std::function<double(const FieldState&)> fn;
};

struct EvolveResult {
  FieldState final_state;
  std::vector<double> times;               // t0 and every stride-th step after
  std::vector<std::vector<double>> values; // [observable][time index]
};

inline void check_finite(const FieldState& y, double t) {
  for (double x : y.u)
    if (!(std::abs(x) <= 1e12)) throw blowup_error(t);
  for (double x : y.v)
    if (!(std::abs(x) <= 1e12)) throw blowup_error(t);
}

inline EvolveResult evolve(FieldState y, const DeterministicStepper& st, long n_steps,
                           long observer_stride, const std::vector<Observable>& obs,
                           double t0 = 0.0) {
  if (observer_stride < 1) throw config_error("observer stride must be >= 1");
  EvolveResult r;
  r.values.resize(obs.size());
  auto record = [&](double t) {
    r.times.push_back(t);
    for (std::size_t k = 0; k < obs.size(); ++k) r.values[k].push_back(obs[k].fn(y));
  };
  record(t0);
  for (long s = 1; s <= n_steps; ++s) {
    st.step(y);
    const double t = t0 + s * st.cfg.dt;
    check_finite(y, t);
    if (s % observer_stride == 0) record(t);
  }
  r.final_state = std::move(y);
  return r;
}

}  // namespace fdlkg
