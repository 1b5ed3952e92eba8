#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fdlkg/deterministic_flow.hpp"
#include "fdlkg/parallel.hpp"
#include "fdlkg/stats.hpp"

namespace fdlkg {

// Measurable sets the recurrence and correlation machinery can integrate over.
struct PhaseSet {
  enum class Kind { ball, energy_band } kind = Kind::ball;
  FieldState center;
  double radius = 1.0, norm_m = 1.0, norm_n = 0.0;
  double lo = 0.0, hi = 1.0;

  static PhaseSet ball(FieldState c, double r, double m = 1.0, double n = 0.0) {
    PhaseSet s;
    s.kind = Kind::ball;
    s.center = std::move(c);
    s.radius = r;
    s.norm_m = m;
    s.norm_n = n;
    return s;
  }

  static PhaseSet energy_band(double lo, double hi) {
    PhaseSet s;
    s.kind = Kind::energy_band;
    s.lo = lo;
    s.hi = hi;
    return s;
  }

  bool contains(const FieldState& y, const SpectralBasis& b) const {
    if (kind == Kind::energy_band) {
      const double e = energy(y, b);
      return e >= lo && e <= hi;
    }
    FieldState d = y;
    for (int j = 0; j < b.n_modes; ++j) {
      d.u[j] -= center.u[j];
      d.v[j] -= center.v[j];
    }
    return product_norm(d, norm_m, norm_n, b) <= radius;
  }
};

struct BirkhoffReport {
  std::vector<double> times, partial_averages, cauchy_deltas;
  double energy_drift_rel;
};

// Running time averages (1/t) int_0^t f(phi_s y) ds along the Hamiltonian flow,
// with the Cauchy increments between checkpoints as a convergence diagnostic.
inline BirkhoffReport birkhoff_average(const FieldState& y0, const Observable& f,
                                       const SpectralBasis& b, double T, double dt,
                                       int n_checkpoints) {
  DeterministicStepper st(b, {dt, Scheme::strang, 0.0, true});
  const long steps_per_cp = std::llround(T / n_checkpoints / dt);
  if (steps_per_cp < 1) throw config_error("birkhoff_average: dt too coarse");
  FieldState y = y0;
  const double e0 = energy(y, b);
  BirkhoffReport rep;
  double quad = 0.0, prev = f.fn(y), drift = 0.0;
  for (int cp = 0; cp < n_checkpoints; ++cp) {
    for (long s = 0; s < steps_per_cp; ++s) {
      st.step(y);
      const double cur = f.fn(y);
      quad += 0.5 * dt * (prev + cur);
      prev = cur;
    }
    const double t = (cp + 1) * steps_per_cp * dt;
    check_finite(y, t);
    rep.times.push_back(t);
    rep.partial_averages.push_back(quad / t);
    drift = std::max(drift, std::abs(energy(y, b) - e0));
  }
  for (std::size_t k = 1; k < rep.partial_averages.size(); ++k)
    rep.cauchy_deltas.push_back(std::abs(rep.partial_averages[k] - rep.partial_averages[k - 1]));
  rep.energy_drift_rel = e0 != 0.0 ? drift / std::abs(e0) : drift;
  return rep;
}

struct CorrelationReport {
  double mu_A, mu_B, time_avg_corr, product_bound, se, z;
  double t_corr;
  bool passed;
};

struct RecurrenceReport {
  std::vector<double> grid_times, correlation;
  double mu_A, best_value, best_time, se;
  bool passed;
};

namespace detail {

struct ErgodicPartial {
  std::vector<double> inA, inB, quadB;          // per sample
  std::vector<std::vector<double>> gridA;       // per sample, per grid time
};

}  // namespace detail

// For mu-samples {y_i} and the Hamiltonian flow phi, estimates
//   (1/t) int_0^t mu(A cap phi_s^{-1} B) ds   (compared against mu(A) mu(B))
// and mu(A cap phi_t^{-1} A) on a late-time grid for the recurrence bound
// limsup mu(A cap phi_t^{-1} A) >= mu(A)^2. SEs are bootstrap over samples.
inline std::pair<CorrelationReport, RecurrenceReport> correlation_and_recurrence(
    const std::vector<FieldState>& samples, const PhaseSet& A, const PhaseSet& B,
    const SpectralBasis& b, double t_corr, double horizon, double dt, int threads,
    std::uint64_t master_seed, int bootstrap_reps = 200) {
  if (samples.empty()) throw config_error("ergodic checks need mu-samples");
  // geometric late-time grid in [horizon/4, horizon]
  std::vector<double> grid;
  for (double t = horizon; t >= horizon / 4.0 - 1e-12; t /= std::sqrt(2.0)) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  const double t_max = std::max(t_corr, horizon);
  const long n_steps = std::llround(t_max / dt);
  const long corr_steps = std::llround(t_corr / dt);
  std::vector<long> grid_steps;
  for (double t : grid) grid_steps.push_back(std::max<long>(1, std::llround(t / dt)));

  auto partials = parallel_chunks<detail::ErgodicPartial>(
      samples.size(), threads, 8,
      [&](std::size_t, std::size_t lo, std::size_t hi, detail::ErgodicPartial& part) {
        DeterministicStepper st(b, {dt, Scheme::strang, 0.0, true});
        for (std::size_t i = lo; i < hi; ++i) {
          FieldState y = samples[i];
          const double a0 = A.contains(y, b) ? 1.0 : 0.0;
          const double b0 = B.contains(y, b) ? 1.0 : 0.0;
          double quad = 0.0, prev = b0;
          std::vector<double> hitsA(grid_steps.size(), 0.0);
          std::size_t g = 0;
          for (long s = 1; s <= n_steps; ++s) {
            st.step(y);
            if (s <= corr_steps) {
              const double cur = B.contains(y, b) ? 1.0 : 0.0;
              quad += 0.5 * dt * (prev + cur);
              prev = cur;
            }
            while (g < grid_steps.size() && grid_steps[g] == s) {
              hitsA[g] = A.contains(y, b) ? 1.0 : 0.0;
              ++g;
            }
          }
          check_finite(y, t_max);
          part.inA.push_back(a0);
          part.inB.push_back(b0);
          part.quadB.push_back(quad / t_corr);
          part.gridA.push_back(std::move(hitsA));
        }
      });

  std::vector<double> inA, inB, quadB;
  std::vector<std::vector<double>> gridA;
  for (auto& p : partials) {
    inA.insert(inA.end(), p.inA.begin(), p.inA.end());
    inB.insert(inB.end(), p.inB.begin(), p.inB.end());
    quadB.insert(quadB.end(), p.quadB.begin(), p.quadB.end());
    for (auto& g : p.gridA) gridA.push_back(std::move(g));
  }
  const std::size_t n = inA.size();
  auto mean_of = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };

  CorrelationReport corr;
  corr.t_corr = t_corr;
  corr.mu_A = mean_of(inA);
  corr.mu_B = mean_of(inB);
  std::vector<double> contrib(n);
  for (std::size_t i = 0; i < n; ++i) contrib[i] = inA[i] * quadB[i];
  corr.time_avg_corr = mean_of(contrib);
  corr.product_bound = corr.mu_A * corr.mu_B;

  RecurrenceReport rec;
  rec.grid_times = grid;
  rec.mu_A = corr.mu_A;
  std::size_t best_g = 0;
  for (std::size_t gidx = 0; gidx < grid.size(); ++gidx) {
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = inA[i] * gridA[i][gidx];
    rec.correlation.push_back(mean_of(prod));
    if (rec.correlation.back() > rec.correlation[best_g]) best_g = gidx;
  }
  rec.best_value = rec.correlation[best_g];
  rec.best_time = grid[best_g];

  // joint bootstrap of (estimate - bound) for both reports
  RngStream boot(master_seed, 0xB007u);
  std::vector<double> dcorr, drec;
  dcorr.reserve(bootstrap_reps);
  drec.reserve(bootstrap_reps);
  for (int r = 0; r < bootstrap_reps; ++r) {
    double sa = 0.0, sb = 0.0, sc = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = boot.bits() % n;
      sa += inA[k];
      sb += inB[k];
      sc += inA[k] * quadB[k];
      sr += inA[k] * gridA[k][best_g];
    }
    sa /= n;
    sb /= n;
    sc /= n;
    sr /= n;
    dcorr.push_back(sc - sa * sb);
    drec.push_back(sr - sa * sa);
  }
  auto sd_of = [&](const std::vector<double>& v) {
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };
  corr.se = sd_of(dcorr);
  corr.z = corr.se > 0.0 ? (corr.time_avg_corr - corr.product_bound) / corr.se : 0.0;
  corr.passed = corr.time_avg_corr >= corr.product_bound - 3.0 * corr.se;
  rec.se = sd_of(drec);
  rec.passed = rec.best_value >= rec.mu_A * rec.mu_A - 3.0 * rec.se;
  return {corr, rec};
}

// Entry times into A along the flow, consecutive entries separated by an exit
// beyond radius + delta.
inline std::vector<double> return_times(const FieldState& y0, const PhaseSet& A,
                                        const SpectralBasis& b, double horizon, double dt,
                                        double delta = 0.0, bool cubic = true) {
  if (A.kind != PhaseSet::Kind::ball) throw config_error("return_times expects a ball");
  DeterministicStepper st(b, {dt, Scheme::strang, 0.0, cubic});
  PhaseSet exit_set = A;
  exit_set.radius = A.radius + delta;
  FieldState y = y0;
  std::vector<double> entries;
  bool inside = A.contains(y, b);
  const long n_steps = std::llround(horizon / dt);
  for (long s = 1; s <= n_steps; ++s) {
    st.step(y);
    const double t = s * dt;
    if (inside) {
      if (!exit_set.contains(y, b)) inside = false;
    } else if (A.contains(y, b)) {
      inside = true;
      entries.push_back(t);
    }
  }
  return entries;
}

}  // namespace fdlkg
