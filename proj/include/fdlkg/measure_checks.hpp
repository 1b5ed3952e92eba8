#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fdlkg/bump.hpp"
#include "fdlkg/parallel.hpp"
#include "fdlkg/stats.hpp"
#include "fdlkg/stochastic_flow.hpp"

namespace fdlkg {

// Scalars of one invariant-measure sample, precomputed once per state.
struct ScalarSample {
  double E, G1, L1, vH1sq, sum_a2v2, H21sq, u_l2;
};

inline std::vector<ScalarSample> extract_scalars(const std::vector<FieldState>& states,
                                                 const SpectralBasis& b, const NoiseSpec& n,
                                                 double alpha) {
  std::vector<ScalarSample> out;
  out.reserve(states.size());
  for (const FieldState& y : states) {
    ScalarSample s;
    s.E = energy(y, b);
    s.G1 = g1(y, alpha, b);
    s.L1 = l1(y, b);
    s.vH1sq = sobolev_norm_sq(y.v, 1.0, b);
    double sv = 0.0;
    for (int j = 0; j < b.n_modes; ++j) sv += n.a[j] * n.a[j] * y.v[j] * y.v[j];
    s.sum_a2v2 = sv;
    s.H21sq = product_norm_sq(y, 2.0, 1.0, b);
    s.u_l2 = sobolev_norm(y.u, 0.0, b);
    out.push_back(s);
  }
  return out;
}

inline std::vector<double> pick(const std::vector<ScalarSample>& s, double ScalarSample::* f) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& x : s) v.push_back(x.*f);
  return v;
}

// The whole suite quotes SEs against the effective sample size of the energy
// series, the slowest-mixing scalar we track.
struct EssInfo {
  double tau = 1.0, ess = 0.0;
  long n = 0;
};

inline EssInfo energy_ess(const std::vector<ScalarSample>& s) {
  const auto e = pick(s, &ScalarSample::E);
  EssInfo info;
  info.n = static_cast<long>(e.size());
  info.tau = integrated_autocorr_time(e);
  info.ess = info.n / info.tau;
  return info;
}

inline double se_with_ess(const std::vector<double>& x, const EssInfo& ess) {
  if (x.size() < 2 || ess.ess <= 0.0) return 0.0;
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  var /= (x.size() - 1);
  return std::sqrt(var / ess.ess);
}

struct BalanceL1Report {
  double target, estimate, se, z, ess;
  bool passed, inconclusive;
};

// Stationarity forces E L1 = A0/2.
inline BalanceL1Report check_balance_l1(const std::vector<ScalarSample>& s, const SpectralBasis& b,
                                        const NoiseSpec& n) {
  const auto l1s = pick(s, &ScalarSample::L1);
  const EssInfo ess = energy_ess(s);
  BalanceL1Report r;
  r.target = 0.5 * n.A0(b);
  double m = 0.0;
  for (double v : l1s) m += v;
  r.estimate = l1s.empty() ? 0.0 : m / l1s.size();
  r.se = se_with_ess(l1s, ess);
  r.z = r.se > 0.0 ? (r.estimate - r.target) / r.se : 0.0;
  r.ess = ess.ess;
  r.inconclusive = ess.ess < 50.0;
  r.passed = r.inconclusive ? false : std::abs(r.z) <= 3.0;
  return r;
}

struct MomentBoundMcRow {
  int p;
  double estimate, se, bound;
  bool passed;
};

// E G1^p <= (2 p A0 / gamma0)^p, one-sided with 3 SE slack.
inline std::vector<MomentBoundMcRow> moment_bound_report(const std::vector<ScalarSample>& s,
                                                         const SpectralBasis& b,
                                                         const NoiseSpec& n) {
  const EssInfo ess = energy_ess(s);
  const double a0 = n.A0(b), g0 = gamma0(b);
  std::vector<MomentBoundMcRow> rows;
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> xp;
    xp.reserve(s.size());
    for (const auto& x : s) xp.push_back(std::pow(x.G1, p));
    double m = 0.0;
    for (double v : xp) m += v;
    m = xp.empty() ? 0.0 : m / xp.size();
    MomentBoundMcRow row;
    row.p = p;
    row.estimate = m;
    row.se = se_with_ess(xp, ess);
    row.bound = std::pow(2.0 * p * a0 / g0, p);
    row.passed = row.estimate - 3.0 * row.se <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

struct BalanceVariantRow {
  double a0_coeff;  // 1 or 1/2
  int sign;         // +1 or -1 on the second-derivative term
  double residual, se, z;
};

struct BalanceIdentityReport {
  std::vector<BalanceVariantRow> variants;
  int vanishing_index = -1;  // min |z|
  double bump_center, bump_width;
  bool passed, inconclusive;
};

// Stationary balance for a smooth bump H' = h:
//   E[ H(E) (A0/2 - ||v||_1^2) ] + 1/2 E[ h(E) sum a_j^2 v_j^2 ] = 0.
// Both A0 coefficients and both signs of the Ito term are reported; the
// combination above is the one that must vanish.
inline BalanceIdentityReport check_balance_identity(const std::vector<ScalarSample>& s,
                                                    const SpectralBasis& b, const NoiseSpec& n,
                                                    const BumpFunction& bump) {
  const EssInfo ess = energy_ess(s);
  const double a0 = n.A0(b);
  BalanceIdentityReport rep;
  rep.bump_center = bump.center;
  rep.bump_width = bump.width;
  rep.inconclusive = ess.ess < 50.0;
  const double coeffs[2] = {1.0, 0.5};
  const int signs[2] = {+1, -1};
  double best = std::numeric_limits<double>::infinity();
  for (double c : coeffs)
    for (int sg : signs) {
      std::vector<double> w;
      w.reserve(s.size());
      for (const auto& x : s)
        w.push_back(bump.H(x.E) * (c * a0 - x.vH1sq) + sg * 0.5 * bump.h(x.E) * x.sum_a2v2);
      double m = 0.0;
      for (double v : w) m += v;
      m = w.empty() ? 0.0 : m / w.size();
      BalanceVariantRow row;
      row.a0_coeff = c;
      row.sign = sg;
      row.residual = m;
      row.se = se_with_ess(w, ess);
      row.z = row.se > 0.0 ? m / row.se : 0.0;
      if (std::abs(row.z) < best) {
        best = std::abs(row.z);
        rep.vanishing_index = static_cast<int>(rep.variants.size());
      }
      rep.variants.push_back(row);
    }
  // derived combination: coefficient 1/2, sign +
  const BalanceVariantRow& derived = rep.variants[2];
  rep.passed = !rep.inconclusive && std::abs(derived.z) <= 3.0;
  return rep;
}

struct TrendReport {
  std::vector<double> alphas, estimates, ses;
  double slope, se_slope;
  bool passed;
};

// H^2 x H^1 moment must stay bounded as alpha -> 0: regress the estimate on
// log(1/alpha) and require no significant upward trend.
inline TrendReport check_h21_moment(const std::vector<double>& alphas,
                                    const std::vector<double>& estimates,
                                    const std::vector<double>& ses) {
  TrendReport r;
  r.alphas = alphas;
  r.estimates = estimates;
  r.ses = ses;
  std::vector<double> x;
  x.reserve(alphas.size());
  for (double a : alphas) x.push_back(std::log(1.0 / a));
  const LsFit fit = least_squares(x, estimates);
  r.slope = fit.slope;
  // fold the per-point MC error into the slope uncertainty
  double se_mc = 0.0;
  for (double s : ses) se_mc = std::max(se_mc, s);
  double sxx = 0.0, mx = 0.0;
  for (double v : x) mx += v;
  mx /= x.size();
  for (double v : x) sxx += (v - mx) * (v - mx);
  const double se_slope_mc = sxx > 0.0 ? se_mc / std::sqrt(sxx) : 0.0;
  r.se_slope = std::max(fit.se_slope, se_slope_mc);
  r.passed = r.slope <= 3.0 * r.se_slope;
  return r;
}

struct DensityReport {
  int bins_coarse;
  double max_mass_coarse, max_mass_fine, halving_ratio;
  double atom_fraction;
  double lo, hi;
  std::vector<long> counts_coarse, counts_fine;
  bool passed_halving, passed_no_atom;
};

// Doubling the bin count should halve the top bin of a density with no atoms,
// and u = 0 must never be sampled (the law of u has full support).
inline DensityReport hamiltonian_density_report(const std::vector<ScalarSample>& s,
                                                int bins_coarse = 32) {
  DensityReport r;
  r.bins_coarse = bins_coarse;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& x : s) {
    lo = std::min(lo, x.E);
    hi = std::max(hi, x.E);
  }
  if (!(hi > lo)) throw config_error("density report needs spread-out samples");
  const double pad = 1e-9 * (hi - lo);
  r.lo = lo;
  r.hi = hi + pad;
  Histogram hc(r.lo, r.hi, bins_coarse), hf(r.lo, r.hi, 2 * bins_coarse);
  long atoms = 0;
  for (const auto& x : s) {
    hc.add(x.E);
    hf.add(x.E);
    if (x.u_l2 < 1e-10) ++atoms;
  }
  r.max_mass_coarse = hc.max_bin_mass();
  r.max_mass_fine = hf.max_bin_mass();
  r.halving_ratio = r.max_mass_coarse > 0.0 ? r.max_mass_fine / r.max_mass_coarse : 0.0;
  r.atom_fraction = s.empty() ? 0.0 : static_cast<double>(atoms) / s.size();
  r.counts_coarse = hc.counts;
  r.counts_fine = hf.counts;
  r.passed_halving = r.halving_ratio >= 0.35 && r.halving_ratio <= 0.65;
  r.passed_no_atom = atoms == 0;
  return r;
}

struct TailReport {
  double sigma;
  std::vector<double> grid_r, survival;
  double fit_rate, fit_se;
  double exp_moment, exp_moment_se;
  bool passed_rate, passed_envelope, passed;
};

// One-sided tail claim P(E >= R) <~ e^{-sigma R}: the fitted decay rate of the
// empirical survival function must reach sigma, and the curve anchored at the
// first grid point must stay below the sigma envelope within 3 SE.
inline TailReport tail_check(const std::vector<ScalarSample>& s, double sigma,
                             int min_exceed = 20) {
  std::vector<double> e = pick(s, &ScalarSample::E);
  std::sort(e.begin(), e.end());
  const long n = static_cast<long>(e.size());
  if (n < 4 * min_exceed) throw config_error("tail check needs more samples");
  TailReport r;
  r.sigma = sigma;
  for (long k = n / 2; k >= min_exceed; k /= 2) {
    r.grid_r.push_back(e[n - k]);
    r.survival.push_back(static_cast<double>(k) / n);
  }
  if (r.grid_r.size() < 3) throw config_error("tail check: degenerate exceedance grid");
  std::vector<double> neglog;
  neglog.reserve(r.survival.size());
  for (double sv : r.survival) neglog.push_back(-std::log(sv));
  const LsFit fit = least_squares(r.grid_r, neglog);
  r.fit_rate = fit.slope;
  r.fit_se = fit.se_slope;
  r.passed_rate = r.fit_rate + 3.0 * r.fit_se >= sigma;
  r.passed_envelope = true;
  for (std::size_t k = 1; k < r.grid_r.size(); ++k) {
    const double lhs = std::log(r.survival[0] / r.survival[k]);
    const double need = sigma * (r.grid_r[k] - r.grid_r[0]);
    const double se_log =
        std::sqrt((1.0 - r.survival[k]) / (n * r.survival[k])) +
        std::sqrt((1.0 - r.survival[0]) / (n * r.survival[0]));
    if (lhs < need - 3.0 * se_log) r.passed_envelope = false;
  }
  MomentAccumulator acc(sigma);
  for (const auto& x : s) acc.add(x.E);
  r.exp_moment = acc.exp_moment();
  r.exp_moment_se = acc.exp_moment_se();
  r.passed = r.passed_rate && r.passed_envelope;
  return r;
}

struct ItoConfig {
  double T = 2.0;
  double dt = 0.04;  // coarse step; the halved run uses dt/2
  int n_checkpoints = 10;
  int ensemble = 20000;
  int threads = 1;
};

struct ItoReport {
  std::vector<double> times;
  std::vector<double> resid_coarse, se_coarse, resid_fine, se_fine;
  double max_abs_z_extrapolated, bias_ratio;
  bool passed_residual, passed_ratio;
};

namespace detail {

struct ItoPartial {
  std::vector<MomentAccumulator> acc;  // one per checkpoint
};

// Per-trajectory residual Y(t) = G1(y_t) + alpha int_0^t L1 - G1(y_0) - (alpha/2) A0 t
// has mean zero under the exact law; the splitting leaves an O(dt) bias.
inline void ito_ensemble(const SpectralBasis& b, const NoiseSpec& n, double alpha,
                         const FieldState& y0, double dt, double T, int n_checkpoints,
                         int ensemble, int threads, std::uint64_t master_seed,
                         std::uint64_t stream_offset, std::vector<double>& times,
                         std::vector<double>& resid, std::vector<double>& se) {
  const long steps_per_cp = std::llround(T / n_checkpoints / dt);
  if (steps_per_cp < 1) throw config_error("ito check: dt too coarse for the checkpoint grid");
  const long n_steps = steps_per_cp * n_checkpoints;
  const double g1_0 = g1(y0, alpha, b);
  const double a0 = n.A0(b);

  auto partials = parallel_chunks<detail::ItoPartial>(
      static_cast<std::size_t>(ensemble), threads, 256,
      [&](std::size_t, std::size_t lo, std::size_t hi, detail::ItoPartial& part) {
        part.acc.assign(n_checkpoints, MomentAccumulator{});
        SdeStepper st(b, n, {dt, alpha, true});
        for (std::size_t traj = lo; traj < hi; ++traj) {
          RngStream rng(master_seed, stream_offset + traj);
          FieldState y = y0;
          double quad = 0.0, prev = l1(y, b);
          int cp = 0;
          for (long s = 1; s <= n_steps; ++s) {
            st.step(y, rng);
            check_finite(y, s * dt);
            const double cur = l1(y, b);
            quad += 0.5 * dt * (prev + cur);
            prev = cur;
            if (s % steps_per_cp == 0) {
              const double t = s * dt;
              const double resid_traj =
                  g1(y, alpha, b) + alpha * quad - g1_0 - 0.5 * alpha * a0 * t;
              part.acc[cp].add(resid_traj);
              ++cp;
            }
          }
        }
      });

  std::vector<MomentAccumulator> total(n_checkpoints);
  for (const auto& p : partials)
    for (int c = 0; c < n_checkpoints; ++c) total[c].merge(p.acc[c]);

  times.clear();
  resid.clear();
  se.clear();
  for (int c = 0; c < n_checkpoints; ++c) {
    times.push_back((c + 1) * steps_per_cp * dt);
    resid.push_back(total[c].mean);
    se.push_back(total[c].n > 1 ? total[c].sd() / std::sqrt(static_cast<double>(total[c].n))
                                : 0.0);
  }
}

}  // namespace detail

inline ItoReport check_ito_identity_g1(const SpectralBasis& b, const NoiseSpec& n, double alpha,
                                       const FieldState& y0, const ItoConfig& cfg,
                                       std::uint64_t master_seed) {
  ItoReport rep;
  std::vector<double> times_fine;
  detail::ito_ensemble(b, n, alpha, y0, cfg.dt, cfg.T, cfg.n_checkpoints, cfg.ensemble,
                       cfg.threads, master_seed, 0, rep.times, rep.resid_coarse, rep.se_coarse);
  detail::ito_ensemble(b, n, alpha, y0, 0.5 * cfg.dt, cfg.T, cfg.n_checkpoints, cfg.ensemble,
                       cfg.threads, master_seed, 1u << 28, times_fine, rep.resid_fine,
                       rep.se_fine);

  double max_c = 0.0, max_f = 0.0, max_z = 0.0;
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    max_c = std::max(max_c, std::abs(rep.resid_coarse[k]));
    max_f = std::max(max_f, std::abs(rep.resid_fine[k]));
    const double extrap = 2.0 * rep.resid_fine[k] - rep.resid_coarse[k];
    const double se_e = std::sqrt(4.0 * rep.se_fine[k] * rep.se_fine[k] +
                                  rep.se_coarse[k] * rep.se_coarse[k]);
    if (se_e > 0.0) max_z = std::max(max_z, std::abs(extrap) / se_e);
  }
  rep.bias_ratio = max_f > 0.0 ? max_c / max_f : 0.0;
  rep.max_abs_z_extrapolated = max_z;
  rep.passed_residual = max_z <= 3.0;
  rep.passed_ratio = rep.bias_ratio >= 1.7 && rep.bias_ratio <= 2.3;
  return rep;
}

}  // namespace fdlkg
