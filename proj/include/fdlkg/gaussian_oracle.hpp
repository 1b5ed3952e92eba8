#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fdlkg/basis.hpp"
#include "fdlkg/functionals.hpp"
#include "fdlkg/noise.hpp"
#include "fdlkg/rng.hpp"

namespace fdlkg {

struct Mat2 {
  double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
};

struct Vec2 {
  double x = 0, y = 0;
};

struct Cov2 {
  double c11 = 0, c12 = 0, c22 = 0;
};

inline Vec2 apply(const Mat2& m, Vec2 v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

inline Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

// T C T^t for symmetric C
inline Cov2 congruence(const Mat2& t, const Cov2& c) {
  const double b11 = t.a11 * c.c11 + t.a12 * c.c12;
  const double b12 = t.a11 * c.c12 + t.a12 * c.c22;
  const double b21 = t.a21 * c.c11 + t.a22 * c.c12;
  const double b22 = t.a21 * c.c12 + t.a22 * c.c22;
  return {b11 * t.a11 + b12 * t.a12, b11 * t.a21 + b12 * t.a22, b21 * t.a21 + b22 * t.a22};
}

// Lower Cholesky factor, clamping the tiny negative pivots roundoff can leave.
inline std::array<double, 3> chol2(const Cov2& q) {
  const double l11 = std::sqrt(std::max(q.c11, 0.0));
  const double l21 = l11 > 0.0 ? q.c12 / l11 : 0.0;
  const double l22 = std::sqrt(std::max(q.c22 - l21 * l21, 0.0));
  return {l11, l21, l22};
}

namespace detail {

// emC = e^{-muh} C(delta), emS = e^{-muh} S(delta) where C(d) = cos(sqrt(d)),
// S(d) = sin(sqrt(d))/sqrt(d) continued through d <= 0. The overdamped branch
// pairs each growing factor with the decay so nothing overflows, and near the
// critical point the entire-series form removes the 0/0.
inline void damped_trig(double delta, double muh, double& emC, double& emS) {
  if (delta > 1e-4) {
    const double th = std::sqrt(delta), em = std::exp(-muh);
    emC = em * std::cos(th);
    emS = em * (std::sin(th) / th);
  } else if (delta < -1e-4) {
    const double th = std::sqrt(-delta);
    const double ep = std::exp(th - muh), en = std::exp(-th - muh);
    emC = 0.5 * (ep + en);
    emS = 0.5 * (ep - en) / th;
  } else {
    double c = 1.0, s = 1.0, term = 1.0;
    for (int k = 1; k <= 6; ++k) {
      term *= -delta / (2.0 * k * (2.0 * k - 1.0));  // (-delta)^k / (2k)!
      c += term;
      s += term / (2.0 * k + 1.0);                   // (-delta)^k / (2k+1)!
    }
    const double em = std::exp(-muh);
    emC = em * c;
    emS = em * s;
  }
}

}  // namespace detail

// Exact one-step law of the damped driven mode
//   dz = zdot dt,  dzdot = (-omega^2 z - alpha omega^2 zdot) dt + sqrt(alpha) a dW:
// transition exp(Ah) and noise covariance int_0^h e^{As} B e^{A^ts} ds in closed
// form. With f = T12, g = T22 one has f' = g, g' = -omega^2 f - 2 mu g, giving
//   Q12 = q f^2/2,
//   Q22 = a^2/(2 omega^2) [(1 - e^{-2muh}) + 2 muh (e^{-muh}S)(e^{-muh}(C - muh S))],
//   Q11 = (Q22 - q (fg + mu f^2)) / omega^2,      q = alpha a^2, mu = alpha omega^2/2.
// The alpha in q/(4mu) cancels algebraically, so nothing degenerates as alpha -> 0.
struct StepLaw {
  Mat2 T;
  Cov2 Q;
};

inline StepLaw step_mean_cov(double omega, double alpha, double a, double h) {
  if (!(omega > 0.0)) throw config_error("step_mean_cov requires omega > 0");
  if (alpha < 0.0 || h < 0.0) throw config_error("step_mean_cov requires alpha, h >= 0");
  const double w2 = omega * omega;
  const double mu = 0.5 * alpha * w2;
  const double muh = mu * h;
  const double delta = (w2 - mu * mu) * h * h;
  double emC, emS;
  detail::damped_trig(delta, muh, emC, emS);
  const double f = h * emS;
  const double g = emC - muh * emS;

  StepLaw law;
  law.T = {emC + muh * emS, f, -w2 * f, g};
  const double q = alpha * a * a;
  if (q > 0.0) {
    law.Q.c22 = (a * a / (2.0 * w2)) * (-std::expm1(-2.0 * muh) + 2.0 * muh * emS * g);
    law.Q.c12 = 0.5 * q * f * f;
    law.Q.c11 = (law.Q.c22 - q * (f * g + mu * f * f)) / w2;
    if (law.Q.c11 < 0.0) law.Q.c11 = 0.0;
  }
  return law;
}

// apply first, then second
inline StepLaw compose(const StepLaw& first, const StepLaw& second) {
  StepLaw out;
  out.T = mul(second.T, first.T);
  out.Q = congruence(second.T, first.Q);
  out.Q.c11 += second.Q.c11;
  out.Q.c12 += second.Q.c12;
  out.Q.c22 += second.Q.c22;
  return out;
}

// Lyapunov fixed point A S + S A^t + diag(0, alpha a^2) = 0: the off-diagonal
// vanishes and S = diag(a^2/(2 omega^4), a^2/(2 omega^2)), independent of alpha.
inline Cov2 stationary_cov(double omega, double alpha, double a) {
  if (!(alpha > 0.0)) throw config_error("stationary covariance needs alpha > 0");
  if (!(omega > 0.0)) throw config_error("stationary covariance needs omega > 0");
  const double w2 = omega * omega;
  return {a * a / (2.0 * w2 * w2), 0.0, a * a / (2.0 * w2)};
}

// E ||[z, zdot]||_{2,1}^2 at time t from rest: sum_j omega^4 Q11_j(t) + omega^2 Q22_j(t).
// As t -> infinity this climbs to A0 = sum a_j^2.
inline double norm21_moment(const SpectralBasis& b, const NoiseSpec& n, double alpha, double t) {
  double s = 0.0;
  for (int j = 0; j < b.n_modes; ++j) {
    if (n.a[j] == 0.0) continue;
    const double w2 = b.omega_sq[j];
    const Cov2 q = step_mean_cov(std::sqrt(w2), alpha, n.a[j], t).Q;
    s += w2 * w2 * q.c11 + w2 * q.c22;
  }
  return s;
}

namespace detail {

// cumulants of z^t D z for z ~ N(0, S), D = diag(d1, d2):
// kappa_n = 2^{n-1} (n-1)! tr((S D)^n)
inline void quadform_cumulants(const Cov2& s, double d1, double d2, double& k1, double& k2,
                               double& k3) {
  const Mat2 m{s.c11 * d1, s.c12 * d2, s.c12 * d1, s.c22 * d2};
  const Mat2 m2 = mul(m, m);
  const Mat2 m3 = mul(m2, m);
  k1 = m.a11 + m.a22;
  k2 = 2.0 * (m2.a11 + m2.a22);
  k3 = 8.0 * (m3.a11 + m3.a22);
}

}  // namespace detail

// Raw moments E ||z||_{2,1}^{2p}, p = 1..3, of the mode-independent Gaussian law
// (stationary when t < 0, else the exact transient from rest).
inline std::array<double, 3> norm21_raw_moments(const SpectralBasis& b, const NoiseSpec& n,
                                                double alpha, double t = -1.0) {
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;
  for (int j = 0; j < b.n_modes; ++j) {
    if (n.a[j] == 0.0) continue;
    const double w2 = b.omega_sq[j];
    const Cov2 s = t < 0.0 ? stationary_cov(std::sqrt(w2), alpha, n.a[j])
                           : step_mean_cov(std::sqrt(w2), alpha, n.a[j], t).Q;
    double k1, k2, k3;
    detail::quadform_cumulants(s, w2 * w2, w2, k1, k2, k3);
    K1 += k1;
    K2 += k2;
    K3 += k3;
  }
  return {K1, K2 + K1 * K1, K3 + 3.0 * K1 * K2 + K1 * K1 * K1};
}

struct MomentBoundRow {
  int p;
  double moment, bound;
  bool ok;
};

// E ||z||_{2,1}^{2p} <= A1^p p^p / kappa^p for p in {1,2,3}
inline std::vector<MomentBoundRow> check_moment_bounds(const SpectralBasis& b, const NoiseSpec& n,
                                                       double alpha) {
  const auto m = norm21_raw_moments(b, n, alpha);
  const double a1 = n.A1(b), kap = kappa(b);
  std::vector<MomentBoundRow> rows;
  for (int p = 1; p <= 3; ++p) {
    const double bound = std::pow(a1 * p / kap, p);
    rows.push_back({p, m[p - 1], bound, m[p - 1] <= bound * (1.0 + 1e-12)});
  }
  return rows;
}

struct ExpControlReport {
  double epsilon, estimate, se, bound = 3.0;
  bool ok;
};

// Monte Carlo estimate of E exp((eps/t) int_0^t ||z||_{2,1}^2 ds) from rest,
// admissible range eps <= kappa/(2 A1 e); the claim is estimate <= 3.
inline ExpControlReport check_exponential_control(const SpectralBasis& b, const NoiseSpec& n,
                                                  double alpha, double epsilon, double t,
                                                  double dt, int n_paths,
                                                  std::uint64_t master_seed) {
  const double cap = kappa(b) / (2.0 * n.A1(b) * std::exp(1.0));
  if (!(epsilon > 0.0) || epsilon > cap * (1.0 + 1e-12))
    throw config_error("exponential control needs 0 < epsilon <= kappa/(2 A1 e)");
  const int n_steps = static_cast<int>(std::llround(t / dt));
  if (n_steps < 2) throw config_error("exponential control needs t >= 2 dt");

  std::vector<Mat2> T(b.n_modes);
  std::vector<std::array<double, 3>> L(b.n_modes);
  for (int j = 0; j < b.n_modes; ++j) {
    const StepLaw law = step_mean_cov(std::sqrt(b.omega_sq[j]), alpha, n.a[j], dt);
    T[j] = law.T;
    L[j] = chol2(law.Q);
  }

  double sum = 0.0, sumsq = 0.0;
  std::vector<Vec2> z(b.n_modes);
  for (int path = 0; path < n_paths; ++path) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(path));
    for (auto& m : z) m = {0.0, 0.0};
    double integral = 0.0, prev = 0.0;
    for (int s = 1; s <= n_steps; ++s) {
      double norm = 0.0;
      for (int j = 0; j < b.n_modes; ++j) {
        z[j] = apply(T[j], z[j]);
        if (n.a[j] != 0.0) {
          const double g1 = rng.normal(), g2 = rng.normal();
          z[j].x += L[j][0] * g1;
          z[j].y += L[j][1] * g1 + L[j][2] * g2;
        }
        const double w2 = b.omega_sq[j];
        norm += w2 * w2 * z[j].x * z[j].x + w2 * z[j].y * z[j].y;
      }
      integral += 0.5 * dt * (prev + norm);
      prev = norm;
    }
    const double x = std::exp(epsilon / t * integral);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n_paths;
  const double var = std::max(sumsq / n_paths - mean * mean, 0.0);
  const double se = std::sqrt(var / n_paths);
  return {epsilon, mean, se, 3.0, mean - 3.0 * se <= 3.0};
}

}  // namespace fdlkg
