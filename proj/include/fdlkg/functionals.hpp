#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fdlkg/state.hpp"
#include "fdlkg/transforms.hpp"

namespace fdlkg {

// kappa = min(omega_min^2, 1); gamma0 = 2 kappa^2 / (2 + omega_min^2)
inline double kappa(const SpectralBasis& b) { return std::min(b.omega_min_sq(), 1.0); }

inline double gamma0(const SpectralBasis& b) {
  const double k = kappa(b);
  return 2.0 * k * k / (2.0 + b.omega_min_sq());
}

inline double quartic_integral(const std::vector<double>& u, const SpectralBasis& b) {
  return power_integral(to_physical(u, b), 4, b);
}

inline double sextic_integral(const std::vector<double>& u, const SpectralBasis& b) {
  return power_integral(to_physical(u, b), 6, b);
}

// Galerkin projection of u^3; exact for the retained band at padding >= 2.
inline std::vector<double> cubic_term(const std::vector<double>& u, const SpectralBasis& b) {
  PhysicalField f = to_physical(u, b);
  for (double& x : f.values) x = x * x * x;
  return to_spectral(f, b);
}

// E = 1/2 ||[u,v]||_{1,0}^2 + 1/4 int u^4
inline double energy(const FieldState& y, const SpectralBasis& b) {
  return 0.5 * product_norm_sq(y, 1.0, 0.0, b) + 0.25 * quartic_integral(y.u, b);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * c[j];
  return s;
}

inline double weighted_dot(const std::vector<double>& a, const std::vector<double>& c,
                           const SpectralBasis& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += b.omega_sq[j] * a[j] * c[j];
  return s;
}

// G1 = E + (alpha w0/2) <u,v> + (alpha^2 w0/4) ||u||_1^2, w0 = omega_min^2
inline double g1(const FieldState& y, double alpha, const SpectralBasis& b) {
  const double w0 = b.omega_min_sq();
  return energy(y, b) + 0.5 * alpha * w0 * dot(y.u, y.v) +
         0.25 * alpha * alpha * w0 * sobolev_norm_sq(y.u, 1.0, b);
}

// G2 = E + (alpha/2) <u,v>_1 + (alpha^2/4) ||u||_2^2
inline double g2(const FieldState& y, double alpha, const SpectralBasis& b) {
  return energy(y, b) + 0.5 * alpha * weighted_dot(y.u, y.v, b) +
         0.25 * alpha * alpha * sobolev_norm_sq(y.u, 2.0, b);
}

// L1 = 1/2 [ w0 ||u||_1^2 + 2||v||_1^2 - w0 ||v||^2 + w0 int u^4 ]
inline double l1(const FieldState& y, const SpectralBasis& b) {
  const double w0 = b.omega_min_sq();
  return 0.5 * (w0 * sobolev_norm_sq(y.u, 1.0, b) + 2.0 * sobolev_norm_sq(y.v, 1.0, b) -
                w0 * sobolev_norm_sq(y.v, 0.0, b) + w0 * quartic_integral(y.u, b));
}

// L2 = 1/2 [ (1-eps) ||u||_2^2 + ||v||_1^2 ]
inline double l2(const FieldState& y, double epsilon, const SpectralBasis& b) {
  return 0.5 * ((1.0 - epsilon) * sobolev_norm_sq(y.u, 2.0, b) + sobolev_norm_sq(y.v, 1.0, b));
}

// Perturbation energies: quadratic parts of G1, G2 evaluated on [r,s].
inline double n1(const FieldState& rs, double alpha, const SpectralBasis& b) {
  const double w0 = b.omega_min_sq();
  return 0.5 * product_norm_sq(rs, 1.0, 0.0, b) + 0.5 * alpha * w0 * dot(rs.u, rs.v) +
         0.25 * alpha * alpha * w0 * sobolev_norm_sq(rs.u, 1.0, b);
}

inline double n2(const FieldState& rs, double alpha, const SpectralBasis& b) {
  const double w0 = b.omega_min_sq();
  return 0.5 * product_norm_sq(rs, 2.0, 1.0, b) + 0.5 * alpha * w0 * weighted_dot(rs.u, rs.v, b) +
         0.25 * alpha * alpha * w0 * sobolev_norm_sq(rs.u, 2.0, b);
}

}  // namespace fdlkg
