#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fdlkg/basis.hpp"

namespace fdlkg {

struct PhysicalField {
  std::vector<double> values;  // one per grid point of the owning basis
};

inline PhysicalField to_physical(std::span<const double> c, const SpectralBasis& b) {
  PhysicalField f;
  f.values.assign(b.n_grid, 0.0);
  for (int j = 0; j < b.n_modes; ++j) {
    const double cj = c[j];
    if (cj == 0.0) continue;
    const double* row = b.mode_row(j);
    for (int i = 0; i < b.n_grid; ++i) f.values[i] += cj * row[i];
  }
  return f;
}

inline std::vector<double> to_spectral(const PhysicalField& f, const SpectralBasis& b) {
  std::vector<double> c(b.n_modes, 0.0);
  for (int j = 0; j < b.n_modes; ++j) {
    const double* row = b.mode_row(j);
    double s = 0.0;
    for (int i = 0; i < b.n_grid; ++i) s += b.grid_w[i] * f.values[i] * row[i];
    c[j] = s;
  }
  return c;
}

inline double integrate(const PhysicalField& f, const SpectralBasis& b) {
  double s = 0.0;
  for (int i = 0; i < b.n_grid; ++i) s += b.grid_w[i] * f.values[i];
  return s;
}

// integral of f^p; exact for band-limited f when p <= 2*padding
inline double power_integral(const PhysicalField& f, int p, const SpectralBasis& b) {
  double s = 0.0;
  for (int i = 0; i < b.n_grid; ++i) {
    double t = 1.0;
    for (int r = 0; r < p; ++r) t *= f.values[i];
    s += b.grid_w[i] * t;
  }
  return s;
}

inline double lp_norm(const PhysicalField& f, int p, const SpectralBasis& b) {
  if (p < 1) throw config_error("lp_norm requires p >= 1");
  double s = 0.0;
  for (int i = 0; i < b.n_grid; ++i) s += b.grid_w[i] * std::pow(std::abs(f.values[i]), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace fdlkg
