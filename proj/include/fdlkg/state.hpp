#pragma once

#include <cmath>
#include <vector>

#include "fdlkg/basis.hpp"

namespace fdlkg {

// Spectral coefficients of (u, du/dt).
struct FieldState {
  std::vector<double> u, v;

  static FieldState zero(int n) {
    FieldState y;
    y.u.assign(n, 0.0);
    y.v.assign(n, 0.0);
    return y;
  }
};

struct FDLParams {
  double alpha = 0.1;       // damping/forcing strength
  double epsilon_l2 = 0.1;  // margin split in the second dissipation rate

  void validate() const {
    if (!(alpha > 0.0) || alpha > 1.0) throw config_error("alpha must lie in (0, 1]");
    if (!(epsilon_l2 > 0.0) || !(epsilon_l2 < 1.0))
      throw config_error("epsilon_l2 must lie in (0, 1)");
  }
};

// ||[u,v]||_{m,n}^2 = ||u||_m^2 + ||v||_n^2
inline double product_norm_sq(const FieldState& y, double m, double n, const SpectralBasis& b) {
  return sobolev_norm_sq(y.u, m, b) + sobolev_norm_sq(y.v, n, b);
}

inline double product_norm(const FieldState& y, double m, double n, const SpectralBasis& b) {
  return std::sqrt(product_norm_sq(y, m, n, b));
}

// Conjugation by (u,v) -> (u,-v) inverts the Hamiltonian flow.
inline FieldState time_reflect(FieldState y) {
  for (double& x : y.v) x = -x;
  return y;
}

}  // namespace fdlkg
