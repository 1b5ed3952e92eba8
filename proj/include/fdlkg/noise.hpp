#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fdlkg/basis.hpp"

namespace fdlkg {

// Noise amplitudes a_j >= 0 on the retained modes, with the moments
// A_n = sum a_j^2 omega_j^{2n} entering every dissipation balance.
struct NoiseSpec {
  std::vector<double> a;
  std::string profile = "custom";

  static NoiseSpec inverse_sq(const SpectralBasis& b) {
    NoiseSpec n;
    n.profile = "inverse_sq";
    n.a.resize(b.n_modes);
    for (int j = 0; j < b.n_modes; ++j) n.a[j] = 1.0 / b.omega_sq[j];
    return n;
  }

  static NoiseSpec flat_first(const SpectralBasis& b, int K, double amplitude = 1.0) {
    if (K < 1 || K > b.n_modes) throw config_error("flat_first_K needs 1 <= K <= n_modes");
    NoiseSpec n;
    n.profile = "flat_first_K";
    n.a.assign(b.n_modes, 0.0);
    for (int j = 0; j < K; ++j) n.a[j] = amplitude;
    return n;
  }

  static NoiseSpec custom(const SpectralBasis& b, std::vector<double> amps) {
    if (static_cast<int>(amps.size()) != b.n_modes)
      throw config_error("custom noise profile must list one amplitude per mode");
    for (double x : amps)
      if (!(x >= 0.0)) throw config_error("noise amplitudes must be nonnegative");
    NoiseSpec n;
    n.a = std::move(amps);
    return n;
  }

  double moment(int n, const SpectralBasis& b) const {
    double s = 0.0;
    for (int j = 0; j < b.n_modes; ++j) {
      double w = 1.0;
      for (int r = 0; r < n; ++r) w *= b.omega_sq[j];
      s += a[j] * a[j] * w;
    }
    return s;
  }

  double A0(const SpectralBasis& b) const { return moment(0, b); }
  double A1(const SpectralBasis& b) const { return moment(1, b); }

  bool all_positive() const {
    for (double x : a)
      if (!(x > 0.0)) return false;
    return true;
  }
};

}  // namespace fdlkg
