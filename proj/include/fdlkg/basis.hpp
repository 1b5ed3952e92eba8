#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fdlkg/domain.hpp"

namespace fdlkg {

enum class TrigKind : std::uint8_t { constant = 0, cosine = 1, sine = 2 };

// The N lowest Laplacian eigenmodes plus a padded collocation grid.
//
// Torus modes are the real pairs sqrt(2) V^{-1/2} cos(k.x), sin(k.x) over
// representatives of {k,-k} (lexicographically greater one kept) and the
// constant V^{-1/2}; ties in lambda = |k|^2 break by representative then
// cos before sin. Interval modes are sqrt(2/pi) sin((j+1)x), lambda = (j+1)^2.
//
// The grid carries quadrature weights that integrate products of up to four
// basis functions exactly at padding 2 (six at padding 3): uniform per-axis
// rule on the torus, trapezoid with endpoints on the interval.
struct SpectralBasis {
  DomainSpec domain;
  int n_modes = 0;
  int padding = 2;

  std::vector<double> lambda;                 // ascending
  std::vector<double> omega_sq;               // mass_squared + lambda_j
  std::vector<std::array<int, 3>> wavevec;    // torus representative k; interval (j+1,0,0)
  std::vector<TrigKind> trig;

  std::vector<std::array<double, 3>> grid_x;  // collocation points
  std::vector<double> grid_w;                 // quadrature weights, sum = volume
  std::vector<double> mode_values;            // n_modes x n_grid, row-major

  int n_grid = 0;

  double omega_min_sq() const { return domain.mass_squared + domain.lambda0(); }
  const double* mode_row(int j) const { return mode_values.data() + static_cast<std::size_t>(j) * n_grid; }
};

namespace detail {

struct TorusModeKey {
  long lam;                  // |k|^2, integer to keep ties exact
  std::array<int, 3> k;
  TrigKind t;
  bool operator<(const TorusModeKey& o) const {
    if (lam != o.lam) return lam < o.lam;
    if (k != o.k) return std::lexicographical_compare(o.k.begin(), o.k.end(), k.begin(), k.end());
    return t < o.t;
  }
};

}  // namespace detail

inline SpectralBasis build_basis(const DomainSpec& dom, int n_modes, int padding = 2) {
  dom.validate();
  if (n_modes < 1) throw config_error("n_modes must be positive");
  if (padding < 2) throw config_error("grid padding must be at least 2");

  SpectralBasis b;
  b.domain = dom;
  b.n_modes = n_modes;
  b.padding = padding;

  if (dom.kind == DomainKind::interval) {
    for (int j = 0; j < n_modes; ++j) {
      const int f = j + 1;
      b.lambda.push_back(static_cast<double>(f) * f);
      b.omega_sq.push_back(dom.mass_squared + b.lambda.back());
      b.wavevec.push_back({f, 0, 0});
      b.trig.push_back(TrigKind::sine);
    }
    // Trapezoid with M = padding*(n_modes+1) panels integrates cos(n x) exactly
    // for n < 2M; quartic products of the retained sines reach n = 4*n_modes.
    const int M = padding * (n_modes + 1);
    b.n_grid = M + 1;
    const double h = pi / M;
    for (int i = 0; i <= M; ++i) {
      b.grid_x.push_back({i * h, 0.0, 0.0});
      b.grid_w.push_back((i == 0 || i == M) ? h / 2.0 : h);
    }
    const double amp = std::sqrt(2.0 / pi);
    b.mode_values.resize(static_cast<std::size_t>(n_modes) * b.n_grid);
    for (int j = 0; j < n_modes; ++j)
      for (int i = 0; i < b.n_grid; ++i)
        b.mode_values[static_cast<std::size_t>(j) * b.n_grid + i] =
            amp * std::sin((j + 1) * b.grid_x[i][0]);
    return b;
  }

  const int d = dom.dimension;
  std::vector<detail::TorusModeKey> keys;
  int K = 0;
  for (;;) {
    ++K;
    keys.clear();
    keys.push_back({0, {0, 0, 0}, TrigKind::constant});
    const int K1 = d > 1 ? K : 0, K2 = d > 2 ? K : 0;
    for (int q0 = -K; q0 <= K; ++q0)
      for (int q1 = -K1; q1 <= K1; ++q1)
        for (int q2 = -K2; q2 <= K2; ++q2) {
          const std::array<int, 3> k{q0, q1, q2};
          if (k == std::array<int, 3>{0, 0, 0}) continue;
          const std::array<int, 3> neg{-q0, -q1, -q2};
          if (std::lexicographical_compare(k.begin(), k.end(), neg.begin(), neg.end())) continue;
          const long lam = static_cast<long>(q0) * q0 + static_cast<long>(q1) * q1 +
                           static_cast<long>(q2) * q2;
          keys.push_back({lam, k, TrigKind::cosine});
          keys.push_back({lam, k, TrigKind::sine});
        }
    std::sort(keys.begin(), keys.end());
    // Any mode outside the box has some |k_a| > K, hence lambda >= (K+1)^2; the
    // sorted prefix is complete once the cut falls strictly below that.
    if (static_cast<int>(keys.size()) >= n_modes &&
        keys[n_modes - 1].lam < static_cast<long>(K + 1) * (K + 1))
      break;
  }
  keys.resize(n_modes);

  int kmax = 0;
  for (const auto& m : keys)
    for (int a = 0; a < d; ++a) kmax = std::max(kmax, std::abs(m.k[a]));

  for (const auto& m : keys) {
    b.lambda.push_back(static_cast<double>(m.lam));
    b.omega_sq.push_back(dom.mass_squared + b.lambda.back());
    b.wavevec.push_back(m.k);
    b.trig.push_back(m.t);
  }

  // Per-axis uniform rule with M = padding*(2*kmax+1) points is exact for
  // circle frequencies up to M-1 >= 4*kmax (quartics) at padding 2.
  const int M = std::max(padding * (2 * kmax + 1), 4);
  const int G = [&] {
    int g = 1;
    for (int a = 0; a < d; ++a) g *= M;
    return g;
  }();
  b.n_grid = G;
  const double w0 = dom.volume() / G;
  const double hx = 2.0 * pi / M;
  b.grid_x.resize(G, {0.0, 0.0, 0.0});
  b.grid_w.assign(G, w0);
  for (int i = 0; i < G; ++i) {
    int r = i;
    for (int a = d - 1; a >= 0; --a) {
      b.grid_x[i][a] = (r % M) * hx;
      r /= M;
    }
  }

  const double vol = dom.volume();
  const double c0 = 1.0 / std::sqrt(vol);
  const double cpair = std::sqrt(2.0) / std::sqrt(vol);
  b.mode_values.resize(static_cast<std::size_t>(n_modes) * G);
  for (int j = 0; j < n_modes; ++j) {
    double* row = b.mode_values.data() + static_cast<std::size_t>(j) * G;
    for (int i = 0; i < G; ++i) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += b.wavevec[j][a] * b.grid_x[i][a];
      switch (b.trig[j]) {
        case TrigKind::constant: row[i] = c0; break;
        case TrigKind::cosine: row[i] = cpair * std::cos(phase); break;
        case TrigKind::sine: row[i] = cpair * std::sin(phase); break;
      }
    }
  }
  return b;
}

// ||c||_m^2 = sum omega_j^{2m} c_j^2, any real m.
inline double sobolev_norm_sq(std::span<const double> c, double m, const SpectralBasis& b) {
  double s = 0.0;
  if (m == 0.0) {
    for (double x : c) s += x * x;
    return s;
  }
  const long mi = std::lround(m);
  if (m == static_cast<double>(mi) && mi >= 0 && mi <= 4) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      double w = 1.0;
      for (long r = 0; r < mi; ++r) w *= b.omega_sq[j];
      s += w * c[j] * c[j];
    }
    return s;
  }
  for (std::size_t j = 0; j < c.size(); ++j) s += std::pow(b.omega_sq[j], m) * c[j] * c[j];
  return s;
}

inline double sobolev_norm(std::span<const double> c, double m, const SpectralBasis& b) {
  return std::sqrt(sobolev_norm_sq(c, m, b));
}

}  // namespace fdlkg
