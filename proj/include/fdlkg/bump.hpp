#pragma once

#include <cmath>
#include <vector>

#include "fdlkg/domain.hpp"

namespace fdlkg {

namespace detail {

// 8-point Gauss-Legendre on [-1, 1]
inline constexpr double gl8_x[8] = {-0.9602898564975362, -0.7966664774136267,
                                    -0.5255324099163290, -0.1834346424956498,
                                    0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975362};
inline constexpr double gl8_w[8] = {0.1012285362903763, 0.2223810344533745,
                                    0.3137066458778873, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066458778873,
                                    0.2223810344533745, 0.1012285362903763};

}  // namespace detail

// Smooth compactly supported profile h and its antiderivative H(x) = int_0^x h.
// h(x) = amplitude * exp(1 - 1/(1-t^2)) on |t| < 1, t = (x-center)/width, so
// h(center) = amplitude. H has no closed form; a panelled Gauss-Legendre table
// over the support is built once and partial panels are integrated on demand,
// accurate to ~1e-14 relative.
struct BumpFunction {
  double center, width, amplitude;

  BumpFunction(double c, double w, double amp = 1.0) : center(c), width(w), amplitude(amp) {
    if (!(w > 0.0)) throw config_error("bump width must be positive");
    prefix_.assign(n_panels_ + 1, 0.0);
    const double lo = center - width;
    const double step = 2.0 * width / n_panels_;
    for (int k = 0; k < n_panels_; ++k)
      prefix_[k + 1] = prefix_[k] + panel_(lo + k * step, lo + (k + 1) * step);
    origin_ = antideriv_(0.0);
  }

  double h(double x) const {
    const double t = (x - center) / width;
    if (std::abs(t) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  }

  double H(double x) const { return antideriv_(x) - origin_; }

  double mass() const { return prefix_.back(); }

 private:
  static constexpr int n_panels_ = 256;
  std::vector<double> prefix_;
  double origin_ = 0.0;

  double panel_(double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += detail::gl8_w[i] * h(mid + half * detail::gl8_x[i]);
    return s * half;
  }

  // int_{-inf}^x h
  double antideriv_(double x) const {
    const double lo = center - width, hi = center + width;
    if (x <= lo) return 0.0;
    if (x >= hi) return prefix_.back();
    const double step = 2.0 * width / n_panels_;
    const int k = std::min(static_cast<int>((x - lo) / step), n_panels_ - 1);
    return prefix_[k] + panel_(lo + k * step, x);
  }
};

}  // namespace fdlkg
