#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fdlkg {

inline constexpr double pi = std::numbers::pi;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a trajectory leaves the representable range; carries the model time.
struct blowup_error : std::runtime_error {
  double time;
  explicit blowup_error(double t)
      : std::runtime_error("coefficient blowup at t = " + std::to_string(t)), time(t) {}
};

enum class DomainKind : std::uint8_t { torus = 0, interval = 1 };

// Spatial domain of the field. The torus has side 2*pi per axis; the interval is
// (0, pi) with Dirichlet ends. mass_squared > -lambda_0 keeps every omega_j^2
// positive, so the massless wave equation is admissible only on the interval.
struct DomainSpec {
  DomainKind kind = DomainKind::torus;
  int dimension = 1;
  double mass_squared = 1.0;

  void validate() const {
    if (kind == DomainKind::torus) {
      if (dimension < 1 || dimension > 3)
        throw config_error("torus dimension must be 1, 2, or 3");
      if (!(mass_squared > 0.0))
        throw config_error("torus requires mass_squared > 0");
    } else {
      if (dimension != 1)
        throw config_error("interval domain is one-dimensional");
      if (!(mass_squared > -1.0))
        throw config_error("interval requires mass_squared > -1");
    }
  }

  // Smallest Laplacian eigenvalue: 0 for the constant mode, 1 for sin(x).
  double lambda0() const { return kind == DomainKind::torus ? 0.0 : 1.0; }

  double volume() const {
    if (kind == DomainKind::interval) return pi;
    double v = 1.0;
    for (int a = 0; a < dimension; ++a) v *= 2.0 * pi;
    return v;
  }
};

}  // namespace fdlkg
