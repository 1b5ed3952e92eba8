#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fdlkg/bump.hpp"

using namespace fdlkg;

namespace {

// independent oracle: adaptive Simpson on the bump profile
double simpson(double (*f)(double, const BumpFunction&), const BumpFunction& g, double a, double b,
               double fa, double fm, double fb, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm, g), frm = f(rm, g);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, g, a, m, fa, flm, fm, eps * 0.5, depth - 1) +
         simpson(f, g, m, b, fm, frm, fb, eps * 0.5, depth - 1);
}

double integrate_h(const BumpFunction& g, double a, double b) {
  auto f = [](double x, const BumpFunction& gg) { return gg.h(x); };
  return simpson(f, g, a, b, g.h(a), g.h(0.5 * (a + b)), g.h(b), 1e-13, 40);
}

}  // namespace

TEST_CASE("bump profile: peak, support, symmetry") {
  const BumpFunction g(1.5, 0.75, 2.0);
  REQUIRE(g.h(1.5) == Catch::Approx(2.0));
  REQUIRE(g.h(1.5 + 0.75) == 0.0);
  REQUIRE(g.h(1.5 - 0.75) == 0.0);
  REQUIRE(g.h(3.0) == 0.0);
  REQUIRE(g.h(-10.0) == 0.0);
  // the map d -> h amplifies a 1 ulp error in (x - center)/width by
  // 2t/(1-t^2)^2, about 3e3 at d = 0.74, so the tolerance is conditioned
  for (double d : {0.1, 0.3, 0.6, 0.74}) {
    REQUIRE(g.h(1.5 + d) == Catch::Approx(g.h(1.5 - d)).epsilon(1e-10));
    REQUIRE(g.h(1.5 + d) > 0.0);
    REQUIRE(g.h(1.5 + d) < 2.0);
  }
  // approach to the edge is smooth: values decay fast but stay positive inside
  REQUIRE(g.h(1.5 + 0.7499) < 1e-100);
}

TEST_CASE("antiderivative matches adaptive quadrature and vanishes at the origin") {
  const BumpFunction g(0.8, 0.5, 1.3);
  REQUIRE(g.H(0.0) == Catch::Approx(0.0).margin(1e-15));
  for (double x : {-1.0, 0.2, 0.5, 0.77, 0.94, 1.1, 1.31, 2.0, 7.0}) {
    // clamp to just past the support so the adaptive sampler cannot step over
    // the whole bump; h vanishes beyond it anyway
    const double ref = integrate_h(g, 0.0, std::min(x, 1.31));
    REQUIRE(g.H(x) == Catch::Approx(ref).margin(1e-11));
  }
  // monotone nondecreasing
  double prev = g.H(-2.0);
  for (double x = -2.0; x <= 3.0; x += 0.01) {
    const double cur = g.H(x);
    REQUIRE(cur >= prev - 1e-15);
    prev = cur;
  }
}

TEST_CASE("total mass scales with width and amplitude") {
  // int exp(1 - 1/(1-s^2)) ds over [-1,1], frozen from the quadrature oracle
  const double unit = 1.2069003224377188;
  const BumpFunction g1(0.0, 1.0, 1.0);
  REQUIRE(g1.mass() == Catch::Approx(unit).epsilon(1e-10));
  REQUIRE(g1.mass() == Catch::Approx(integrate_h(g1, -1.0, 1.0)).margin(1e-11));
  const BumpFunction g2(3.0, 0.25, 4.0);
  REQUIRE(g2.mass() == Catch::Approx(4.0 * 0.25 * unit).epsilon(1e-10));
  REQUIRE(g2.H(10.0) - g2.H(-10.0) == Catch::Approx(g2.mass()).margin(1e-12));
}
