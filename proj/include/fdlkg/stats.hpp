#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fdlkg/domain.hpp"
#include "fdlkg/rng.hpp"

namespace fdlkg {

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  void merge(const KahanSum& o) {
    add(o.s);
    c += o.c;
  }
  double value() const { return s + c; }
};

// Welford mean/variance, compensated power sums up to x^6, and an optional
// exp(scale x) channel. merge() is exact enough to make chunked parallel
// reduction agree with the serial pass to roundoff.
struct MomentAccumulator {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  std::array<KahanSum, 6> pow_sums;
  double exp_scale = 0.0;
  KahanSum exp_sum, exp_sq;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  explicit MomentAccumulator(double scale = 0.0) : exp_scale(scale) {}

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
    double p = 1.0;
    for (auto& ks : pow_sums) {
      p *= x;
      ks.add(p);
    }
    if (exp_scale != 0.0) {
      const double e = std::exp(exp_scale * x);
      exp_sum.add(e);
      exp_sq.add(e * e);
    }
    min = std::min(min, x);
    max = std::max(max, x);
  }

  void merge(const MomentAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const long nn = n + o.n;
    m2 += o.m2 + d * d * (static_cast<double>(n) * o.n / nn);
    mean += d * o.n / nn;
    n = nn;
    for (std::size_t k = 0; k < pow_sums.size(); ++k) pow_sums[k].merge(o.pow_sums[k]);
    exp_sum.merge(o.exp_sum);
    exp_sq.merge(o.exp_sq);
    min = std::min(min, o.min);
    max = std::max(max, o.max);
  }

  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }
  double power_mean(int p) const { return n > 0 ? pow_sums[p - 1].value() / n : 0.0; }
  double exp_moment() const { return n > 0 ? exp_sum.value() / n : 0.0; }
  double exp_moment_se() const {
    if (n < 2) return 0.0;
    const double m = exp_moment();
    const double var = std::max(exp_sq.value() / n - m * m, 0.0);
    return std::sqrt(var / n);
  }
};

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<long> counts;
  long under = 0, over = 0;

  Histogram(double l, double h, int bins) : lo(l), hi(h), counts(bins, 0) {
    if (!(h > l) || bins < 1) throw config_error("histogram needs hi > lo and bins >= 1");
  }

  void add(double x) {
    if (x < lo) {
      ++under;
      return;
    }
    if (x >= hi) {
      if (x == hi) {
        ++counts.back();
        return;
      }
      ++over;
      return;
    }
    const int k = static_cast<int>((x - lo) / (hi - lo) * counts.size());
    ++counts[std::min<int>(k, static_cast<int>(counts.size()) - 1)];
  }

  void merge(const Histogram& o) {
    if (o.lo != lo || o.hi != hi || o.counts.size() != counts.size())
      throw config_error("histogram merge: incompatible binning");
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
    under += o.under;
    over += o.over;
  }

  long total() const {
    long t = under + over;
    for (long c : counts) t += c;
    return t;
  }

  double max_bin_mass() const {
    const long t = total();
    if (t == 0) return 0.0;
    return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / t;
  }
};

// Integrated autocorrelation time by Geyer's initial positive sequence:
// consecutive pairs of autocorrelations are summed while positive.
inline double integrated_autocorr_time(std::span<const double> x, int max_lag = 10000) {
  const long n = static_cast<long>(x.size());
  if (n < 8) return 1.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (c0 == 0.0) return 1.0;
  auto rho = [&](long k) {
    double s = 0.0;
    for (long i = 0; i + k < n; ++i) s += (x[i] - mean) * (x[i + k] - mean);
    return s / (n * c0);
  };
  const long lim = std::min<long>(n - 2, max_lag);
  double g = 1.0 + rho(1);  // Gamma_0
  if (g <= 0.0) return 1.0;
  double tau = 2.0 * g - 1.0;
  for (long m = 1; 2 * m + 1 <= lim; ++m) {
    g = rho(2 * m) + rho(2 * m + 1);
    if (g <= 0.0) break;
    tau += 2.0 * g;
  }
  return std::max(tau, 0.2);
}

inline double effective_sample_size(std::span<const double> x) {
  return x.size() / integrated_autocorr_time(x);
}

// standard error of the mean with autocorrelation folded in
inline double se_mean_autocorr(std::span<const double> x) {
  const long n = static_cast<long>(x.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1);
  return std::sqrt(var * integrated_autocorr_time(x) / n);
}

struct LsFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0, se_slope = 0.0;
};

inline LsFit least_squares(std::span<const double> x, std::span<const double> y) {
  const long n = static_cast<long>(x.size());
  if (n < 2 || y.size() != x.size()) throw config_error("least_squares needs two same-length series");
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw config_error("least_squares: degenerate abscissae");
  LsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (long i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.se_slope = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return f;
}

inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw config_error("ks_distance needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // evaluate the CDF gap only after consuming every copy of the current value,
  // otherwise ties register a spurious 1/n step
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

inline double bootstrap_se_mean(std::span<const double> x, int reps, RngStream& rng) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::vector<double> means;
  means.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[rng.bits() % n];
    means.push_back(s / n);
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= reps;
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  return std::sqrt(var / (reps - 1));
}

}  // namespace fdlkg
