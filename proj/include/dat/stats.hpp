#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dat/types.hpp"

namespace dat {

/// Degenerate statistics input (empty sample, no variance). Exit code 3.
class StatsError : public Error {
 public:
  using Error::Error;
};

inline double mean(std::span<const double> v) {
  if (v.empty()) throw StatsError("no data");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample variance (n - 1 denominator).
inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw StatsError("variance needs at least two samples");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b). Pass y = 1 - x computed without
/// cancellation when x is close to 1.
inline double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, y) / b;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

/// P(|T| >= |t|) for Student-t with df degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw StatsError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2));
  return std::clamp(p, 0.0, 1.0);
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Two-tailed Welch t-test of mean(a) - mean(b).
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw StatsError("welch test needs at least two samples per group");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw StatsError("no variance");
  WelchResult r;
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  r.n_a = a.size();
  r.n_b = b.size();
  r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
  const double na1 = static_cast<double>(a.size() - 1);
  const double nb1 = static_cast<double>(b.size() - 1);
  r.df = se2 * se2 / (va * va / na1 + vb * vb / nb1);
  r.p = student_t_two_tailed(r.t, r.df);
  return r;
}

/// W1 between the empirical distributions of a and b, integrating the absolute
/// difference of the two quantile functions over [0, 1].
inline double wasserstein_1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw StatsError("wasserstein distance needs non-empty samples");
  std::vector<double> xs(a.begin(), a.end()), ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n = xs.size(), m = ys.size();
  if (n == m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::fabs(xs[i] - ys[i]);
    return sum / static_cast<double>(n);
  }
  // Quantile breakpoints i/n and j/m, kept exact in units of 1/(n*m).
  std::size_t i = 0, j = 0, pos = 0;
  double sum = 0.0;
  while (i < n && j < m) {
    const std::size_t next_a = (i + 1) * m, next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    sum += static_cast<double>(next - pos) * std::fabs(xs[i] - ys[j]);
    pos = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return sum / static_cast<double>(n * m);
}

/// 1-based nearest-rank index ceil(p * n), clamped to [1, n]. A relative
/// tolerance of 1e-9 absorbs binary rounding of p (0.99 * 100 is rank 99).
inline std::size_t nearest_rank(double p, std::size_t n) {
  const double x = p * static_cast<double>(n);
  auto k = static_cast<std::ptrdiff_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(n)));
}

/// Upper-tail winsorized mean: values above the nearest-rank p-quantile are
/// replaced by it.
inline double winsorized_mean(std::span<const double> values, double p = 0.99) {
  if (values.empty()) throw StatsError("no data");
  if (!(p > 0.0 && p <= 1.0)) throw StatsError("winsorization percentile must be in (0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double cap = sorted[nearest_rank(p, sorted.size()) - 1];
  double sum = 0.0;
  for (double v : sorted) sum += std::min(v, cap);
  return sum / static_cast<double>(sorted.size());
}

/// Drops floor(trim * n) values from each tail and averages the rest.
inline double trimmed_mean(std::span<const double> values, double trim = 0.10) {
  if (values.empty()) throw StatsError("no data");
  if (!(trim >= 0.0 && trim < 0.5)) throw StatsError("trim fraction must be in [0, 0.5)");
  const double x = trim * static_cast<double>(values.size());
  const auto k = static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
  if (2 * k >= values.size()) throw StatsError("trimming removes every value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = k; i < sorted.size() - k; ++i) sum += sorted[i];
  return sum / static_cast<double>(sorted.size() - 2 * k);
}

/// Relative change of mean DAT against the baseline sample a.
inline double pct_delta_dat(std::span<const double> a, std::span<const double> b) {
  const double base = mean(a);
  if (!(base > 0.0)) throw StatsError("baseline mean must be positive");
  return (base - mean(b)) / base;
}

}  // namespace dat
