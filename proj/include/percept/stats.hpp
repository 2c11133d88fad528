#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "percept/common.hpp"

namespace percept {

inline double mean(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

struct PearsonResult {
  double r = kMissing;
  size_t n = 0;  // retained pair count
};

// Sample Pearson correlation; missing with fewer than 3 pairs or zero
// variance on either side.
inline PearsonResult pearson_pairs(std::span<const std::pair<double, double>> pairs) {
  PearsonResult res;
  res.n = pairs.size();
  if (pairs.size() < 3) return res;
  KahanSum sx, sy;
  for (const auto& [x, y] : pairs) {
    sx.add(x);
    sy.add(y);
  }
  const double mx = sx.value() / static_cast<double>(pairs.size());
  const double my = sy.value() / static_cast<double>(pairs.size());
  KahanSum sxy, sxx, syy;
  for (const auto& [x, y] : pairs) {
    sxy.add((x - mx) * (y - my));
    sxx.add((x - mx) * (x - mx));
    syy.add((y - my) * (y - my));
  }
  const double denom = std::sqrt(sxx.value()) * std::sqrt(syy.value());
  if (!(denom > 0.0)) return res;
  res.r = sxy.value() / denom;
  if (res.r > 1.0) res.r = 1.0;
  if (res.r < -1.0) res.r = -1.0;
  return res;
}

// Sample (n-1) variance, the convention used throughout.
inline double sample_variance(std::span<const double> xs) {
  const double mu = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - mu) * (x - mu));
  return s.value() / static_cast<double>(xs.size() - 1);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * detail::betacf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * detail::betacf(b, a, 1.0 - x) / b;
}

// Regularized lower incomplete gamma P(a, x).
inline double incomplete_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) {
    // series expansion
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for Q(a, x)
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double chi_square_cdf(double x, double dof) {
  return incomplete_gamma_p(dof / 2.0, x / 2.0);
}

inline double student_t_cdf(double t, double dof) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

// Two-sided P(|T| >= |t|) under Student t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return kMissing;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

// Inverse CDF by bisection; plenty for per-fit confidence bounds. Resolution
// near the median is limited to ~1e-8 by the dof/(dof+t^2) parameterization.
inline double student_t_quantile(double q, double dof) {
  if (q <= 0.0 || q >= 1.0) throw InternalError("student_t_quantile: q outside (0,1)");
  if (q == 0.5) return 0.0;
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, dof) > q) lo *= 2.0;
  while (student_t_cdf(hi, dof) < q) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace percept
