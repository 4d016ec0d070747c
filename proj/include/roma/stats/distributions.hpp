#pragma once

// Upper-tail probabilities for F, chi-square and Student t via the
// regularized incomplete beta and gamma functions (continued fractions with
// modified Lentz iteration).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "roma/error.hpp"

namespace roma::stats {

namespace detail {

inline constexpr double kEps = 1e-15;
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 10000;

// Lower regularized gamma P(a, x) by series; converges fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by continued fraction; for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
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

/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0)) fail(ErrorKind::kContract, "gamma shape must be positive");
  if (x <= 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

inline double regularized_gamma_p(double a, double x) { return 1.0 - regularized_gamma_q(a, x); }

/// Regularized incomplete beta I_x(a, b).
inline double regularized_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) fail(ErrorKind::kContract, "beta parameters must be positive");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_fraction(b, a, 1.0 - x) / b;
}

enum class Distribution { kF, kChiSquare, kStudentT };

/// df.second is used only by F.
struct DegreesOfFreedom {
  double first = 1;
  double second = 0;
};

/// Upper-tail probability P(X >= statistic); two-sided P(|T| >= |t|) for t.
inline double tail_probability(Distribution kind, double statistic, DegreesOfFreedom df) {
  if (std::isnan(statistic)) fail(ErrorKind::kContract, "statistic is NaN");
  if (!(df.first > 0)) fail(ErrorKind::kContract, "degrees of freedom must be positive");
  double p = 1.0;
  switch (kind) {
    case Distribution::kChiSquare:
      if (statistic < 0) fail(ErrorKind::kContract, "chi-square statistic must be >= 0");
      p = regularized_gamma_q(df.first / 2.0, statistic / 2.0);
      break;
    case Distribution::kF: {
      if (!(df.second > 0)) fail(ErrorKind::kContract, "F needs two positive degrees of freedom");
      if (statistic < 0) fail(ErrorKind::kContract, "F statistic must be >= 0");
      if (std::isinf(statistic)) return 0.0;
      const double x = df.second / (df.second + df.first * statistic);
      p = regularized_beta(df.second / 2.0, df.first / 2.0, x);
      break;
    }
    case Distribution::kStudentT: {
      if (std::isinf(statistic)) return 0.0;
      const double x = df.first / (df.first + statistic * statistic);
      p = regularized_beta(df.first / 2.0, 0.5, x);
      break;
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

/// t such that P(|T| >= t) = alpha.
inline double student_t_critical(double alpha, double df) {
  if (!(alpha > 0 && alpha < 1)) fail(ErrorKind::kContract, "alpha must be in (0,1)");
  double lo = 0.0;
  double hi = 1.0;
  while (tail_probability(Distribution::kStudentT, hi, {df}) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorKind::kContract, "t critical value diverged");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail_probability(Distribution::kStudentT, mid, {df}) > alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace roma::stats
