#pragma once

// Integer-df tail probabilities from the classical finite-series closed
// forms (chi-square via erfc, t via theta = atan(t / sqrt(nu)), F via the
// even/odd degree-of-freedom cases). Shares no code with the library's
// continued fractions.

#include <cmath>
#include <numbers>

namespace oracle {

inline double chi2_upper(double x, int nu) {
  if (x <= 0) return 1.0;
  if (nu % 2 == 0) {
    double sum = 0.0;
    double term = 1.0;
    for (int r = 0; r < nu / 2; ++r) {
      if (r > 0) term *= (x / 2.0) / r;
      sum += term;
    }
    return std::exp(-x / 2.0) * sum;
  }
  const double z = std::sqrt(x);
  const double tail = std::erfc(z / std::numbers::sqrt2);
  const double phi = std::exp(-x / 2.0) / std::sqrt(2.0 * std::numbers::pi);
  double sum = 0.0;
  double term = 0.0;
  for (int r = 1; r <= (nu - 1) / 2; ++r) {
    term = r == 1 ? z : term * x / (2 * r - 1);
    sum += term;
  }
  return tail + 2.0 * phi * sum;
}

// P(|T| < t) expressed through theta.
inline double t_central(double theta, int nu) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (nu % 2 == 1) {
    if (nu == 1) return 2.0 * theta / std::numbers::pi;
    double term = c;
    double total = c;
    for (int j = 1; j <= (nu - 3) / 2; ++j) {
      term *= (2.0 * j) / (2.0 * j + 1.0) * c * c;
      total += term;
    }
    return 2.0 / std::numbers::pi * (theta + s * total);
  }
  double term = 1.0;
  double total = 1.0;
  for (int j = 1; j <= (nu - 2) / 2; ++j) {
    term *= (2.0 * j - 1.0) / (2.0 * j) * c * c;
    total += term;
  }
  return s * total;
}

inline double t_two_sided(double t, int nu) {
  if (std::isinf(t)) return 0.0;
  return 1.0 - t_central(std::atan(std::abs(t) / std::sqrt(static_cast<double>(nu))), nu);
}

inline double f_upper(double f, int n1, int n2) {
  if (f <= 0) return 1.0;
  const double x = n2 / (n2 + n1 * f);
  if (n1 % 2 == 0) {
    double term = 1.0;
    double total = 1.0;
    for (int j = 1; j <= (n1 - 2) / 2; ++j) {
      term *= (n2 + 2.0 * (j - 1)) / (2.0 * j) * (1.0 - x);
      total += term;
    }
    return std::pow(x, n2 / 2.0) * total;
  }
  if (n2 % 2 == 0) {
    double term = 1.0;
    double total = 1.0;
    for (int j = 1; j <= (n2 - 2) / 2; ++j) {
      term *= (n1 + 2.0 * (j - 1)) / (2.0 * j) * x;
      total += term;
    }
    return 1.0 - std::pow(1.0 - x, n1 / 2.0) * total;
  }
  const double theta = std::atan(std::sqrt(n1 * f / n2));
  const double central = t_central(theta, n2);
  double beta = 0.0;
  if (n1 > 1) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    double term = 1.0;
    double total = 1.0;
    for (int j = 1; j <= (n1 - 3) / 2; ++j) {
      term *= (n2 + 2.0 * j - 1.0) / (2.0 * j + 1.0) * s * s;
      total += term;
    }
    beta = 2.0 / std::sqrt(std::numbers::pi) *
           std::exp(std::lgamma((n2 + 1) / 2.0) - std::lgamma(n2 / 2.0)) * s *
           std::pow(c, n2) * total;
  }
  return 1.0 - central + beta;
}

}  // namespace oracle
