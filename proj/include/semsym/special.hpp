#pragma once

// Log-gamma and digamma for positive real arguments.
//
// Both use the upward recurrence to push the argument past a threshold and
// then the Stirling / asymptotic series. Absolute error is ~1e-15 on
// [0.5, 500], which is what the Student-t normalization constant needs.

#include <cmath>
#include <limits>
#include <numbers>

namespace semsym::special {

namespace detail {
inline constexpr double kStirlingShift = 15.0;
}

inline double log_gamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return x;
  double shift_log = 0.0;
  // ln Γ(x) = ln Γ(x+n) - ln(x (x+1) ... (x+n-1)); accumulate the product in
  // chunks so it never overflows.
  double prod = 1.0;
  while (x < detail::kStirlingShift) {
    prod *= x;
    if (prod > 1e250) {
      shift_log += std::log(prod);
      prod = 1.0;
    }
    x += 1.0;
  }
  shift_log += std::log(prod);

  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_2k / (2k (2k-1) x^(2k-1)), k = 1..7.
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift_log;
}

inline double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

/// ln B(a, b).
inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace semsym::special
