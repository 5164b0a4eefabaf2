#pragma once

// Adaptive 15-point Gauss-Kronrod quadrature on finite intervals, plus the
// reciprocal substitution used for semi-infinite tails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace semsym::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;
};

struct Tolerance {
  double abs = 1e-13;
  double rel = 1e-12;
  int max_depth = 40;
};

namespace detail {

// QUADPACK qk15 abscissae (Kronrod), Kronrod weights, and the embedded 7-point
// Gauss weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Result gk15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half), true};
}

template <class F>
void adapt(F& f, double a, double b, double abs_tol, int depth, Result& out) {
  const double mid = 0.5 * (a + b);
  const Result left = gk15(f, a, mid);
  const Result right = gk15(f, mid, b);
  const double refined = left.value + right.value;
  const double err = left.abs_error + right.abs_error;
  if (err <= abs_tol || depth <= 0 || !(mid > a && mid < b)) {
    out.value += refined;
    out.abs_error += err;
    if (err > abs_tol) out.converged = false;
    return;
  }
  adapt(f, a, mid, 0.5 * abs_tol, depth - 1, out);
  adapt(f, mid, b, 0.5 * abs_tol, depth - 1, out);
}

}  // namespace detail

/// ∫_a^b f. The absolute target is max(tol.abs, tol.rel * |coarse estimate|),
/// split evenly between bisected halves.
template <class F>
Result integrate(F&& f, double a, double b, Tolerance tol = {}) {
  if (a == b) return {};
  if (a > b) {
    Result r = integrate(f, b, a, tol);
    r.value = -r.value;
    return r;
  }
  const Result whole = detail::gk15(f, a, b);
  const double target = std::max(tol.abs, tol.rel * std::abs(whole.value));
  if (whole.abs_error <= 1e-3 * target) return whole;
  Result out{0.0, 0.0, true};
  detail::adapt(f, a, b, target, tol.max_depth, out);
  return out;
}

/// ∫_a^∞ f for a > 0, through y = a / u, u ∈ (0, 1]. The integrand must decay
/// faster than 1/y.
template <class F>
Result integrate_tail(F&& f, double a, Tolerance tol = {}) {
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double y = a / u;
    const double v = f(y) * (a / (u * u));
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, tol);
}

/// Composite Simpson weights for an odd number of equally spaced nodes.
inline std::vector<double> simpson_weights(std::size_t points, double spacing) {
  std::vector<double> w(points, 0.0);
  if (points < 3 || points % 2 == 0) return w;
  for (std::size_t i = 0; i < points; ++i) {
    const double c = (i == 0 || i + 1 == points) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * spacing / 3.0;
  }
  return w;
}

}  // namespace semsym::quad
