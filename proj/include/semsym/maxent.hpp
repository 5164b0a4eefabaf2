#pragma once

// Payload surrogate and the maximum-entropy problem
//
//   maximize h(Y)  subject to  E[log2(1 + α Y²/σ²)] = C,
//
// solved on a symmetric uniform grid. The stationary point has the Gibbs form
// p(y) ∝ (1 + α y²/σ²)^(-Λ); the solver finds Λ by bisection, using that the
// achieved payload is strictly decreasing in Λ.
//
// Payload is in bits, entropy in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/dist.hpp"
#include "semsym/error.hpp"
#include "semsym/quadrature.hpp"
#include "semsym/random.hpp"
#include "semsym/special.hpp"

namespace semsym {

/// Multi-ring APSK point count M(r) = 1 + κ π r² / A₀.
struct ApskModel {
  double packing = 1.0;  // κ ∈ (0, 1]
  double cell_area = 1.0;  // A₀ > 0
};

inline double apsk_count(const ApskModel& m, double r) {
  if (!(m.packing > 0.0 && m.packing <= 1.0) || !(m.cell_area > 0.0)) {
    throw Error(Errc::invalid_argument, "APSK model needs 0 < kappa <= 1 and A0 > 0");
  }
  if (!(r >= 0.0)) throw Error(Errc::negative_radius, "radius must be non-negative");
  return 1.0 + m.packing * std::numbers::pi * r * r / m.cell_area;
}

inline double apsk_bits(const ApskModel& m, double r) { return std::log2(apsk_count(m, r)); }

struct PayloadParams {
  double alpha = 1.0;      // (0, 1]
  double noise_var = 1.0;  // σ² > 0

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0, 1]");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
      throw Error(Errc::invalid_argument, "noise variance must be positive and finite");
    }
  }
  /// s² = σ²/α, the scale of the Gibbs solution.
  double scale_squared() const { return noise_var / alpha; }
};

/// ℓ(y) = log2(1 + α y²/σ²) bits.
inline double payload(const PayloadParams& p, double y) {
  return std::log1p(p.alpha * y * y / p.noise_var) / std::numbers::ln2;
}

/// E[ℓ(Y)] for Y from the model, by quadrature on [0, 32] plus a reciprocal
/// substitution for the tail.
inline double expected_payload(const PayloadParams& params, const TailModel& model) {
  params.validate();
  auto integrand = [&](double y) {
    const double lp = log_pdf(model, y);
    return payload(params, y) * std::exp(lp);
  };
  constexpr double split = 32.0;
  const quad::Tolerance tol{1e-15, 1e-12, 40};
  const quad::Result body = quad::integrate(integrand, 0.0, split, tol);
  const quad::Result tail = quad::integrate_tail(integrand, split, tol);
  const double value = 2.0 * (body.value + tail.value);
  const double err = 2.0 * (body.abs_error + tail.abs_error);
  if (!body.converged || !tail.converged) {
    if (err > 1e-8 * std::max(1.0, value)) {
      throw Error(Errc::quadrature_nonconvergence,
                  "expected payload quadrature reached error " + std::to_string(err));
    }
  }
  return value;
}

struct MaxEntOptions {
  double half_width = 100.0;
  std::size_t points = 20001;
  double lagrange_max = 500.0;
  /// Return solutions whose continuum tail mass beyond the grid exceeds 1e-6
  /// instead of raising grid-truncation.
  bool allow_truncated = false;
};

inline constexpr double kTailMassLimit = 1e-6;

/// Grid density in the cell-mass convention: mass[i] is the probability of the
/// cell centred on grid[i]; density ≈ mass / step.
struct MaxEntSolution {
  std::vector<double> grid;
  std::vector<double> mass;
  double step = 0.0;
  double lagrange = 0.0;
  double payload_bits = 0.0;
  double entropy_nats = 0.0;
  /// Continuum mass of the Gibbs law outside the grid (1 when it is improper).
  double tail_mass = 0.0;
  bool truncated = false;

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) m += mass[i] * grid[i];
    return m;
  }
  double variance() const {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) v += mass[i] * (grid[i] - mu) * (grid[i] - mu);
    return v;
  }

  /// Inverse of the piecewise-linear CDF (mass spread uniformly over each cell).
  double quantile(double u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (acc + mass[i] >= u) {
        const double frac = mass[i] > 0.0 ? (u - acc) / mass[i] : 0.5;
        return grid[i] - 0.5 * step + frac * step;
      }
      acc += mass[i];
    }
    return grid.back() + 0.5 * step;
  }
};

/// -Σ m ln m + ln Δ, the differential entropy of the piecewise-constant density.
inline double grid_entropy(const std::vector<double>& mass, double step) {
  double h = 0.0;
  for (double m : mass) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h + std::log(step);
}

namespace detail {

struct PayloadGrid {
  std::vector<double> y;
  std::vector<double> log_term;  // ln(1 + α y²/σ²)
  double step;
};

inline PayloadGrid make_payload_grid(const PayloadParams& params, const MaxEntOptions& opt) {
  if (opt.points < 201 || opt.points % 2 == 0) {
    throw Error(Errc::invalid_argument, "grid needs an odd number of points >= 201");
  }
  if (!(opt.half_width > 0.0)) throw Error(Errc::invalid_argument, "grid half-width must be positive");
  PayloadGrid g;
  g.step = 2.0 * opt.half_width / static_cast<double>(opt.points - 1);
  const auto half = static_cast<std::ptrdiff_t>(opt.points / 2);
  g.y.resize(opt.points);
  g.log_term.resize(opt.points);
  for (std::ptrdiff_t i = -half; i <= half; ++i) {
    const double y = static_cast<double>(i) * g.step;
    const auto idx = static_cast<std::size_t>(i + half);
    g.y[idx] = y;
    g.log_term[idx] = std::log1p(params.alpha * y * y / params.noise_var);
  }
  return g;
}

struct GibbsEval {
  std::vector<double> mass;
  double payload_bits;
};

inline GibbsEval gibbs_mass(const PayloadGrid& g, double lagrange) {
  GibbsEval e;
  e.mass.resize(g.y.size());
  double z = 0.0;
  for (std::size_t i = 0; i < g.y.size(); ++i) {
    e.mass[i] = std::exp(-lagrange * g.log_term[i]);
    z += e.mass[i];
  }
  double pay = 0.0;
  for (std::size_t i = 0; i < g.y.size(); ++i) {
    e.mass[i] /= z;
    pay += e.mass[i] * g.log_term[i];
  }
  e.payload_bits = pay / std::numbers::ln2;
  return e;
}

/// Mass of the continuum law ∝ (1 + y²/s²)^(-Λ) beyond |y| = w; 1 if improper.
inline double gibbs_tail_mass(double scale, double lagrange, double w) {
  if (!(lagrange > 0.5 + 1e-9)) return 1.0;
  auto f = [&](double y) { return std::exp(-lagrange * std::log1p((y / scale) * (y / scale))); };
  const double tail = quad::integrate_tail(f, w, {1e-300, 1e-10, 40}).value;
  const double log_total = std::log(scale) + 0.5 * std::log(std::numbers::pi) +
                           special::log_gamma(lagrange - 0.5) - special::log_gamma(lagrange);
  return std::min(1.0, 2.0 * tail / std::exp(log_total));
}

inline MaxEntSolution finish(const PayloadParams& params, const PayloadGrid& g, const MaxEntOptions& opt,
                             double lagrange, GibbsEval e) {
  MaxEntSolution s;
  s.grid = g.y;
  s.step = g.step;
  s.lagrange = lagrange;
  s.payload_bits = e.payload_bits;
  s.mass = std::move(e.mass);
  s.entropy_nats = grid_entropy(s.mass, s.step);
  s.tail_mass = gibbs_tail_mass(std::sqrt(params.scale_squared()), lagrange, opt.half_width + 0.5 * g.step);
  s.truncated = s.tail_mass > kTailMassLimit;
  return s;
}

}  // namespace detail

/// The Gibbs-form grid density at a given Λ.
inline MaxEntSolution gibbs_solution(const PayloadParams& params, double lagrange, const MaxEntOptions& opt = {}) {
  params.validate();
  if (!(lagrange >= 0.0)) throw Error(Errc::invalid_argument, "Lagrange multiplier must be non-negative");
  const detail::PayloadGrid g = detail::make_payload_grid(params, opt);
  return detail::finish(params, g, opt, lagrange, detail::gibbs_mass(g, lagrange));
}

inline MaxEntSolution solve_maxent(const PayloadParams& params, double target_bits, const MaxEntOptions& opt = {}) {
  params.validate();
  if (!(target_bits > 0.0) || !std::isfinite(target_bits)) {
    throw Error(Errc::infeasible_constraint, "payload target must be positive");
  }
  const detail::PayloadGrid g = detail::make_payload_grid(params, opt);
  const double flat = detail::gibbs_mass(g, 0.0).payload_bits;
  const double steep = detail::gibbs_mass(g, opt.lagrange_max).payload_bits;
  if (!(target_bits < flat)) {
    throw Error(Errc::infeasible_constraint, "payload target " + std::to_string(target_bits) +
                                                 " bits is not below the flat-grid payload " + std::to_string(flat));
  }
  if (!(target_bits > steep)) {
    throw Error(Errc::infeasible_constraint, "payload target " + std::to_string(target_bits) +
                                                 " bits needs a Lagrange multiplier above " +
                                                 std::to_string(opt.lagrange_max));
  }
  double lo = 0.0;
  double hi = opt.lagrange_max;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::gibbs_mass(g, mid).payload_bits > target_bits) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lagrange = 0.5 * (lo + hi);
  MaxEntSolution s = detail::finish(params, g, opt, lagrange, detail::gibbs_mass(g, lagrange));
  if (std::abs(s.payload_bits - target_bits) > 1e-6) {
    throw Error(Errc::infeasible_constraint, "bisection could not meet the payload target within 1e-6 bits");
  }
  if (s.truncated && !opt.allow_truncated) {
    throw Error(Errc::grid_truncation, "Lagrange multiplier " + std::to_string(lagrange) + " leaves tail mass " +
                                           std::to_string(s.tail_mass) + " beyond the grid");
  }
  return s;
}

/// max |ln p(y) + Λ ln(1 + α y²/σ²) - const| over cells with p > 1e-12, the
/// discrete stationarity condition of the Lagrangian.
inline double stationarity_residual(const PayloadParams& params, const MaxEntSolution& s) {
  const std::size_t center = s.grid.size() / 2;
  const double ref = std::log(s.mass[center]);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    if (s.mass[i] <= 1e-12) continue;
    const double lt = std::log1p(params.alpha * s.grid[i] * s.grid[i] / params.noise_var);
    worst = std::max(worst, std::abs(std::log(s.mass[i]) + s.lagrange * lt - ref));
  }
  return worst;
}

/// KL of the grid density from the moment-matched Gaussian, i.e. the NLL gap
/// ½ ln(2πe σ̂²) - h(p) in nats.
inline double gaussian_nll_gap(const MaxEntSolution& s) {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * s.variance()) - s.entropy_nats;
}

/// n stratified inverse-CDF draws at levels (k - 0.5)/n, rescaled to unit variance.
inline SymbolBatch inverse_cdf_samples(const MaxEntSolution& s, std::size_t n) {
  if (n == 0) throw Error(Errc::invalid_argument, "sample count must be >= 1");
  std::vector<double> cum(s.mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.mass.size(); ++i) {
    acc += s.mass[i];
    cum[i] = acc;
  }
  const double sd = std::sqrt(s.variance());
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n) * acc;
    const auto i = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    const std::size_t idx = std::min(i, s.mass.size() - 1);
    const double below = idx == 0 ? 0.0 : cum[idx - 1];
    const double frac = s.mass[idx] > 0.0 ? (u - below) / s.mass[idx] : 0.5;
    out[k] = (s.grid[idx] - 0.5 * s.step + frac * s.step) / sd;
  }
  return SymbolBatch(n, 1, std::move(out), "maxent:stratified");
}

struct PropositionReport {
  MaxEntSolution solution;
  std::size_t perturbations = 0;
  std::size_t violations = 0;
  /// max over perturbations of h(q) - h(p*); negative when every q loses entropy.
  double max_violation = 0.0;
  double min_entropy_gap = 0.0;     // min h(p*) - h(q)
  double max_payload_error = 0.0;   // max |E_q[ℓ] - C| in bits
  double mixture_entropy_gap = 0.0; // h(p*) - h(0.9 p* + 0.1 r), r a payload-matched Gaussian shape
};

inline constexpr double kEntropyViolationTolerance = 1e-9;

namespace detail {

inline double grid_payload(const std::vector<double>& mass, const std::vector<double>& log_term) {
  double pay = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) pay += mass[i] * log_term[i];
  return pay / std::numbers::ln2;
}

/// Gaussian-shaped grid density whose payload matches target (bisection on width).
inline std::vector<double> payload_matched_gaussian(const PayloadGrid& g, double target_bits) {
  auto shape = [&](double width) {
    std::vector<double> m(g.y.size());
    double z = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = std::exp(-0.5 * (g.y[i] / width) * (g.y[i] / width));
      z += m[i];
    }
    for (auto& v : m) v /= z;
    return m;
  };
  double lo = 0.5 * g.step;
  double hi = g.y.back();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (grid_payload(shape(mid), g.log_term) < target_bits) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return shape(0.5 * (lo + hi));
}

}  // namespace detail

/// Checks the variational claim directly: random smooth perturbations q of the
/// solver's p*, projected so that Σq = 1 and E_q[ℓ] = E_{p*}[ℓ] exactly and
/// kept positive, never exceed h(p*) by more than 1e-9 nats.
inline PropositionReport verify_proposition1(const PayloadParams& params, double target_bits,
                                             std::size_t perturbations = 20, std::uint64_t seed = 0,
                                             const MaxEntOptions& opt = {}) {
  PropositionReport rep;
  rep.solution = solve_maxent(params, target_bits, opt);
  const MaxEntSolution& p = rep.solution;
  const detail::PayloadGrid g = detail::make_payload_grid(params, opt);
  const std::vector<double>& ell = g.log_term;  // natural-log payload; constraint is linear either way

  double e_l = 0.0;
  double e_ll = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    e_l += p.mass[i] * ell[i];
    e_ll += p.mass[i] * ell[i] * ell[i];
  }
  const double det = e_ll - e_l * e_l;

  Rng rng = make_rng(seed, stream::perturb);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double spread = std::sqrt(p.variance());

  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.min_entropy_gap = std::numeric_limits<double>::infinity();
  std::vector<double> bump(p.mass.size());
  std::vector<double> q(p.mass.size());
  for (std::size_t r = 0; r < perturbations; ++r) {
    std::fill(bump.begin(), bump.end(), 0.0);
    for (int j = 0; j < 6; ++j) {
      const double center = spread * (6.0 * unit(rng) - 3.0);
      const double width = spread * (0.2 + 1.3 * unit(rng));
      const double amp = normal(rng);
      for (std::size_t i = 0; i < bump.size(); ++i) {
        const double u = (p.grid[i] - center) / width;
        bump[i] += amp * std::exp(-0.5 * u * u);
      }
    }
    // Remove the components along 1 and ℓ (in the p*-weighted inner product).
    double e_g = 0.0;
    double e_gl = 0.0;
    for (std::size_t i = 0; i < bump.size(); ++i) {
      e_g += p.mass[i] * bump[i];
      e_gl += p.mass[i] * bump[i] * ell[i];
    }
    const double beta1 = (e_gl - e_l * e_g) / det;
    const double beta0 = e_g - beta1 * e_l;
    double peak = 0.0;
    for (std::size_t i = 0; i < bump.size(); ++i) {
      bump[i] -= beta0 + beta1 * ell[i];
      if (p.mass[i] > 0.0) peak = std::max(peak, std::abs(bump[i]));
    }
    const double eps = peak > 0.0 ? 0.5 / peak : 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = p.mass[i] * (1.0 + eps * bump[i]);

    const double hq = grid_entropy(q, p.step);
    const double diff = hq - p.entropy_nats;
    rep.max_violation = std::max(rep.max_violation, diff);
    rep.min_entropy_gap = std::min(rep.min_entropy_gap, -diff);
    if (diff > kEntropyViolationTolerance) ++rep.violations;
    rep.max_payload_error =
        std::max(rep.max_payload_error, std::abs(detail::grid_payload(q, g.log_term) - target_bits));
    ++rep.perturbations;
  }

  const std::vector<double> alt = detail::payload_matched_gaussian(g, p.payload_bits);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = 0.9 * p.mass[i] + 0.1 * alt[i];
  rep.mixture_entropy_gap = p.entropy_nats - grid_entropy(q, p.step);
  return rep;
}

}  // namespace semsym
