#pragma once

// From empirical symbol batches to densities and fitted tail models: Gaussian
// KDE with Silverman's bandwidth, KDE-based KL divergence and resubstitution
// entropy, MLE of the tail index ν, NLL scoring and QQ data.
//
// Units: every log-likelihood, entropy and divergence here is in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/dist.hpp"
#include "semsym/error.hpp"
#include "semsym/quadrature.hpp"
#include "semsym/random.hpp"

namespace semsym {

namespace detail {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population (1/n)
};

inline Moments moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.variance = ss / static_cast<double>(v.size());
  return m;
}

inline double gaussian_kernel(double u) {
  static const double inv_sqrt_two_pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return inv_sqrt_two_pi * std::exp(-0.5 * u * u);
}

// Kernels are evaluated only within this many bandwidths of their center;
// φ(8) ≈ 5e-15.
inline constexpr double kKernelReach = 8.0;

}  // namespace detail

/// 1.06 · σ̂ · n^(-1/5).
inline double silverman_bandwidth(double std_dev, std::size_t n) {
  if (!(std_dev > 0.0) || !std::isfinite(std_dev)) {
    throw Error(Errc::degenerate_input, "bandwidth needs a positive standard deviation");
  }
  if (n < 2) throw Error(Errc::degenerate_input, "bandwidth needs at least two samples");
  return 1.06 * std_dev * std::pow(static_cast<double>(n), -0.2);
}

enum class KdeMode { identical, non_identical };

inline std::string to_string(KdeMode m) { return m == KdeMode::identical ? "identical" : "non_identical"; }

inline KdeMode parse_kde_mode(std::string_view s) {
  if (s == "identical") return KdeMode::identical;
  if (s == "non_identical") return KdeMode::non_identical;
  throw Error(Errc::invalid_argument, "KDE mode must be identical or non_identical, got '" + std::string(s) + "'");
}

/// Gaussian mixture over symbol values. In identical mode there is one pooled
/// component list (all B·M values) and one bandwidth; otherwise one list and
/// bandwidth per dimension.
struct KdeEstimate {
  KdeMode mode = KdeMode::identical;
  std::size_t dims = 1;
  std::vector<std::vector<double>> centers;
  std::vector<double> bandwidths;

  std::size_t components() const noexcept { return centers.size(); }
};

namespace detail {

inline double bandwidth_floor(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return 1e-6 * ((*hi - *lo) + 1.0);
}

/// Silverman bandwidth, or the floor when the spread is degenerate.
inline double pooled_bandwidth(std::span<const double> v) {
  const double floor = bandwidth_floor(v);
  const Moments m = moments(v);
  if (v.size() < 2 || !(m.variance > 0.0)) return floor;
  return std::max(floor, silverman_bandwidth(std::sqrt(m.variance), v.size()));
}

}  // namespace detail

inline KdeEstimate kde_build(const SymbolBatch& batch, KdeMode mode) {
  KdeEstimate est;
  est.mode = mode;
  est.dims = batch.cols();
  if (mode == KdeMode::identical) {
    est.centers.emplace_back(batch.values().begin(), batch.values().end());
    est.bandwidths.push_back(detail::pooled_bandwidth(est.centers.front()));
    return est;
  }
  if (batch.rows() < 2) {
    throw Error(Errc::degenerate_dimension, "non_identical KDE needs at least two samples per dimension");
  }
  for (std::size_t c = 0; c < batch.cols(); ++c) {
    std::vector<double> col = batch.column(c);
    const detail::Moments m = detail::moments(col);
    if (!(m.variance > 0.0)) {
      throw Error(Errc::degenerate_dimension, "dimension " + std::to_string(c) + " is constant");
    }
    est.bandwidths.push_back(silverman_bandwidth(std::sqrt(m.variance), col.size()));
    est.centers.push_back(std::move(col));
  }
  return est;
}

inline double kde_pdf(const KdeEstimate& est, double y, std::optional<std::size_t> dim = std::nullopt) {
  std::size_t k = 0;
  if (est.mode == KdeMode::non_identical) {
    if (!dim) throw Error(Errc::missing_dim, "non_identical KDE needs a dimension index");
    if (*dim >= est.components()) throw Error(Errc::invalid_argument, "dimension index out of range");
    k = *dim;
  }
  const double h = est.bandwidths[k];
  double sum = 0.0;
  for (double c : est.centers[k]) sum += detail::gaussian_kernel((y - c) / h);
  return sum / (h * static_cast<double>(est.centers[k].size()));
}

/// Uniform quadrature grid for KL integrals. With refine set, spacing is
/// tightened to at most a quarter of the narrowest bandwidth and the range is
/// widened to cover every kernel.
struct KlGrid {
  double half_width = 10.0;
  std::size_t points = 2001;
  bool refine = false;
};

struct KlResult {
  double total_nats = 0.0;            // Σ_i KL(q_i ‖ p); M·KL(q ‖ p) in identical mode
  std::vector<double> per_component;  // KL of each mixture component list
  double truncation_mass = 0.0;       // largest q mass outside the grid over components
  double half_width = 0.0;
  std::size_t points = 0;
  /// ∂ total / ∂ center, same layout as KdeEstimate::centers (only when requested).
  std::vector<std::vector<double>> center_gradient;
};

namespace detail {

struct KernelGrid {
  double lo;
  double step;
  std::size_t points;
  std::vector<double> weights;
};

inline KernelGrid resolve_grid(const KdeEstimate& est, KlGrid spec) {
  double half = spec.half_width;
  std::size_t points = spec.points;
  if (spec.refine) {
    double reach = 0.0;
    double narrow = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < est.components(); ++k) {
      narrow = std::min(narrow, est.bandwidths[k]);
      for (double c : est.centers[k]) reach = std::max(reach, std::abs(c) + kKernelReach * est.bandwidths[k]);
    }
    half = std::max(half, reach);
    const double wanted = 2.0 * half / (0.25 * narrow);
    constexpr double kMaxPoints = 4'000'001.0;
    points = std::max<std::size_t>(points, static_cast<std::size_t>(std::min(wanted, kMaxPoints)) + 1);
  }
  if (points % 2 == 0) ++points;
  if (points < 3) points = 3;
  const double step = 2.0 * half / static_cast<double>(points - 1);
  return {-half, step, points, quad::simpson_weights(points, step)};
}

/// Evaluates one mixture on the grid, touching only grid nodes in kernel reach.
inline std::vector<double> mixture_on_grid(std::span<const double> centers, double h, const KernelGrid& g) {
  std::vector<double> q(g.points, 0.0);
  const double norm = 1.0 / (h * static_cast<double>(centers.size()));
  const double reach = kKernelReach * h;
  const auto last = static_cast<std::ptrdiff_t>(g.points) - 1;
  for (double c : centers) {
    const auto first_idx = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil((c - reach - g.lo) / g.step)));
    const auto last_idx = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(std::floor((c + reach - g.lo) / g.step)));
    for (std::ptrdiff_t j = first_idx; j <= last_idx; ++j) {
      const double y = g.lo + static_cast<double>(j) * g.step;
      q[static_cast<std::size_t>(j)] += gaussian_kernel((y - c) / h) * norm;
    }
  }
  return q;
}

inline double mass_outside(std::span<const double> centers, double h, double lo, double hi) {
  double m = 0.0;
  for (double c : centers) {
    m += 0.5 * std::erfc((hi - c) / (h * std::numbers::sqrt2)) + 0.5 * std::erfc((c - lo) / (h * std::numbers::sqrt2));
  }
  return m / static_cast<double>(centers.size());
}

}  // namespace detail

/// KL(q ‖ p) of the KDE against a target law, by Simpson quadrature. Under the
/// factorized model the joint divergence is the sum over dimensions, so the
/// pooled (identical) estimate counts M times.
inline KlResult kde_kl(const KdeEstimate& est, const TailModel& target, KlGrid grid = {}, bool with_gradient = false) {
  const detail::KernelGrid g = detail::resolve_grid(est, grid);
  KlResult out;
  out.half_width = -g.lo;
  out.points = g.points;

  std::vector<double> log_p(g.points);
  for (std::size_t j = 0; j < g.points; ++j) log_p[j] = log_pdf(target, g.lo + static_cast<double>(j) * g.step);

  const double multiplicity = est.mode == KdeMode::identical ? static_cast<double>(est.dims) : 1.0;
  for (std::size_t k = 0; k < est.components(); ++k) {
    const auto& centers = est.centers[k];
    const double h = est.bandwidths[k];
    const std::vector<double> q = detail::mixture_on_grid(centers, h, g);
    double kl = 0.0;
    std::vector<double> dkl_dq(with_gradient ? g.points : 0, 0.0);
    for (std::size_t j = 0; j < g.points; ++j) {
      if (q[j] <= 0.0) continue;
      const double lr = std::log(q[j]) - log_p[j];
      kl += g.weights[j] * q[j] * lr;
      if (with_gradient) dkl_dq[j] = g.weights[j] * (lr + 1.0);
    }
    out.per_component.push_back(kl);
    out.total_nats += multiplicity * kl;
    out.truncation_mass = std::max(out.truncation_mass, detail::mass_outside(centers, h, g.lo, -g.lo));

    if (with_gradient) {
      // ∂q(y)/∂c = φ((y-c)/h) (y-c) / (N h³); bandwidth is held fixed.
      std::vector<double> grad(centers.size(), 0.0);
      const double scale = multiplicity / (h * h * h * static_cast<double>(centers.size()));
      const double reach = detail::kKernelReach * h;
      const auto last = static_cast<std::ptrdiff_t>(g.points) - 1;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const double c = centers[i];
        const auto j0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil((c - reach - g.lo) / g.step)));
        const auto j1 = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(std::floor((c + reach - g.lo) / g.step)));
        double acc = 0.0;
        for (std::ptrdiff_t j = j0; j <= j1; ++j) {
          const double d = g.lo + static_cast<double>(j) * g.step - c;
          acc += dkl_dq[static_cast<std::size_t>(j)] * detail::gaussian_kernel(d / h) * d;
        }
        grad[i] = acc * scale;
      }
      out.center_gradient.push_back(std::move(grad));
    }
  }
  return out;
}

struct ResubstitutionEntropy {
  double entropy_nats = 0.0;
  double bandwidth = 0.0;
  /// -ln q(v_i) for every sample, in input order.
  std::vector<double> neg_log_density;
};

/// Resubstitution estimate h ≈ -(1/n) Σ ln q(v_i), q the Silverman KDE of the
/// same sample. The KDE is evaluated by linear binning at spacing h/32 and
/// discrete convolution with a kernel truncated at 8h; only occupied bins are
/// visited, so heavy-tailed samples cost no more than light ones.
inline ResubstitutionEntropy kde_resubstitution_entropy(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::insufficient_samples, "entropy estimate needs at least two samples");
  ResubstitutionEntropy out;
  const double h = detail::pooled_bandwidth(values);
  out.bandwidth = h;
  const double step = h / 32.0;
  const auto taps = static_cast<std::int64_t>(std::ceil(detail::kKernelReach * 32.0));
  const double lo = *std::min_element(values.begin(), values.end());

  struct BinWeight {
    std::int64_t bin;
    double weight;
  };
  std::vector<BinWeight> binned;
  binned.reserve(2 * values.size());
  std::vector<std::int64_t> sample_bin(values.size());
  std::vector<double> sample_frac(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = (values[i] - lo) / step;
    const auto j = static_cast<std::int64_t>(std::floor(t));
    const double f = t - static_cast<double>(j);
    sample_bin[i] = j;
    sample_frac[i] = f;
    binned.push_back({j, 1.0 - f});
    binned.push_back({j + 1, f});
  }
  std::sort(binned.begin(), binned.end(), [](const BinWeight& a, const BinWeight& b) { return a.bin < b.bin; });
  std::vector<std::int64_t> bins;
  std::vector<double> weights;
  for (const auto& bw : binned) {
    if (!bins.empty() && bins.back() == bw.bin) {
      weights.back() += bw.weight;
    } else {
      bins.push_back(bw.bin);
      weights.push_back(bw.weight);
    }
  }

  std::vector<double> kernel(static_cast<std::size_t>(taps + 1));
  const double norm = 1.0 / (h * static_cast<double>(values.size()));
  for (std::int64_t d = 0; d <= taps; ++d) {
    kernel[static_cast<std::size_t>(d)] = detail::gaussian_kernel(static_cast<double>(d) / 32.0) * norm;
  }

  // Density at each occupied bin: sum over occupied neighbours within reach.
  std::vector<double> density(bins.size(), 0.0);
  std::size_t left = 0;
  for (std::size_t a = 0; a < bins.size(); ++a) {
    while (bins[left] < bins[a] - taps) ++left;
    double acc = 0.0;
    for (std::size_t b = left; b < bins.size() && bins[b] <= bins[a] + taps; ++b) {
      const std::int64_t d = bins[b] > bins[a] ? bins[b] - bins[a] : bins[a] - bins[b];
      acc += weights[b] * kernel[static_cast<std::size_t>(d)];
    }
    density[a] = acc;
  }

  out.neg_log_density.resize(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::lower_bound(bins.begin(), bins.end(), sample_bin[i]);
    const auto a = static_cast<std::size_t>(it - bins.begin());
    const double q = (1.0 - sample_frac[i]) * density[a] + sample_frac[i] * density[a + 1];
    out.neg_log_density[i] = -std::log(q);
    sum += out.neg_log_density[i];
  }
  out.entropy_nats = sum / static_cast<double>(values.size());
  return out;
}

/// Mean of -ln p over all B·M entries (nats per scalar symbol).
inline double nll(const SymbolBatch& batch, const TailModel& model) {
  double sum = 0.0;
  for (double y : batch.values()) sum -= log_pdf(model, y);
  return sum / static_cast<double>(batch.size());
}

struct Standardization {
  std::vector<double> means;
  std::vector<double> scales;  // population standard deviations
};

/// Centers each dimension and scales it to unit population variance.
inline std::pair<SymbolBatch, Standardization> standardize(const SymbolBatch& batch) {
  Standardization st;
  std::vector<double> out(batch.size());
  for (std::size_t c = 0; c < batch.cols(); ++c) {
    const std::vector<double> col = batch.column(c);
    const detail::Moments m = detail::moments(col);
    if (!(m.variance > 0.0)) {
      throw Error(Errc::degenerate_dimension, "dimension " + std::to_string(c) + " is constant");
    }
    const double sd = std::sqrt(m.variance);
    st.means.push_back(m.mean);
    st.scales.push_back(sd);
    for (std::size_t r = 0; r < batch.rows(); ++r) out[r * batch.cols() + c] = (col[r] - m.mean) / sd;
  }
  return {SymbolBatch(batch.rows(), batch.cols(), std::move(out), batch.meta()), std::move(st)};
}

struct FitReport {
  double nu_hat = 0.0;
  double nll = 0.0;  // nats per scalar symbol, standardized data under StudentT(nu_hat)
  Standardization standardization;
  bool hit_upper_bound = false;
  std::size_t samples = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kNuSearchFloor = 2.001;

/// Average NLL of already-standardized values under StudentT(ν), the
/// objective fit_nu minimizes.
inline double student_t_nll(std::span<const double> z, double nu) {
  const double inv = 1.0 / (nu - 2.0);
  double acc = 0.0;
  for (double v : z) acc += std::log1p(v * v * inv);
  return -detail::student_t_log_norm(nu) + 0.5 * (nu + 1.0) * acc / static_cast<double>(z.size());
}

/// MLE of ν for the unit-variance t after per-dimension standardization,
/// golden-section search on [2.001, ν_max] to 1e-4 in ν.
inline FitReport fit_nu(const SymbolBatch& batch, double nu_max = 200.0) {
  if (!(nu_max > kNuSearchFloor)) throw Error(Errc::invalid_argument, "nu_max must exceed 2.001");
  FitReport rep;
  rep.samples = batch.size();
  if (batch.size() < 10) {
    throw Error(Errc::insufficient_samples, "fitting needs at least 10 scalar symbols");
  }
  if (batch.size() < 100) rep.warnings.push_back("fewer than 100 scalar symbols; fitted nu is unreliable");
  auto [z, st] = standardize(batch);
  rep.standardization = std::move(st);
  const std::span<const double> vals = z.values();
  auto f = [&](double nu) { return student_t_nll(vals, nu); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kNuSearchFloor;
  double b = nu_max;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-4) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double best = 0.5 * (a + b);
  double best_f = f(best);
  const double top_f = f(nu_max);
  if (top_f <= best_f) {
    best = nu_max;
    best_f = top_f;
  }
  rep.nu_hat = best;
  rep.nll = best_f;
  rep.hit_upper_bound = best == nu_max;
  return rep;
}

struct QqPoint {
  double level;
  double empirical;
  double model;
};

/// Empirical quantiles at Hazen positions (k - 0.5)/n against model quantiles.
inline std::vector<QqPoint> qq_data(const SymbolBatch& batch, const TailModel& model, std::size_t n_quantiles) {
  if (n_quantiles < 2 || n_quantiles > batch.size()) {
    throw Error(Errc::invalid_argument, "need 2 <= quantile count <= number of symbols");
  }
  std::vector<double> sorted(batch.values().begin(), batch.values().end());
  std::sort(sorted.begin(), sorted.end());
  const TailCdf cdf(model);
  const auto n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out;
  out.reserve(n_quantiles);
  for (std::size_t k = 1; k <= n_quantiles; ++k) {
    const double p = (static_cast<double>(k) - 0.5) / static_cast<double>(n_quantiles);
    // Hazen empirical quantile: order statistic i sits at (i + 0.5)/n.
    const double pos = std::clamp(p * n - 0.5, 0.0, n - 1.0);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    const double emp = i + 1 < sorted.size() ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
    out.push_back({p, emp, cdf.quantile(p)});
  }
  return out;
}

}  // namespace semsym
