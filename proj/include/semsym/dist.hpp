#pragma once

// Variance-normalized Student's t family with its Gaussian (ν → ∞) and
// Cauchy (ν → 1) limits.
//
//   p(y; ν) = Γ((ν+1)/2) / (√(π(ν-2)) Γ(ν/2)) · (1 + y²/(ν-2))^(-(ν+1)/2),  ν > 2
//
// has unit variance for every admissible ν. The Cauchy limit is the standard
// Cauchy law (no variance normalization is possible there).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/error.hpp"
#include "semsym/quadrature.hpp"
#include "semsym/random.hpp"
#include "semsym/special.hpp"

namespace semsym {

class TailModel {
 public:
  enum class Kind { student_t, gaussian, cauchy };

  static TailModel student_t(double nu) {
    if (!std::isfinite(nu)) throw Error(Errc::invalid_nu, "degrees of freedom must be finite");
    if (!(nu > 2.0)) throw Error(Errc::invalid_nu, "unit-variance Student's t needs nu > 2");
    return TailModel(Kind::student_t, nu);
  }
  static TailModel gaussian() { return TailModel(Kind::gaussian, std::numeric_limits<double>::infinity()); }
  static TailModel cauchy() { return TailModel(Kind::cauchy, 1.0); }

  /// "gaussian", "cauchy" or "student_t:<nu>".
  static TailModel parse(std::string_view text) {
    if (text == "gaussian") return gaussian();
    if (text == "cauchy") return cauchy();
    constexpr std::string_view prefix = "student_t:";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string_view num = text.substr(prefix.size());
      double nu = 0.0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), nu);
      if (ec != std::errc{} || ptr != num.data() + num.size()) {
        throw Error(Errc::invalid_argument, "cannot parse degrees of freedom in '" + std::string(text) + "'");
      }
      return student_t(nu);
    }
    throw Error(Errc::invalid_argument, "unknown model '" + std::string(text) +
                                            "' (expected gaussian, cauchy or student_t:<nu>)");
  }

  Kind kind() const noexcept { return kind_; }
  /// Degrees of freedom; +inf for the Gaussian limit, 1 for Cauchy.
  double nu() const noexcept { return nu_; }

  std::string to_string() const {
    switch (kind_) {
      case Kind::gaussian: return "gaussian";
      case Kind::cauchy: return "cauchy";
      case Kind::student_t: break;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), nu_);
    return "student_t:" + std::string(buf, res.ptr);
  }

  friend bool operator==(const TailModel&, const TailModel&) = default;

 private:
  TailModel(Kind kind, double nu) : kind_(kind), nu_(nu) {}

  Kind kind_;
  double nu_;
};

/// p(y) ∝ (1 + y²/s²)^(-ν_t), the unnormalized maximum-entropy solution.
struct ScaledTailLaw {
  double scale = 1.0;
  double tail_exponent = 2.0;
};

struct NormalizedLaw {
  TailModel model;
  double unit_variance_rescale;
};

namespace detail {

inline void require_finite(double y) {
  if (!std::isfinite(y)) throw Error(Errc::non_finite_input, "density argument must be finite");
}

/// ln(1 + t²) without overflow for huge |t|.
inline double log1p_square(double t) {
  const double a = std::abs(t);
  if (a > 1e100) return 2.0 * std::log(a) + std::log1p(1.0 / (a * a));
  return std::log1p(a * a);
}

inline double student_t_log_norm(double nu) {
  return special::log_gamma(0.5 * (nu + 1.0)) - special::log_gamma(0.5 * nu) -
         0.5 * std::log(std::numbers::pi * (nu - 2.0));
}

}  // namespace detail

inline double log_pdf(const TailModel& model, double y) {
  detail::require_finite(y);
  switch (model.kind()) {
    case TailModel::Kind::gaussian:
      return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * y * y;
    case TailModel::Kind::cauchy:
      return -std::log(std::numbers::pi) - detail::log1p_square(y);
    case TailModel::Kind::student_t: {
      const double nu = model.nu();
      return detail::student_t_log_norm(nu) - 0.5 * (nu + 1.0) * detail::log1p_square(y / std::sqrt(nu - 2.0));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double pdf(const TailModel& model, double y) { return std::exp(log_pdf(model, y)); }

/// Differential entropy in nats.
inline double differential_entropy(const TailModel& model) {
  switch (model.kind()) {
    case TailModel::Kind::gaussian:
      return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
    case TailModel::Kind::cauchy:
      return std::log(4.0 * std::numbers::pi);
    case TailModel::Kind::student_t: {
      const double nu = model.nu();
      const double a = 0.5 * (nu + 1.0);
      return a * (special::digamma(a) - special::digamma(0.5 * nu)) + 0.5 * std::log(nu - 2.0) +
             special::log_beta(0.5 * nu, 0.5);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// n exact draws as an n × 1 batch. Student's t uses the Gaussian-over-chi
/// scale mixture z · √((ν-2)/χ²_ν); the Gaussian uses the same normal stream,
/// so a Gaussian and a t batch with one seed share their z draws.
inline SymbolBatch sample(const TailModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::invalid_argument, "sample count must be >= 1");
  Rng normal_rng = make_rng(seed, stream::normal);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(normal_rng);

  if (model.kind() != TailModel::Kind::gaussian) {
    Rng chi_rng = make_rng(seed, stream::chi_square);
    const double nu = model.nu();
    std::gamma_distribution<double> chi_square(0.5 * nu, 2.0);
    // Cauchy: z / √χ²_1; Student's t additionally rescaled to unit variance.
    const double numerator = model.kind() == TailModel::Kind::cauchy ? 1.0 : nu - 2.0;
    for (auto& v : out) {
      double g = chi_square(chi_rng);
      while (!(g > 0.0)) g = chi_square(chi_rng);
      v *= std::sqrt(numerator / g);
    }
  }
  return SymbolBatch(n, 1, std::move(out), model.to_string());
}

/// Maps p ∝ (1 + y²/s²)^(-ν_t) onto the unit-variance family: ν = 2ν_t - 1 and
/// the factor √(2ν_t - 3)/s that takes a draw of the scaled law to unit variance.
inline NormalizedLaw scaled_to_normalized(const ScaledTailLaw& law) {
  if (!(law.scale > 0.0) || !std::isfinite(law.scale)) {
    throw Error(Errc::invalid_argument, "scale must be positive and finite");
  }
  if (!(law.tail_exponent > 1.5)) {
    throw Error(Errc::infinite_variance, "tail exponent must exceed 3/2 for a finite variance");
  }
  return {TailModel::student_t(2.0 * law.tail_exponent - 1.0), std::sqrt(2.0 * law.tail_exponent - 3.0) / law.scale};
}

/// Exact form of ν ≈ 2Λ: ν = 2Λ - 1 (the tail exponent equals Λ).
inline double lagrange_to_nu(double lagrange) {
  if (!(lagrange > 1.5) || !std::isfinite(lagrange)) {
    throw Error(Errc::infinite_variance, "Lagrange multiplier must exceed 3/2 for a finite variance");
  }
  return 2.0 * lagrange - 1.0;
}

/// CDF and quantiles for one model. Student's t cumulative mass is tabulated
/// once on [0, 32] at spacing 1/4 and refined by quadrature between knots;
/// beyond the table the upper tail is integrated directly. Quantiles invert by
/// bisection to 1e-8 (absolute, in y).
class TailCdf {
 public:
  explicit TailCdf(TailModel model) : model_(model) {
    if (model_.kind() != TailModel::Kind::student_t) return;
    knots_.resize(kKnots + 1, 0.0);
    for (std::size_t k = 0; k < kKnots; ++k) {
      const double a = static_cast<double>(k) * kKnotStep;
      knots_[k + 1] = knots_[k] + segment(a, a + kKnotStep);
    }
  }

  const TailModel& model() const noexcept { return model_; }

  /// P(Y > y) for y >= 0.
  double upper_tail(double y) const {
    detail::require_finite(y);
    if (y < 0.0) return 1.0 - upper_tail(-y);
    switch (model_.kind()) {
      case TailModel::Kind::gaussian:
        return 0.5 * std::erfc(y / std::numbers::sqrt2);
      case TailModel::Kind::cauchy:
        return y == 0.0 ? 0.5 : std::atan(1.0 / y) / std::numbers::pi;
      case TailModel::Kind::student_t:
        break;
    }
    const double table_end = kKnotStep * static_cast<double>(kKnots);
    if (y >= table_end) {
      const TailModel m = model_;
      return quad::integrate_tail([m](double t) { return pdf(m, t); }, y, {1e-16, 1e-12, 40}).value;
    }
    const auto k = static_cast<std::size_t>(y / kKnotStep);
    const double below = knots_[k] + segment(static_cast<double>(k) * kKnotStep, y);
    return 0.5 - below;
  }

  double cdf(double y) const { return y >= 0.0 ? 1.0 - upper_tail(y) : upper_tail(-y); }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::invalid_argument, "quantile level must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -quantile(1.0 - p);
    const double tail = 1.0 - p;
    double lo = 0.0;
    double hi = 1.0;
    while (upper_tail(hi) > tail) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) break;
    }
    while (hi - lo > 1e-8 * std::max(1.0, 1e-7 * hi)) {
      const double mid = 0.5 * (lo + hi);
      if (upper_tail(mid) > tail) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

 private:
  static constexpr std::size_t kKnots = 128;
  static constexpr double kKnotStep = 0.25;

  double segment(double a, double b) const {
    const TailModel m = model_;
    return quad::integrate([m](double t) { return pdf(m, t); }, a, b, {1e-17, 1e-14, 30}).value;
  }

  TailModel model_;
  std::vector<double> knots_;
};

inline double cdf(const TailModel& model, double y) { return TailCdf(model).cdf(y); }
inline double quantile(const TailModel& model, double p) { return TailCdf(model).quantile(p); }

}  // namespace semsym
