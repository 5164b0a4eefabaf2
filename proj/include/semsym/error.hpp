#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semsym {

enum class Errc {
  invalid_argument,
  invalid_nu,
  non_finite_input,
  infinite_variance,
  degenerate_input,
  degenerate_dimension,
  insufficient_samples,
  missing_dim,
  negative_radius,
  all_zero_batch,
  dimension_mismatch,
  infeasible_constraint,
  grid_truncation,
  quadrature_nonconvergence,
  divergence,
  parse_error,
  config_error,
  io_error,
};

inline std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_nu: return "invalid-nu";
    case Errc::non_finite_input: return "non-finite-input";
    case Errc::infinite_variance: return "infinite-variance";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::degenerate_dimension: return "degenerate-dimension";
    case Errc::insufficient_samples: return "insufficient-samples";
    case Errc::missing_dim: return "missing-dim";
    case Errc::negative_radius: return "negative-radius";
    case Errc::all_zero_batch: return "all-zero-batch";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::infeasible_constraint: return "infeasible-constraint";
    case Errc::grid_truncation: return "grid-truncation";
    case Errc::quadrature_nonconvergence: return "quadrature-nonconvergence";
    case Errc::divergence: return "divergence";
    case Errc::parse_error: return "parse-error";
    case Errc::config_error: return "config-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace semsym
