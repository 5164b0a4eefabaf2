#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semsym/error.hpp"

namespace semsym {

/// B samples × M real symbol dimensions, stored row-major (one row per sample).
class SymbolBatch {
 public:
  SymbolBatch(std::size_t rows, std::size_t cols, std::vector<double> values, std::string meta = {})
      : rows_(rows), cols_(cols), values_(std::move(values)), meta_(std::move(meta)) {
    if (rows_ == 0 || cols_ == 0) {
      throw Error(Errc::invalid_argument, "symbol batch needs B >= 1 and M >= 1");
    }
    if (values_.size() != rows_ * cols_) {
      throw Error(Errc::dimension_mismatch, "symbol batch storage does not match B x M");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(Errc::non_finite_input, "symbol batch entries must be finite");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = values_[r * cols_ + c];
    return out;
  }

  const std::string& meta() const noexcept { return meta_; }
  void set_meta(std::string meta) { meta_ = std::move(meta); }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::string meta_;
};

}  // namespace semsym
