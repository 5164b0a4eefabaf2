#pragma once

// Physical-layer utilities: batch power normalization, the AWGN channel,
// capacity, channel bandwidth ratio and Monte Carlo mutual information.
// All symbol math is per real dimension; noise variance is derived from the
// SNR under the unit average power enforced by power_normalize.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/dist.hpp"
#include "semsym/error.hpp"
#include "semsym/estimate.hpp"
#include "semsym/random.hpp"

namespace semsym {

struct ChannelConfig {
  double snr_db = 10.0;

  double noise_variance() const { return std::pow(10.0, -snr_db / 10.0); }
};

/// Channel bandwidth ratio inputs: S complex symbols for an H × W × C source.
struct CbrSpec {
  std::size_t symbols = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;
};

inline double cbr(const CbrSpec& s) {
  if (s.symbols == 0 || s.height == 0 || s.width == 0 || s.channels == 0) {
    throw Error(Errc::invalid_argument, "CBR counts must all be >= 1");
  }
  return static_cast<double>(s.symbols) /
         (static_cast<double>(s.height) * static_cast<double>(s.width) * static_cast<double>(s.channels));
}

/// Divides the whole batch by √(mean squared entry) so that
/// (1/(B·M)) Σ y² = 1, i.e. the batch-mean squared norm equals M.
inline SymbolBatch power_normalize(const SymbolBatch& batch) {
  double ss = 0.0;
  for (double v : batch.values()) ss += v * v;
  if (!(ss > 0.0)) throw Error(Errc::all_zero_batch, "cannot power-normalize an all-zero batch");
  const double scale = 1.0 / std::sqrt(ss / static_cast<double>(batch.size()));
  std::vector<double> out(batch.values().begin(), batch.values().end());
  for (auto& v : out) v *= scale;
  return SymbolBatch(batch.rows(), batch.cols(), std::move(out), batch.meta());
}

inline SymbolBatch awgn(const SymbolBatch& batch, const ChannelConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, stream::channel);
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_variance()));
  std::vector<double> out(batch.values().begin(), batch.values().end());
  for (auto& v : out) v += noise(rng);
  return SymbolBatch(batch.rows(), batch.cols(), std::move(out), batch.meta());
}

/// ½ log2(1 + 1/σ²) bits per real dimension.
inline double awgn_capacity(const ChannelConfig& cfg) { return 0.5 * std::log2(1.0 + 1.0 / cfg.noise_variance()); }

struct MiEstimate {
  double bits = 0.0;
  double stderr_bits = 0.0;  // bootstrap standard error
  double output_entropy_nats = 0.0;
  double noise_entropy_nats = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kBootstrapResamples = 20;

namespace detail {

inline std::vector<double> channel_outputs(const TailModel& model, const ChannelConfig& cfg, std::size_t n,
                                           std::uint64_t seed) {
  const SymbolBatch x = sample(model, n, seed);
  const SymbolBatch y = awgn(x, cfg, seed);
  return {y.values().begin(), y.values().end()};
}

/// Bootstrap means of the per-sample terms (the KDE is held fixed). Both term
/// vectors are resampled with the same indices so paired differences share
/// the resampling noise.
inline std::vector<std::vector<double>> bootstrap_means(const std::vector<const std::vector<double>*>& terms,
                                                        std::uint64_t seed) {
  const std::size_t n = terms.front()->size();
  Rng rng = make_rng(seed, stream::bootstrap);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::vector<double>> means(terms.size(), std::vector<double>(kBootstrapResamples, 0.0));
  for (std::size_t r = 0; r < kBootstrapResamples; ++r) {
    std::vector<double> acc(terms.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = pick(rng);
      for (std::size_t t = 0; t < terms.size(); ++t) acc[t] += (*terms[t])[k];
    }
    for (std::size_t t = 0; t < terms.size(); ++t) means[t][r] = acc[t] / static_cast<double>(n);
  }
  return means;
}

inline double sample_sd(const std::vector<double>& v) {
  const Moments m = moments(v);
  return std::sqrt(m.variance * static_cast<double>(v.size()) / static_cast<double>(v.size() - 1));
}

inline void require_mi_samples(std::size_t n) {
  if (n < 10'000) throw Error(Errc::invalid_argument, "mutual information needs at least 1e4 samples");
}

}  // namespace detail

/// I(Y; Ŷ) = h(Ŷ) - h(N): h(N) = ½ ln(2πeσ²) analytically, h(Ŷ) by KDE
/// resubstitution on n channel outputs, with a 20-resample bootstrap error.
inline MiEstimate mutual_information(const TailModel& model, const ChannelConfig& cfg, std::size_t n,
                                     std::uint64_t seed) {
  detail::require_mi_samples(n);
  const std::vector<double> out = detail::channel_outputs(model, cfg, n, seed);
  const ResubstitutionEntropy h = kde_resubstitution_entropy(out);
  MiEstimate est;
  est.samples = n;
  est.output_entropy_nats = h.entropy_nats;
  est.noise_entropy_nats = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * cfg.noise_variance());
  est.bits = (est.output_entropy_nats - est.noise_entropy_nats) / std::numbers::ln2;
  const auto boot = detail::bootstrap_means({&h.neg_log_density}, seed);
  est.stderr_bits = detail::sample_sd(boot[0]) / std::numbers::ln2;
  return est;
}

struct MiComparison {
  MiEstimate first;
  MiEstimate second;
  double difference_bits = 0.0;  // first - second
  double difference_stderr_bits = 0.0;
};

/// Paired comparison of two input laws under one seed: both inputs share their
/// normal draws and the channel noise, and the bootstrap resamples both with
/// the same indices.
inline MiComparison compare_mutual_information(const TailModel& first, const TailModel& second,
                                               const ChannelConfig& cfg, std::size_t n, std::uint64_t seed) {
  detail::require_mi_samples(n);
  const std::vector<double> out_a = detail::channel_outputs(first, cfg, n, seed);
  const std::vector<double> out_b = detail::channel_outputs(second, cfg, n, seed);
  const ResubstitutionEntropy ha = kde_resubstitution_entropy(out_a);
  const ResubstitutionEntropy hb = kde_resubstitution_entropy(out_b);
  const double h_noise = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * cfg.noise_variance());
  const auto boot = detail::bootstrap_means({&ha.neg_log_density, &hb.neg_log_density}, seed);

  MiComparison c;
  auto fill = [&](MiEstimate& e, const ResubstitutionEntropy& h, const std::vector<double>& b) {
    e.samples = n;
    e.output_entropy_nats = h.entropy_nats;
    e.noise_entropy_nats = h_noise;
    e.bits = (h.entropy_nats - h_noise) / std::numbers::ln2;
    e.stderr_bits = detail::sample_sd(b) / std::numbers::ln2;
  };
  fill(c.first, ha, boot[0]);
  fill(c.second, hb, boot[1]);
  std::vector<double> diff(kBootstrapResamples);
  for (std::size_t r = 0; r < kBootstrapResamples; ++r) diff[r] = boot[0][r] - boot[1][r];
  c.difference_bits = c.first.bits - c.second.bits;
  c.difference_stderr_bits = detail::sample_sd(diff) / std::numbers::ln2;
  return c;
}

}  // namespace semsym
