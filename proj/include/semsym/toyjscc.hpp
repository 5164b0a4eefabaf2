#pragma once

// Desk-scale joint source-channel codec.
//
//   x ──enc──▶ y ──power_normalize──▶ ỹ ──AWGN──▶ ŷ ──dec──▶ x̂
//
// Encoder and decoder are each affine → tanh → affine. The loss is
//   mse + λ · KL(q(ỹ) ‖ N(0, 1)),
// with mse the batch mean of per-sample squared error sums and q the Gaussian
// KDE of the current symbol batch. Gradients are derived by hand:
//   * power normalization is differentiated as a batch-dependent scaling,
//   * the channel noise is an additive constant within a step,
//   * the KDE bandwidth is a stop-gradient constant within a step.
//
// Matrices hold one sample per column (D × B sources, K × B symbols).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semsym/batch.hpp"
#include "semsym/channel.hpp"
#include "semsym/dist.hpp"
#include "semsym/error.hpp"
#include "semsym/estimate.hpp"
#include "semsym/parallel.hpp"
#include "semsym/random.hpp"

namespace semsym::jscc {

using Matrix = Eigen::MatrixXd;

enum class SourceRegime { uniform_entropy, variable_entropy };

inline std::string to_string(SourceRegime r) {
  return r == SourceRegime::uniform_entropy ? "uniform_entropy" : "variable_entropy";
}

/// Synthetic source. uniform_entropy: x ~ N(0, I_D). variable_entropy: a scale
/// g drawn equiprobably from {g_lo, g_hi} per sample, then x ~ g · N(0, I_D).
struct SourceSpec {
  std::size_t dim = 16;
  SourceRegime regime = SourceRegime::uniform_entropy;
  double g_lo = 0.25;
  double g_hi = 4.0;

  void validate() const {
    if (dim == 0) throw Error(Errc::config_error, "source.dim must be >= 1");
    if (regime == SourceRegime::variable_entropy && !(g_lo > 0.0 && g_lo <= g_hi)) {
      throw Error(Errc::config_error, "source scales need 0 < g_lo <= g_hi");
    }
  }
};

struct CodecConfig {
  std::size_t input_dim = 16;  // D
  std::size_t symbols = 8;     // K (real symbols per sample)
  std::size_t hidden = 64;
  double snr_db = 10.0;
  double lambda = 0.0;
  KdeMode kde_mode = KdeMode::identical;
  double learning_rate = 1e-4;
  std::size_t batch = 64;
  std::size_t epochs = 200;
  std::size_t steps_per_epoch = 32;
  std::uint64_t seed = 1;
  std::size_t eval_batch = 512;  // fixed held-out batch for mse / kl metrics
  std::size_t fit_batch = 256;   // fresh batch per epoch for the ν fit

  void validate() const {
    if (input_dim == 0 || symbols == 0 || hidden == 0) throw Error(Errc::config_error, "dimensions must be >= 1");
    if (!(symbols < input_dim)) throw Error(Errc::config_error, "symbols must be < input_dim (compressive codec)");
    if (!(lambda >= 0.0)) throw Error(Errc::config_error, "lambda must be >= 0");
    if (batch < 8) throw Error(Errc::config_error, "batch must be >= 8 for KDE stability");
    if (!(learning_rate > 0.0)) throw Error(Errc::config_error, "learning_rate must be > 0");
    if (epochs == 0 || steps_per_epoch == 0) throw Error(Errc::config_error, "epochs and steps_per_epoch must be >= 1");
    if (eval_batch < 8 || fit_batch < 8) throw Error(Errc::config_error, "evaluation batches must be >= 8");
  }

  ChannelConfig channel() const { return {snr_db}; }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double mse = 0.0;
  double kl = 0.0;      // nats
  double nu_hat = 0.0;
  double nll = 0.0;     // nats per scalar symbol
};

/// Offsets of each tensor in the flat parameter vector.
struct Layout {
  std::size_t d, k, h;
  std::size_t w1, b1, w2, b2, v1, c1, v2, c2, total;

  Layout(std::size_t d_, std::size_t k_, std::size_t h_) : d(d_), k(k_), h(h_) {
    w1 = 0;
    b1 = w1 + h * d;
    w2 = b1 + h;
    b2 = w2 + k * h;
    v1 = b2 + k;
    c1 = v1 + h * k;
    v2 = c1 + h;
    c2 = v2 + d * h;
    total = c2 + d;
  }
  explicit Layout(const CodecConfig& c) : Layout(c.input_dim, c.symbols, c.hidden) {}
};

struct TrainState {
  CodecConfig config;
  std::vector<double> params;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::vector<EpochMetrics> history;
  bool diverged = false;
  std::size_t diverged_epoch = 0;
};

namespace detail {

struct ConstView {
  Eigen::Map<const Matrix> w1, w2, v1, v2;
  Eigen::Map<const Eigen::VectorXd> b1, b2, c1, c2;

  ConstView(const std::vector<double>& p, const Layout& l)
      : w1(p.data() + l.w1, l.h, l.d), w2(p.data() + l.w2, l.k, l.h), v1(p.data() + l.v1, l.h, l.k),
        v2(p.data() + l.v2, l.d, l.h), b1(p.data() + l.b1, l.h), b2(p.data() + l.b2, l.k),
        c1(p.data() + l.c1, l.h), c2(p.data() + l.c2, l.d) {}
};

struct MutView {
  Eigen::Map<Matrix> w1, w2, v1, v2;
  Eigen::Map<Eigen::VectorXd> b1, b2, c1, c2;

  MutView(std::vector<double>& p, const Layout& l)
      : w1(p.data() + l.w1, l.h, l.d), w2(p.data() + l.w2, l.k, l.h), v1(p.data() + l.v1, l.h, l.k),
        v2(p.data() + l.v2, l.d, l.h), b1(p.data() + l.b1, l.h), b2(p.data() + l.b2, l.k),
        c1(p.data() + l.c1, l.h), c2(p.data() + l.c2, l.d) {}
};

}  // namespace detail

/// Symmetric uniform fan-in initialization U(-1/√fan_in, 1/√fan_in) for every
/// weight and bias.
inline TrainState init_state(const CodecConfig& cfg) {
  cfg.validate();
  const Layout l(cfg);
  TrainState s;
  s.config = cfg;
  s.params.assign(l.total, 0.0);
  s.adam_m.assign(l.total, 0.0);
  s.adam_v.assign(l.total, 0.0);
  Rng rng = make_rng(cfg.seed, stream::init);
  auto fill = [&](std::size_t from, std::size_t to, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = from; i < to; ++i) s.params[i] = u(rng);
  };
  fill(l.w1, l.w2, l.d);   // w1, b1
  fill(l.w2, l.v1, l.h);   // w2, b2
  fill(l.v1, l.v2, l.k);   // v1, c1
  fill(l.v2, l.total, l.h);  // v2, c2
  return s;
}

inline Matrix draw_source(const SourceSpec& src, std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Matrix x(static_cast<Eigen::Index>(src.dim), static_cast<Eigen::Index>(n));
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    // The coin is drawn in both regimes so that g_lo = g_hi = 1 reproduces the
    // uniform source draw for draw.
    const bool hi = coin(rng);
    const double g = src.regime == SourceRegime::variable_entropy ? (hi ? src.g_hi : src.g_lo) : 1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, b) = g * normal(rng);
  }
  return x;
}

inline Matrix draw_noise(std::size_t k, std::size_t n, double noise_variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance));
  Matrix m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = normal(rng);
  return m;
}

/// Pre-normalization encoder output y = W2 tanh(W1 x + b1) + b2.
inline Matrix encode_raw(const TrainState& s, const Matrix& x) {
  const Layout l(s.config);
  if (static_cast<std::size_t>(x.rows()) != l.d) {
    throw Error(Errc::dimension_mismatch, "source batch has " + std::to_string(x.rows()) + " rows, codec expects " +
                                              std::to_string(l.d));
  }
  const detail::ConstView p(s.params, l);
  const Matrix hid = ((p.w1 * x).colwise() + p.b1).array().tanh().matrix();
  return (p.w2 * hid).colwise() + p.b2;
}

/// Power-normalized symbols: (1/(B·K)) Σ ỹ² = 1 for the batch.
inline Matrix encode(const TrainState& s, const Matrix& x) {
  const Matrix y = encode_raw(s, x);
  const double power = y.squaredNorm() / static_cast<double>(y.size());
  if (!(power > 0.0)) throw Error(Errc::all_zero_batch, "encoder produced an all-zero symbol batch");
  return y / std::sqrt(power);
}

inline Matrix decode(const TrainState& s, const Matrix& received) {
  const Layout l(s.config);
  const detail::ConstView p(s.params, l);
  const Matrix hid = ((p.v1 * received).colwise() + p.c1).array().tanh().matrix();
  return (p.v2 * hid).colwise() + p.c2;
}

/// Symbols as a B × K batch (row per sample).
inline SymbolBatch to_symbol_batch(const Matrix& symbols, std::string meta = {}) {
  std::vector<double> v(symbols.data(), symbols.data() + symbols.size());
  return SymbolBatch(static_cast<std::size_t>(symbols.cols()), static_cast<std::size_t>(symbols.rows()), std::move(v),
                     std::move(meta));
}

struct ForwardResult {
  Matrix symbols;  // post-normalization, pre-noise
  Matrix reconstruction;
};

inline ForwardResult forward(const TrainState& s, const Matrix& x, const Matrix& noise) {
  ForwardResult r;
  r.symbols = encode(s, x);
  if (noise.rows() != r.symbols.rows() || noise.cols() != r.symbols.cols()) {
    throw Error(Errc::dimension_mismatch, "noise shape does not match the symbol batch");
  }
  r.reconstruction = decode(s, r.symbols + noise);
  return r;
}

inline ForwardResult forward(const TrainState& s, const Matrix& x, std::uint64_t noise_seed) {
  Rng rng = make_rng(noise_seed, stream::channel);
  const Matrix noise = draw_noise(s.config.symbols, static_cast<std::size_t>(x.cols()),
                                  s.config.channel().noise_variance(), rng);
  return forward(s, x, noise);
}

struct LossTerms {
  double total = 0.0;
  double mse = 0.0;
  double kl = 0.0;
};

/// KL quadrature grid for the regularizer: [-10, 10], 2001 nodes.
inline KlGrid regularizer_grid() { return {10.0, 2001, false}; }

namespace detail {

inline KdeEstimate symbol_kde(const Matrix& symbols, KdeMode mode, const std::optional<std::vector<double>>& bandwidths) {
  KdeEstimate est = kde_build(to_symbol_batch(symbols), mode);
  if (bandwidths) {
    if (bandwidths->size() != est.bandwidths.size()) {
      throw Error(Errc::dimension_mismatch, "frozen bandwidth count does not match the KDE mode");
    }
    est.bandwidths = *bandwidths;
  }
  return est;
}

struct Evaluation {
  LossTerms terms;
  std::vector<double> bandwidths;
  std::vector<double> gradient;  // empty unless requested
};

inline Evaluation evaluate(const TrainState& s, const Matrix& x, const Matrix& noise, double lambda, KdeMode mode,
                           bool want_gradient, const std::optional<std::vector<double>>& frozen_bandwidths) {
  const Layout l(s.config);
  const ConstView p(s.params, l);
  const auto batch = static_cast<double>(x.cols());

  const Matrix a1 = (p.w1 * x).colwise() + p.b1;
  const Matrix h1 = a1.array().tanh().matrix();
  const Matrix y = (p.w2 * h1).colwise() + p.b2;
  const double power = y.squaredNorm() / static_cast<double>(y.size());
  if (!(power > 0.0)) throw Error(Errc::all_zero_batch, "encoder produced an all-zero symbol batch");
  const double scale = std::sqrt(power);
  const Matrix sym = y / scale;
  const Matrix received = sym + noise;
  const Matrix a2 = (p.v1 * received).colwise() + p.c1;
  const Matrix h2 = a2.array().tanh().matrix();
  const Matrix xhat = (p.v2 * h2).colwise() + p.c2;
  const Matrix err = xhat - x;

  Evaluation ev;
  ev.terms.mse = err.squaredNorm() / batch;

  KlResult kl;
  const bool need_kl = lambda > 0.0 || !want_gradient;
  if (need_kl) {
    const KdeEstimate est = symbol_kde(sym, mode, frozen_bandwidths);
    ev.bandwidths = est.bandwidths;
    kl = kde_kl(est, TailModel::gaussian(), regularizer_grid(), want_gradient && lambda > 0.0);
    ev.terms.kl = kl.total_nats;
  }
  ev.terms.total = ev.terms.mse + lambda * ev.terms.kl;
  if (!want_gradient) return ev;

  ev.gradient.assign(l.total, 0.0);
  MutView g(ev.gradient, l);

  const Matrix d_xhat = (2.0 / batch) * err;
  g.v2 = d_xhat * h2.transpose();
  g.c2 = d_xhat.rowwise().sum();
  const Matrix d_a2 = ((p.v2.transpose() * d_xhat).array() * (1.0 - h2.array().square())).matrix();
  g.v1 = d_a2 * received.transpose();
  g.c1 = d_a2.rowwise().sum();
  Matrix d_sym = p.v1.transpose() * d_a2;  // noise passes gradients through unchanged

  if (lambda > 0.0) {
    if (mode == KdeMode::identical) {
      const auto& cg = kl.center_gradient.front();
      for (Eigen::Index j = 0; j < d_sym.size(); ++j) d_sym.data()[j] += lambda * cg[static_cast<std::size_t>(j)];
    } else {
      for (Eigen::Index k = 0; k < d_sym.rows(); ++k) {
        const auto& cg = kl.center_gradient[static_cast<std::size_t>(k)];
        for (Eigen::Index b = 0; b < d_sym.cols(); ++b) d_sym(k, b) += lambda * cg[static_cast<std::size_t>(b)];
      }
    }
  }

  // ỹ = y / s with s² = Σy²/(B·K):  ∂L/∂y = ∂L/∂ỹ / s - y · ⟨∂L/∂ỹ, y⟩ / (s³ B K).
  const double inner = (d_sym.array() * y.array()).sum();
  const Matrix d_y = d_sym / scale - y * (inner / (scale * scale * scale * static_cast<double>(y.size())));
  g.w2 = d_y * h1.transpose();
  g.b2 = d_y.rowwise().sum();
  const Matrix d_a1 = ((p.w2.transpose() * d_y).array() * (1.0 - h1.array().square())).matrix();
  g.w1 = d_a1 * x.transpose();
  g.b1 = d_a1.rowwise().sum();
  return ev;
}

}  // namespace detail

/// Loss terms for a batch and a fixed noise realization.
inline LossTerms loss(const TrainState& s, const Matrix& x, const Matrix& noise) {
  return detail::evaluate(s, x, noise, s.config.lambda, s.config.kde_mode, false, std::nullopt).terms;
}

inline LossTerms loss(const TrainState& s, const Matrix& x, std::uint64_t noise_seed) {
  Rng rng = make_rng(noise_seed, stream::channel);
  const Matrix noise = draw_noise(s.config.symbols, static_cast<std::size_t>(x.cols()),
                                  s.config.channel().noise_variance(), rng);
  return loss(s, x, noise);
}

/// Analytic gradient of the total loss with respect to the flat parameters.
inline std::vector<double> loss_gradient(const TrainState& s, const Matrix& x, const Matrix& noise) {
  return detail::evaluate(s, x, noise, s.config.lambda, s.config.kde_mode, true, std::nullopt).gradient;
}

/// Maximum relative error between the analytic gradient and central finite
/// differences (step 1e-5) over every parameter. The noise realization and
/// the KDE bandwidth are frozen at their values for the unperturbed state, so
/// both sides differentiate the same function. Relative error uses
/// max(|analytic|, |numeric|, 1e-6) as denominator.
inline double gradient_check(const TrainState& s, const Matrix& x, std::uint64_t noise_seed) {
  const CodecConfig& cfg = s.config;
  Rng rng = make_rng(noise_seed, stream::channel);
  const Matrix noise = draw_noise(cfg.symbols, static_cast<std::size_t>(x.cols()), cfg.channel().noise_variance(), rng);
  const detail::Evaluation base = detail::evaluate(s, x, noise, cfg.lambda, cfg.kde_mode, true, std::nullopt);
  const std::optional<std::vector<double>> frozen =
      base.bandwidths.empty() ? std::nullopt : std::optional<std::vector<double>>(base.bandwidths);

  constexpr double step = 1e-5;
  TrainState probe = s;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.params.size(); ++i) {
    const double keep = probe.params[i];
    probe.params[i] = keep + step;
    const double up = detail::evaluate(probe, x, noise, cfg.lambda, cfg.kde_mode, false, frozen).terms.total;
    probe.params[i] = keep - step;
    const double down = detail::evaluate(probe, x, noise, cfg.lambda, cfg.kde_mode, false, frozen).terms.total;
    probe.params[i] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = base.gradient[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

/// One Adam update (β1 = 0.9, β2 = 0.999, ε = 1e-8) on a fresh batch.
inline LossTerms train_step(TrainState& s, const Matrix& x, const Matrix& noise) {
  const CodecConfig& cfg = s.config;
  const detail::Evaluation ev = detail::evaluate(s, x, noise, cfg.lambda, cfg.kde_mode, true, std::nullopt);
  if (!std::isfinite(ev.terms.total)) return ev.terms;
  for (double v : ev.gradient) {
    if (!std::isfinite(v)) return {std::numeric_limits<double>::quiet_NaN(), ev.terms.mse, ev.terms.kl};
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++s.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    const double g = ev.gradient[i];
    s.adam_m[i] = beta1 * s.adam_m[i] + (1.0 - beta1) * g;
    s.adam_v[i] = beta2 * s.adam_v[i] + (1.0 - beta2) * g * g;
    s.params[i] -= cfg.learning_rate * (s.adam_m[i] / c1) / (std::sqrt(s.adam_v[i] / c2) + eps);
  }
  return ev.terms;
}

/// Power-normalized symbols for n fresh source draws, as an n × K batch.
inline SymbolBatch symbol_dump(const TrainState& s, const SourceSpec& src, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, stream::eval);
  const Matrix x = draw_source(src, n, rng);
  return to_symbol_batch(encode(s, x), "toyjscc:" + to_string(src.regime));
}

namespace detail {

/// Held-out evaluation data, fixed for the whole run.
struct EvalSet {
  Matrix x;
  Matrix noise;
};

inline EvalSet make_eval_set(const CodecConfig& cfg, const SourceSpec& src) {
  Rng rng = make_rng(cfg.seed, stream::eval);
  EvalSet e;
  e.x = draw_source(src, cfg.eval_batch, rng);
  e.noise = draw_noise(cfg.symbols, cfg.eval_batch, cfg.channel().noise_variance(), rng);
  return e;
}

inline EpochMetrics epoch_metrics(const TrainState& s, const SourceSpec& src, const EvalSet& eval, Rng& fit_rng) {
  EpochMetrics m;
  m.epoch = s.epoch;
  const LossTerms t = evaluate(s, eval.x, eval.noise, 0.0, s.config.kde_mode, false, std::nullopt).terms;
  m.mse = t.mse;
  m.kl = t.kl;
  const Matrix fresh = draw_source(src, s.config.fit_batch, fit_rng);
  const FitReport fit = fit_nu(to_symbol_batch(encode(s, fresh)));
  m.nu_hat = fit.nu_hat;
  m.nll = fit.nll;
  return m;
}

}  // namespace detail

/// Minibatch Adam on the total loss. Per-epoch metrics: mse and kl on a fixed
/// held-out batch with a fixed noise draw, ν̂ / nll from fit_nu on a fresh
/// batch of fit_batch samples. A non-finite loss stops training and marks the
/// state diverged; the history up to that epoch is kept.
inline TrainState train(const CodecConfig& cfg, const SourceSpec& src) {
  cfg.validate();
  src.validate();
  if (src.dim != cfg.input_dim) throw Error(Errc::config_error, "source.dim must equal codec input_dim");
  TrainState s = init_state(cfg);
  const detail::EvalSet eval = detail::make_eval_set(cfg, src);
  Rng data_rng = make_rng(cfg.seed, stream::source);
  Rng noise_rng = make_rng(cfg.seed, stream::channel);
  Rng fit_rng = make_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL, stream::eval);
  const double noise_var = cfg.channel().noise_variance();

  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    for (std::size_t it = 0; it < cfg.steps_per_epoch; ++it) {
      const Matrix x = draw_source(src, cfg.batch, data_rng);
      const Matrix noise = draw_noise(cfg.symbols, cfg.batch, noise_var, noise_rng);
      const LossTerms t = train_step(s, x, noise);
      if (!std::isfinite(t.total)) {
        s.diverged = true;
        s.diverged_epoch = e;
        return s;
      }
    }
    s.epoch = e;
    s.history.push_back(detail::epoch_metrics(s, src, eval, fit_rng));
  }
  return s;
}

struct EntropyArmResult {
  std::uint64_t seed = 0;
  double nu_uniform = 0.0;
  double nu_variable = 0.0;
  bool uniform_hit_bound = false;
  bool variable_hit_bound = false;
  TrainState uniform;
  TrainState variable;
};

struct EntropyExperimentReport {
  double g_lo = 0.25;
  double g_hi = 4.0;
  std::vector<EntropyArmResult> runs;
  double fraction_variable_lower = 0.0;
  std::size_t dump_samples = 0;
};

inline constexpr std::size_t kExperimentDumpSamples = 4096;

inline std::uint64_t experiment_dump_seed(std::uint64_t seed) { return seed + 1000003; }

/// Matched pairs per seed (λ = 0): a uniform-entropy source (g = 1) against a
/// two-point scale mixture {g_lo, g_hi}. ν is fitted on the final encoder's
/// symbols for kExperimentDumpSamples fresh inputs.
inline EntropyExperimentReport entropy_variability_experiment(CodecConfig base, const std::vector<std::uint64_t>& seeds,
                                                              double g_lo = 0.25, double g_hi = 4.0,
                                                              std::size_t threads = default_threads()) {
  if (seeds.size() < 5) throw Error(Errc::config_error, "entropy experiment needs at least 5 seeds");
  base.lambda = 0.0;
  EntropyExperimentReport rep;
  rep.g_lo = g_lo;
  rep.g_hi = g_hi;
  rep.dump_samples = kExperimentDumpSamples;
  rep.runs.resize(seeds.size());
  std::vector<double> nu(2 * seeds.size());
  std::vector<char> hit(2 * seeds.size());
  std::vector<TrainState> states(2 * seeds.size());
  parallel_for(
      2 * seeds.size(),
      [&](std::size_t job) {
        CodecConfig cfg = base;
        cfg.seed = seeds[job / 2];
        SourceSpec src{cfg.input_dim, SourceRegime::uniform_entropy, 1.0, 1.0};
        if (job % 2 == 1) src = {cfg.input_dim, SourceRegime::variable_entropy, g_lo, g_hi};
        TrainState s = train(cfg, src);
        if (s.diverged) throw Error(Errc::divergence, "training diverged at epoch " + std::to_string(s.diverged_epoch));
        const FitReport fit = fit_nu(symbol_dump(s, src, kExperimentDumpSamples, experiment_dump_seed(cfg.seed)));
        nu[job] = fit.nu_hat;
        hit[job] = fit.hit_upper_bound;
        states[job] = std::move(s);
      },
      threads);
  std::size_t lower = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    rep.runs[i] = {seeds[i], nu[2 * i], nu[2 * i + 1], hit[2 * i] != 0, hit[2 * i + 1] != 0,
                   std::move(states[2 * i]), std::move(states[2 * i + 1])};
    if (nu[2 * i + 1] < nu[2 * i]) ++lower;
  }
  rep.fraction_variable_lower = static_cast<double>(lower) / static_cast<double>(seeds.size());
  return rep;
}

/// One training run per (seed, λ) pair, all other settings shared. Results are
/// ordered seed-major: runs[i * lambdas.size() + j].
inline std::vector<TrainState> lambda_sweep(const CodecConfig& base, const SourceSpec& src,
                                            const std::vector<std::uint64_t>& seeds,
                                            const std::vector<double>& lambdas,
                                            std::size_t threads = default_threads()) {
  if (seeds.empty() || lambdas.empty()) throw Error(Errc::config_error, "lambda sweep needs seeds and lambdas");
  std::vector<TrainState> runs(seeds.size() * lambdas.size());
  parallel_for(
      runs.size(),
      [&](std::size_t job) {
        CodecConfig cfg = base;
        cfg.seed = seeds[job / lambdas.size()];
        cfg.lambda = lambdas[job % lambdas.size()];
        runs[job] = train(cfg, src);
      },
      threads);
  return runs;
}

struct AccelerationPair {
  std::uint64_t seed = 0;
  double mse_plain = 0.0;
  double mse_regularized = 0.0;
};

struct AccelerationReport {
  double lambda = 0.0;
  std::size_t half_epoch = 0;
  std::vector<AccelerationPair> pairs;
  std::size_t regularized_not_worse = 0;
};

/// Held-out mse at the half-way epoch, λ against λ = 0 on matched seeds.
inline AccelerationReport acceleration_experiment(const CodecConfig& base, const SourceSpec& src,
                                                  const std::vector<std::uint64_t>& seeds, double lambda,
                                                  std::size_t threads = default_threads()) {
  if (!(lambda > 0.0)) throw Error(Errc::config_error, "acceleration experiment needs lambda > 0");
  if (base.epochs < 2) throw Error(Errc::config_error, "acceleration experiment needs at least 2 epochs");
  const std::vector<TrainState> runs = lambda_sweep(base, src, seeds, {0.0, lambda}, threads);
  AccelerationReport rep;
  rep.lambda = lambda;
  rep.half_epoch = base.epochs / 2;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const TrainState& plain = runs[2 * i];
    const TrainState& reg = runs[2 * i + 1];
    for (const TrainState* s : {&plain, &reg}) {
      if (s->diverged) throw Error(Errc::divergence, "training diverged at epoch " + std::to_string(s->diverged_epoch));
    }
    AccelerationPair p{seeds[i], plain.history[rep.half_epoch - 1].mse, reg.history[rep.half_epoch - 1].mse};
    if (p.mse_regularized <= p.mse_plain) ++rep.regularized_not_worse;
    rep.pairs.push_back(p);
  }
  return rep;
}

}  // namespace semsym::jscc
