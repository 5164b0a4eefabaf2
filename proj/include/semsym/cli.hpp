#pragma once

// Command implementations behind the `semsym` tool. Each command is a pure
// function of its arguments (and seed) returning a JSON report; only
// `generated_at` varies between identical runs.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "semsym/channel.hpp"
#include "semsym/dist.hpp"
#include "semsym/error.hpp"
#include "semsym/estimate.hpp"
#include "semsym/io.hpp"
#include "semsym/maxent.hpp"
#include "semsym/toyjscc.hpp"

namespace semsym::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 2 input or configuration problem, 3 numeric failure.
inline int exit_code(Errc e) {
  switch (e) {
    case Errc::infeasible_constraint:
    case Errc::grid_truncation:
    case Errc::quadrature_nonconvergence:
    case Errc::divergence:
      return 3;
    default:
      return 2;
  }
}

inline json quantity(double value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }

inline json count(std::size_t n) { return json{{"value", n}, {"unit", "count"}}; }

inline json series(const std::vector<double>& values, const char* unit) {
  return json{{"values", values}, {"unit", unit}};
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json make_report(const std::string& command, json config, json seeds, json results) {
  json r;
  r["command"] = command;
  r["tool_version"] = kToolVersion;
  r["config"] = std::move(config);
  r["seeds"] = std::move(seeds);
  r["results"] = std::move(results);
  r["generated_at"] = utc_timestamp();
  return r;
}

/// Serialized report text; `path` empty or "-" means stdout.
inline void write_report(const json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os = io::open_output(path);
  os << text;
  if (!os) throw Error(Errc::io_error, "failed writing '" + path + "'");
}

// --- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string model = "gaussian";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string output;
};

inline json cmd_sample(const SampleArgs& a) {
  const TailModel model = TailModel::parse(a.model);
  if (a.output.empty()) throw Error(Errc::invalid_argument, "an output path is required");
  if (a.n == 0) {
    io::write_empty_symbols(a.output, 1);
  } else {
    io::write_symbols(a.output, sample(model, a.n, a.seed));
  }
  json cfg{{"model", model.to_string()}, {"n", a.n}, {"output", a.output}};
  json res{{"samples", count(a.n)}, {"dims", count(1)}};
  return make_report("sample", std::move(cfg), json::array({a.seed}), std::move(res));
}

// --- fit ------------------------------------------------------------------

struct FitArgs {
  std::string input;
  double nu_max = 200.0;
  std::string qq_output;  // empty: <input>.qq.csv
  std::size_t quantiles = 99;
};

inline json cmd_fit(const FitArgs& a) {
  const SymbolBatch batch = io::read_symbols(a.input);
  const FitReport fit = fit_nu(batch, a.nu_max);
  const auto [z, st] = standardize(batch);
  const TailModel fitted = TailModel::student_t(fit.nu_hat);
  const double nll_fit = nll(z, fitted);
  const double nll_gauss = nll(z, TailModel::gaussian());
  const double nll_cauchy = nll(z, TailModel::cauchy());

  const std::string qq_path = a.qq_output.empty() ? a.input + ".qq.csv" : a.qq_output;
  const std::size_t nq = std::min(a.quantiles, z.size());
  {
    std::ofstream os = io::open_output(qq_path);
    os << "level,empirical,model\n";
    for (const QqPoint& q : qq_data(z, fitted, nq)) {
      os << io::format_double(q.level) << ',' << io::format_double(q.empirical) << ',' << io::format_double(q.model)
         << '\n';
    }
    if (!os) throw Error(Errc::io_error, "failed writing '" + qq_path + "'");
  }

  std::string best = "fitted";
  double best_nll = nll_fit;
  if (nll_gauss < best_nll) best = "gaussian", best_nll = nll_gauss;
  if (nll_cauchy < best_nll) best = "cauchy";

  json res;
  res["nu_hat"] = quantity(fit.nu_hat, "dimensionless");
  res["hit_upper_bound"] = fit.hit_upper_bound;
  res["samples"] = count(fit.samples);
  res["dims"] = count(batch.cols());
  res["nll"] = {{"fitted", quantity(nll_fit, "nats")},
                {"gaussian", quantity(nll_gauss, "nats")},
                {"cauchy", quantity(nll_cauchy, "nats")}};
  res["lowest_nll"] = best;
  res["standardization"] = {{"means", series(st.means, "symbol")}, {"scales", series(st.scales, "symbol")}};
  res["qq_output"] = qq_path;
  res["warnings"] = fit.warnings;
  json cfg{{"input", a.input}, {"nu_max", a.nu_max}, {"quantiles", nq}};
  return make_report("fit", std::move(cfg), json::array(), std::move(res));
}

// --- kl -------------------------------------------------------------------

struct KlArgs {
  std::string input;
  std::string target = "gaussian";
  std::string mode = "identical";
};

inline json cmd_kl(const KlArgs& a) {
  const SymbolBatch batch = io::read_symbols(a.input);
  const TailModel target = TailModel::parse(a.target);
  const KdeMode mode = parse_kde_mode(a.mode);
  const KdeEstimate est = kde_build(batch, mode);
  const KlResult kl = kde_kl(est, target, KlGrid{10.0, 2001, true});

  json res;
  res["kl_total"] = quantity(kl.total_nats, "nats");
  res["kl_per_dim"] = quantity(kl.total_nats / static_cast<double>(batch.cols()), "nats");
  res["kl_per_component"] = series(kl.per_component, "nats");
  res["truncation_mass"] = quantity(kl.truncation_mass, "probability");
  res["bandwidths"] = series(est.bandwidths, "symbol");
  res["grid"] = {{"half_width", quantity(kl.half_width, "symbol")}, {"points", count(kl.points)}};
  res["samples"] = count(batch.rows());
  res["dims"] = count(batch.cols());
  json cfg{{"input", a.input}, {"target", target.to_string()}, {"mode", to_string(mode)}};
  return make_report("kl", std::move(cfg), json::array(), std::move(res));
}

// --- maxent ---------------------------------------------------------------

struct MaxentArgs {
  double alpha = 1.0;
  double noise_var = 1.0;
  double payload_bits = 1.0;
  double half_width = MaxEntOptions{}.half_width;
  std::size_t points = MaxEntOptions{}.points;
  bool allow_truncated = false;
  std::size_t perturbations = 20;
  std::uint64_t seed = 0;
  std::string density_output;  // empty: no sidecar
};

inline json cmd_maxent(const MaxentArgs& a) {
  const PayloadParams params{a.alpha, a.noise_var};
  MaxEntOptions opt;
  opt.half_width = a.half_width;
  opt.points = a.points;
  opt.allow_truncated = a.allow_truncated;
  const PropositionReport pr = verify_proposition1(params, a.payload_bits, a.perturbations, a.seed, opt);
  const MaxEntSolution& s = pr.solution;

  if (!a.density_output.empty()) {
    std::ofstream os = io::open_output(a.density_output);
    os << "y,density,mass\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      os << io::format_double(s.grid[i]) << ',' << io::format_double(s.mass[i] / s.step) << ','
         << io::format_double(s.mass[i]) << '\n';
    }
    if (!os) throw Error(Errc::io_error, "failed writing '" + a.density_output + "'");
  }

  json res;
  res["lagrange"] = quantity(s.lagrange, "dimensionless");
  if (s.lagrange > 1.5) {
    res["nu_equivalent"] = quantity(lagrange_to_nu(s.lagrange), "dimensionless");
  } else {
    res["nu_equivalent"] = nullptr;
  }
  res["payload"] = quantity(s.payload_bits, "bits");
  res["entropy"] = quantity(s.entropy_nats, "nats");
  res["variance"] = quantity(s.variance(), "symbol^2");
  res["tail_mass"] = quantity(s.tail_mass, "probability");
  res["truncated"] = s.truncated;
  res["stationarity_residual"] = quantity(stationarity_residual(params, s), "nats");
  res["verification"] = {{"perturbations", count(pr.perturbations)},
                         {"violations", count(pr.violations)},
                         {"max_violation", quantity(pr.max_violation, "nats")},
                         {"min_entropy_gap", quantity(pr.min_entropy_gap, "nats")},
                         {"max_payload_error", quantity(pr.max_payload_error, "bits")},
                         {"mixture_entropy_gap", quantity(pr.mixture_entropy_gap, "nats")}};
  if (!a.density_output.empty()) res["density_output"] = a.density_output;
  json cfg{{"alpha", a.alpha},           {"noise_var", a.noise_var},   {"payload_bits", a.payload_bits},
           {"half_width", a.half_width}, {"points", a.points},         {"allow_truncated", a.allow_truncated},
           {"perturbations", a.perturbations}};
  return make_report("maxent", std::move(cfg), json::array({a.seed}), std::move(res));
}

// --- mi -------------------------------------------------------------------

struct MiArgs {
  std::string model = "gaussian";
  std::vector<double> snr_db{0.0, 10.0, 20.0};
  std::size_t n = 100000;
  std::uint64_t seed = 0;
};

inline json cmd_mi(const MiArgs& a) {
  const TailModel model = TailModel::parse(a.model);
  if (a.snr_db.empty()) throw Error(Errc::invalid_argument, "at least one SNR value is required");
  json rows = json::array();
  for (double snr : a.snr_db) {
    if (!std::isfinite(snr)) throw Error(Errc::invalid_argument, "SNR values must be finite");
    const ChannelConfig ch{snr};
    const MiEstimate mi = mutual_information(model, ch, a.n, a.seed);
    rows.push_back({{"snr", quantity(snr, "dB")},
                    {"noise_variance", quantity(ch.noise_variance(), "symbol^2")},
                    {"mutual_information", quantity(mi.bits, "bits")},
                    {"stderr", quantity(mi.stderr_bits, "bits")},
                    {"awgn_capacity", quantity(awgn_capacity(ch), "bits")},
                    {"output_entropy", quantity(mi.output_entropy_nats, "nats")},
                    {"noise_entropy", quantity(mi.noise_entropy_nats, "nats")}});
  }
  json res{{"samples", count(a.n)}, {"bootstrap_resamples", count(kBootstrapResamples)}, {"sweep", std::move(rows)}};
  json cfg{{"model", model.to_string()}, {"snr_db", a.snr_db}, {"n", a.n}};
  return make_report("mi", std::move(cfg), json::array({a.seed}), std::move(res));
}

// --- train ----------------------------------------------------------------

enum class Experiment { train, entropy_variability, lambda_sweep };

struct TrainConfig {
  Experiment experiment = Experiment::train;
  jscc::CodecConfig codec;
  jscc::SourceSpec source;
  std::vector<std::uint64_t> seeds;
  std::vector<double> lambdas;
  std::size_t dump_samples = jscc::kExperimentDumpSamples;
};

namespace detail {

/// Strict reader: every key must be known, every value must have the right type.
class Fields {
 public:
  Fields(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj.is_object()) throw Error(Errc::config_error, "field '" + name_or_root() + "' must be an object");
    for (const auto& [k, _] : obj.items()) unused_.insert(k);
  }

  const json* find(const std::string& key) {
    unused_.erase(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw bad(key, "a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw bad(key, "a finite number");
    }
  }
  void get(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw bad(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw bad(key, "a string");
      out = v->get<std::string>();
    }
  }
  void get_seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw bad(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void finish() const {
    if (!unused_.empty()) throw Error(Errc::config_error, "unknown field '" + path(*unused_.begin()) + "'");
  }

  Error bad(const std::string& key, const std::string& what) const {
    return Error(Errc::config_error, "field '" + path(key) + "' must be " + what);
  }

 private:
  std::string name_or_root() const { return prefix_.empty() ? "<root>" : prefix_; }
  const json& obj_;
  std::string prefix_;
  std::set<std::string> unused_;
};

}  // namespace detail

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::train: return "train";
    case Experiment::entropy_variability: return "entropy_variability";
    case Experiment::lambda_sweep: return "lambda_sweep";
  }
  return "train";
}

inline TrainConfig parse_train_config(const json& root) {
  TrainConfig tc;
  detail::Fields top(root, "");
  std::string experiment = "train";
  top.get("experiment", experiment);
  if (experiment == "train") tc.experiment = Experiment::train;
  else if (experiment == "entropy_variability") tc.experiment = Experiment::entropy_variability;
  else if (experiment == "lambda_sweep") tc.experiment = Experiment::lambda_sweep;
  else throw top.bad("experiment", "one of train, entropy_variability, lambda_sweep");

  jscc::CodecConfig& c = tc.codec;
  if (const json* v = top.find("codec")) {
    detail::Fields f(*v, "codec");
    f.get("input_dim", c.input_dim);
    f.get("symbols", c.symbols);
    f.get("hidden", c.hidden);
    f.get("snr_db", c.snr_db);
    f.get("lambda", c.lambda);
    std::string mode = to_string(c.kde_mode);
    f.get("kde_mode", mode);
    if (mode != "identical" && mode != "non_identical") throw f.bad("kde_mode", "identical or non_identical");
    c.kde_mode = parse_kde_mode(mode);
    f.get("learning_rate", c.learning_rate);
    f.get("batch", c.batch);
    f.get("epochs", c.epochs);
    f.get("steps_per_epoch", c.steps_per_epoch);
    f.get_seed("seed", c.seed);
    f.get("eval_batch", c.eval_batch);
    f.get("fit_batch", c.fit_batch);
    f.finish();
  }
  tc.source.dim = c.input_dim;
  if (const json* v = top.find("source")) {
    detail::Fields f(*v, "source");
    std::string regime = "uniform_entropy";
    f.get("regime", regime);
    if (regime == "uniform_entropy") tc.source.regime = jscc::SourceRegime::uniform_entropy;
    else if (regime == "variable_entropy") tc.source.regime = jscc::SourceRegime::variable_entropy;
    else throw f.bad("regime", "uniform_entropy or variable_entropy");
    f.get("g_lo", tc.source.g_lo);
    f.get("g_hi", tc.source.g_hi);
    f.finish();
  }
  if (const json* v = top.find("seeds")) {
    if (!v->is_array() || v->empty()) throw top.bad("seeds", "a non-empty array of non-negative integers");
    for (const json& s : *v) {
      if (!s.is_number_unsigned()) throw top.bad("seeds", "a non-empty array of non-negative integers");
      tc.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    tc.seeds = {c.seed};
  }
  if (const json* v = top.find("lambdas")) {
    if (!v->is_array() || v->empty()) throw top.bad("lambdas", "a non-empty array of numbers");
    for (const json& l : *v) {
      if (!l.is_number() || !(l.get<double>() >= 0.0)) throw top.bad("lambdas", "a non-empty array of numbers >= 0");
      tc.lambdas.push_back(l.get<double>());
    }
  }
  top.get("dump_samples", tc.dump_samples);
  top.finish();

  if (tc.experiment == Experiment::lambda_sweep && tc.lambdas.empty()) {
    throw Error(Errc::config_error, "field 'lambdas' is required for a lambda_sweep");
  }
  if (tc.experiment != Experiment::lambda_sweep && !tc.lambdas.empty()) {
    throw Error(Errc::config_error, "field 'lambdas' only applies to a lambda_sweep");
  }
  if (tc.experiment == Experiment::entropy_variability && tc.seeds.size() < 5) {
    throw Error(Errc::config_error, "field 'seeds' needs at least 5 entries for entropy_variability");
  }
  if (tc.dump_samples < 10) throw Error(Errc::config_error, "field 'dump_samples' must be >= 10");
  c.validate();
  tc.source.validate();
  return tc;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open config '" + path + "'");
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config_error, path + ": " + e.what());
  }
  return parse_train_config(root);
}

inline json echo_config(const TrainConfig& tc) {
  const jscc::CodecConfig& c = tc.codec;
  json codec{{"input_dim", c.input_dim},   {"symbols", c.symbols},
             {"hidden", c.hidden},         {"snr_db", c.snr_db},
             {"lambda", c.lambda},         {"kde_mode", to_string(c.kde_mode)},
             {"learning_rate", c.learning_rate}, {"batch", c.batch},
             {"epochs", c.epochs},         {"steps_per_epoch", c.steps_per_epoch},
             {"eval_batch", c.eval_batch}, {"fit_batch", c.fit_batch}};
  json cfg{{"experiment", to_string(tc.experiment)},
           {"codec", std::move(codec)},
           {"source", {{"regime", jscc::to_string(tc.source.regime)}, {"g_lo", tc.source.g_lo}, {"g_hi", tc.source.g_hi}}},
           {"dump_samples", tc.dump_samples}};
  if (!tc.lambdas.empty()) cfg["lambdas"] = tc.lambdas;
  return cfg;
}

struct TrainArgs {
  std::string config;
  std::string out_dir = ".";
};

namespace detail {

inline std::string tag(std::uint64_t seed, std::optional<double> lambda, const std::string& arm) {
  std::string t = "seed" + std::to_string(seed);
  if (lambda) t += "_lambda" + io::format_double(*lambda);
  if (!arm.empty()) t += "_" + arm;
  return t;
}

inline void write_metrics(const std::string& path, const std::vector<jscc::EpochMetrics>& history) {
  std::ofstream os = io::open_output(path);
  os << "epoch,mse,kl,nu_hat,nll\n";
  for (const jscc::EpochMetrics& m : history) {
    os << m.epoch << ',' << io::format_double(m.mse) << ',' << io::format_double(m.kl) << ','
       << io::format_double(m.nu_hat) << ',' << io::format_double(m.nll) << '\n';
  }
  if (!os) throw Error(Errc::io_error, "failed writing '" + path + "'");
}

inline json history_json(const std::vector<jscc::EpochMetrics>& history) {
  std::vector<double> mse, kl, nu, nl;
  for (const jscc::EpochMetrics& m : history) {
    mse.push_back(m.mse);
    kl.push_back(m.kl);
    nu.push_back(m.nu_hat);
    nl.push_back(m.nll);
  }
  return {{"mse", series(mse, "squared_error")},
          {"kl", series(kl, "nats")},
          {"nu_hat", series(nu, "dimensionless")},
          {"nll", series(nl, "nats")}};
}

/// Metrics CSV, symbol dump and summary for one finished (or diverged) run.
inline json emit_run(const std::filesystem::path& dir, const std::string& tag, const jscc::TrainState& s,
                     const jscc::SourceSpec& src, std::size_t dump_samples, std::uint64_t dump_seed) {
  const std::string metrics = (dir / ("metrics_" + tag + ".csv")).string();
  write_metrics(metrics, s.history);
  json run{{"seed", s.config.seed},
           {"lambda", quantity(s.config.lambda, "dimensionless")},
           {"regime", jscc::to_string(src.regime)},
           {"epochs_completed", count(s.history.size())},
           {"diverged", s.diverged},
           {"metrics_output", metrics},
           {"history", history_json(s.history)}};
  if (s.diverged) {
    run["diverged_epoch"] = count(s.diverged_epoch);
    return run;
  }
  const SymbolBatch dump = jscc::symbol_dump(s, src, dump_samples, dump_seed);
  const std::string symbols = (dir / ("symbols_" + tag + ".csv")).string();
  io::write_symbols(symbols, dump);
  const FitReport fit = fit_nu(dump);
  run["symbols_output"] = symbols;
  run["final_fit"] = {{"nu_hat", quantity(fit.nu_hat, "dimensionless")},
                      {"nll", quantity(fit.nll, "nats")},
                      {"hit_upper_bound", fit.hit_upper_bound},
                      {"samples", count(fit.samples)}};
  return run;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace detail

/// Runs the configured experiment. Metrics CSVs are written for every run,
/// including diverged ones, before a divergence is reported as an error.
inline json cmd_train(const TrainArgs& a) {
  const TrainConfig tc = load_train_config(a.config);
  detail::ensure_dir(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  json results;
  json runs = json::array();
  std::optional<std::string> divergence;
  auto note_divergence = [&](const jscc::TrainState& s, const std::string& tag) {
    if (s.diverged && !divergence) {
      divergence = "run " + tag + " diverged at epoch " + std::to_string(s.diverged_epoch);
    }
  };

  switch (tc.experiment) {
    case Experiment::train: {
      for (std::uint64_t seed : tc.seeds) {
        jscc::CodecConfig c = tc.codec;
        c.seed = seed;
        const jscc::TrainState s = jscc::train(c, tc.source);
        const std::string t = detail::tag(seed, std::nullopt, "");
        runs.push_back(detail::emit_run(dir, t, s, tc.source, tc.dump_samples, jscc::experiment_dump_seed(seed)));
        note_divergence(s, t);
      }
      break;
    }
    case Experiment::lambda_sweep: {
      const std::vector<jscc::TrainState> states = jscc::lambda_sweep(tc.codec, tc.source, tc.seeds, tc.lambdas);
      for (std::size_t i = 0; i < states.size(); ++i) {
        const jscc::TrainState& s = states[i];
        const std::string t = detail::tag(s.config.seed, s.config.lambda, "");
        runs.push_back(
            detail::emit_run(dir, t, s, tc.source, tc.dump_samples, jscc::experiment_dump_seed(s.config.seed)));
        note_divergence(s, t);
      }
      // Half-way mse of each λ > 0 against λ = 0 on the same seed.
      const auto zero = std::find(tc.lambdas.begin(), tc.lambdas.end(), 0.0);
      const std::size_t half = tc.codec.epochs / 2;
      if (zero != tc.lambdas.end() && half >= 1 && !divergence) {
        const auto zi = static_cast<std::size_t>(zero - tc.lambdas.begin());
        json comps = json::array();
        for (std::size_t j = 0; j < tc.lambdas.size(); ++j) {
          if (j == zi) continue;
          json pairs = json::array();
          std::size_t not_worse = 0;
          for (std::size_t i = 0; i < tc.seeds.size(); ++i) {
            const double plain = states[i * tc.lambdas.size() + zi].history[half - 1].mse;
            const double reg = states[i * tc.lambdas.size() + j].history[half - 1].mse;
            if (reg <= plain) ++not_worse;
            pairs.push_back({{"seed", tc.seeds[i]},
                             {"mse_unregularized", quantity(plain, "squared_error")},
                             {"mse_regularized", quantity(reg, "squared_error")}});
          }
          comps.push_back({{"lambda", quantity(tc.lambdas[j], "dimensionless")},
                           {"half_epoch", count(half)},
                           {"pairs", std::move(pairs)},
                           {"regularized_not_worse", count(not_worse)},
                           {"fraction_regularized_not_worse",
                            quantity(static_cast<double>(not_worse) / static_cast<double>(tc.seeds.size()),
                                     "fraction")}});
        }
        results["half_epoch_comparison"] = std::move(comps);
      }
      break;
    }
    case Experiment::entropy_variability: {
      const jscc::EntropyExperimentReport rep =
          jscc::entropy_variability_experiment(tc.codec, tc.seeds, tc.source.g_lo, tc.source.g_hi);
      json pairs = json::array();
      for (const jscc::EntropyArmResult& r : rep.runs) {
        const jscc::SourceSpec uni{tc.codec.input_dim, jscc::SourceRegime::uniform_entropy, 1.0, 1.0};
        const jscc::SourceSpec var{tc.codec.input_dim, jscc::SourceRegime::variable_entropy, rep.g_lo, rep.g_hi};
        runs.push_back(detail::emit_run(dir, detail::tag(r.seed, std::nullopt, "uniform"), r.uniform, uni,
                                        tc.dump_samples, jscc::experiment_dump_seed(r.seed)));
        runs.push_back(detail::emit_run(dir, detail::tag(r.seed, std::nullopt, "variable"), r.variable, var,
                                        tc.dump_samples, jscc::experiment_dump_seed(r.seed)));
        pairs.push_back({{"seed", r.seed},
                         {"nu_uniform", quantity(r.nu_uniform, "dimensionless")},
                         {"nu_variable", quantity(r.nu_variable, "dimensionless")},
                         {"uniform_hit_upper_bound", r.uniform_hit_bound},
                         {"variable_hit_upper_bound", r.variable_hit_bound}});
      }
      results["nu_pairs"] = std::move(pairs);
      results["fraction_variable_lower"] = quantity(rep.fraction_variable_lower, "fraction");
      results["fit_samples"] = count(rep.dump_samples);
      break;
    }
  }
  results["runs"] = std::move(runs);
  json report = make_report("train", echo_config(tc), tc.seeds, std::move(results));
  write_report(report, (dir / "report.json").string());
  if (divergence) throw Error(Errc::divergence, *divergence + " (partial metrics written to " + a.out_dir + ")");
  return report;
}

}  // namespace semsym::cli
