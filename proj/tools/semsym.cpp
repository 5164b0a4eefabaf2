// semsym: command-line front end. Reports are JSON (stdout unless --report).

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semsym/cli.hpp"

namespace {

template <class F>
void bind(CLI::App* sub, std::string& report, F run) {
  sub->callback([&report, run] { semsym::cli::write_report(run(), report); });
}

}  // namespace

int main(int argc, char** argv) {
  using namespace semsym::cli;
  CLI::App app{"Heavy-tailed channel symbol toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string report;

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Draw samples from a tail model into a symbol CSV");
  sample->add_option("--model", sample_args.model, "gaussian | cauchy | student_t:<nu>")->capture_default_str();
  sample->add_option("-n,--n", sample_args.n, "Number of samples")->capture_default_str();
  sample->add_option("--seed", sample_args.seed)->capture_default_str();
  sample->add_option("-o,--output", sample_args.output, "Symbol CSV to write")->required();
  sample->add_option("--report", report, "Report path (default stdout)");
  bind(sample, report, [&] { return cmd_sample(sample_args); });

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit the tail index of a symbol CSV");
  fit->add_option("input", fit_args.input, "Symbol CSV")->required();
  fit->add_option("--nu-max", fit_args.nu_max)->capture_default_str();
  fit->add_option("--qq-output", fit_args.qq_output, "QQ sidecar CSV (default <input>.qq.csv)");
  fit->add_option("--quantiles", fit_args.quantiles)->capture_default_str();
  fit->add_option("--report", report, "Report path (default stdout)");
  bind(fit, report, [&] { return cmd_fit(fit_args); });

  KlArgs kl_args;
  auto* kl = app.add_subcommand("kl", "KL divergence of the symbol KDE from a tail model");
  kl->add_option("input", kl_args.input, "Symbol CSV")->required();
  kl->add_option("--target", kl_args.target, "gaussian | cauchy | student_t:<nu>")->capture_default_str();
  kl->add_option("--mode", kl_args.mode, "identical | non_identical")->capture_default_str();
  kl->add_option("--report", report, "Report path (default stdout)");
  bind(kl, report, [&] { return cmd_kl(kl_args); });

  MaxentArgs me_args;
  auto* me = app.add_subcommand("maxent", "Maximum-entropy law under a payload constraint");
  me->add_option("--alpha", me_args.alpha)->capture_default_str();
  me->add_option("--noise-var", me_args.noise_var)->capture_default_str();
  me->add_option("--payload", me_args.payload_bits, "Target payload in bits")->capture_default_str();
  me->add_option("--half-width", me_args.half_width)->capture_default_str();
  me->add_option("--points", me_args.points)->capture_default_str();
  me->add_flag("--allow-truncated", me_args.allow_truncated);
  me->add_option("--perturbations", me_args.perturbations)->capture_default_str();
  me->add_option("--seed", me_args.seed)->capture_default_str();
  me->add_option("--density-output", me_args.density_output, "Grid density sidecar CSV");
  me->add_option("--report", report, "Report path (default stdout)");
  bind(me, report, [&] { return cmd_maxent(me_args); });

  MiArgs mi_args;
  auto* mi = app.add_subcommand("mi", "Mutual information over AWGN for an input law");
  mi->add_option("--model", mi_args.model)->capture_default_str();
  mi->add_option("--snr", mi_args.snr_db, "SNR values in dB")->delimiter(',');
  mi->add_option("-n,--n", mi_args.n)->capture_default_str();
  mi->add_option("--seed", mi_args.seed)->capture_default_str();
  mi->add_option("--report", report, "Report path (default stdout)");
  bind(mi, report, [&] { return cmd_mi(mi_args); });

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Train the toy codec from a JSON config");
  tr->add_option("config", train_args.config, "JSON config")->required();
  tr->add_option("--out-dir", train_args.out_dir, "Directory for report.json, metrics and symbol CSVs")
      ->capture_default_str();
  tr->callback([&] { cmd_train(train_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const semsym::Error& e) {
    std::cerr << "semsym: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "semsym: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
