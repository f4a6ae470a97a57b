#include "handover/app/config.hpp"
#include "handover/app/convert.hpp"
#include "handover/app/report.hpp"
#include "handover/app/run.hpp"
#include "handover/app/synth.hpp"
#include "handover/core/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

namespace app = handover::app;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kPipelineFailure = 1;
constexpr int kConfigError = 2;

struct Args {
  std::string config;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string input;
};

app::ExperimentConfig load_config(const Args& a) {
  auto cfg = app::parse_config(a.config);
  if (a.seed) cfg.seed = a.seed;
  if (!a.out.empty()) cfg.out_dir = a.out;
  app::validate_config(cfg);
  return cfg;
}

int cmd_run(const Args& a) {
  const auto cfg = load_config(a);
  app::RunOptions opts;
  opts.jobs = a.jobs;
  opts.log = &std::cerr;
  const auto summary = app::run_experiment(cfg, opts);
  if (summary.exit_code() != 0) {
    const auto& e = summary.errors.front();
    std::cerr << "error: " << summary.errors.size() << " failure(s); first: " << e.tag << " " << e.model << ": "
              << e.message << "\nsee " << (cfg.out_dir / "errors.csv").string() << "\n";
  }
  return summary.exit_code();
}

int cmd_validate(const Args& a) {
  const auto cfg = load_config(a);
  std::cout << "config ok: " << a.config << " (hash " << std::hex << app::config_hash(cfg) << std::dec << ")\n";
  return kOk;
}

int cmd_synth(const Args& a) {
  auto profile = a.config.empty() ? app::SynthProfile{} : app::parse_synth_profile(a.config);
  if (a.seed) profile.seed = *a.seed;
  if (a.out.empty()) throw app::ConfigError("<command line>", 0, "--out", "an output directory is required");
  app::write_synthetic_dataset(profile, a.out);
  std::cout << "wrote " << profile.participants << " participants x " << 3 * profile.trials_per_condition
            << " trials to " << a.out << "\n";
  return kOk;
}

int cmd_report(const Args& a) {
  const std::string dir = !a.input.empty() ? a.input : a.out;
  if (dir.empty()) throw app::ConfigError("<command line>", 0, "results", "a results directory is required");
  for (const auto& p : app::make_report(dir)) std::cout << "wrote " << p.string() << "\n";
  return kOk;
}

int cmd_convert(const Args& a) {
  if (a.input.empty() || a.out.empty()) {
    throw app::ConfigError("<command line>", 0, "convert-dataset", "an archive directory and --out are required");
  }
  const int n = app::convert_dataset(a.input, a.out);
  std::cout << "converted " << n << " trials into " << a.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Handover intention detection from EEG, gaze and hand motion"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", HANDOVER_VERSION);
  Args args;

  auto* run = cli.add_subcommand("run", "Run the configured sweeps and write results");
  run->add_option("--config", args.config, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", args.seed, "Override the config seed");
  run->add_option("--out", args.out, "Override the output directory");

  auto* validate = cli.add_subcommand("validate-config", "Check a config file and exit");
  validate->add_option("--config", args.config, "Experiment config file")->required()->check(CLI::ExistingFile);
  validate->add_option("--seed", args.seed, "Override the config seed");
  validate->add_option("--out", args.out, "Override the output directory");

  auto* synth = cli.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", args.config, "Generator profile ([synth], [eeg], [gaze], [motion])")
      ->check(CLI::ExistingFile);
  synth->add_option("--seed", args.seed, "Override the profile seed");
  synth->add_option("--out", args.out, "Dataset directory")->required();

  auto* report = cli.add_subcommand("report", "Write plot data for a finished run");
  report->add_option("results", args.input, "Results directory");
  report->add_option("--out", args.out, "Results directory (alternative to the positional argument)");

  auto* convert = cli.add_subcommand("convert-dataset", "Convert the published archive layout to a manifest dataset");
  convert->add_option("archive", args.input, "Archive root with sub-XX directories")->required();
  convert->add_option("--out", args.out, "Dataset directory")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(args);
    if (*validate) return cmd_validate(args);
    if (*synth) return cmd_synth(args);
    if (*report) return cmd_report(args);
    if (*convert) return cmd_convert(args);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const handover::SpecError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPipelineFailure;
  }
  return kOk;
}
