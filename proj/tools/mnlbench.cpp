// mnlbench: run MNL bandit experiments, property suites and diagnostics.
//
//   mnlbench run      --config exp.cfg [--out dir] [--threads n] [--seed s] [--no-timing]
//   mnlbench validate [--seed s]
//   mnlbench diag     --config exp.cfg [--seed s] [--instances n]

#include <chrono>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "mnl/config.hpp"
#include "mnl/diagnostics.hpp"
#include "mnl/harness.hpp"
#include "mnl/validation.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
};

mnl::ExperimentConfig load(const CommonFlags& flags) {
  mnl::ExperimentConfig config = mnl::load_config(flags.config_path);
  if (flags.seed) config.base_seed = *flags.seed;
  if (!flags.out_dir.empty()) config.out_path = flags.out_dir;
  return config;
}

int cmd_run(const CommonFlags& flags, bool no_timing) {
  const mnl::ExperimentConfig config = load(flags);
  const auto start = std::chrono::steady_clock::now();
  mnl::ExperimentOptions options;
  options.threads = flags.threads;
  options.record_timing = !no_timing;
  const mnl::ExperimentResult result = mnl::run_experiment(config, options);
  const auto paths = mnl::write_experiment(result, config.out_path);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int failures = 0;
  for (const auto& cell : result.cells) {
    if (cell.error) {
      std::cerr << "cell " << cell.policy << " k=" << cell.k << " seed=" << cell.seed
                << " failed: " << *cell.error << '\n';
      ++failures;
    }
  }
  std::cout << mnl::format_summary_csv(result.summary);
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
  std::cout << "elapsed " << secs << " s\n";
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

int cmd_validate(std::uint64_t seed) {
  const auto results = mnl::run_validation_suite(seed);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << mnl::format_check(r) << '\n';
    ok = ok && r.passed;
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}

int cmd_diag(const CommonFlags& flags, std::optional<std::size_t> instances) {
  const mnl::ExperimentConfig config = load(flags);
  const std::size_t n = instances.value_or(config.num_instances);
  bool ok = true;
  for (std::size_t k : config.k_values) {
    for (std::size_t i = 0; i < n; ++i) {
      const mnl::DiagnosticReport report = mnl::diagnose(config, k, i);
      std::cout << "== k = " << k << ", instance " << i << '\n' << mnl::format_report(report);
      ok = ok && report.passed();
    }
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual MNL bandit experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool no_timing = false;
  std::optional<std::size_t> diag_instances;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", flags.seed, "Override base_seed");
  };

  CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", flags.config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", flags.out_dir, "Output directory (overrides out_path)");
  run->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing, "Write 0 for round_runtime_ns (byte-reproducible output)");
  add_seed(run);

  CLI::App* validate = app.add_subcommand("validate", "Run the property and oracle suites");
  add_seed(validate);

  CLI::App* diag = app.add_subcommand("diag", "Replay ofu-mnl runs and check the potential inequalities");
  diag->add_option("--config", flags.config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  diag->add_option("--instances", diag_instances, "Number of instances to replay");
  diag->add_option("--out", flags.out_dir, "Unused; accepted for symmetry with run");
  diag->add_option("--threads", flags.threads, "Unused; diagnostics run serially");
  add_seed(diag);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags, no_timing);
    if (validate->parsed()) return cmd_validate(flags.seed.value_or(1));
    if (diag->parsed()) return cmd_diag(flags, diag_instances);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_FAILURE;
}
