#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "gibbsnet/config.hpp"
#include "gibbsnet/experiment.hpp"

namespace {

int cmd_run(const std::string& config, const std::string& out, unsigned threads, bool quiet) {
  const gibbsnet::ExperimentConfig cfg = gibbsnet::load_config(config);
  gibbsnet::ExperimentOptions options;
  options.threads = threads;
  options.quiet = quiet;
  const gibbsnet::ExperimentResult result = gibbsnet::run_experiment(cfg, out, options);
  if (!quiet && result.exit_status == 0) std::cerr << "wrote " << out << '\n';
  return result.exit_status;
}

int cmd_rates(const std::string& config, const std::string& out) {
  const gibbsnet::ExperimentConfig cfg = gibbsnet::load_config(config);
  const auto rows = gibbsnet::rate_rows(cfg);
  gibbsnet::write_report_csv(std::cout, rows);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream file(std::filesystem::path(out) / "report.csv");
    gibbsnet::write_report_csv(file, rows);
  }
  return 0;
}

int cmd_validate(const std::string& config) {
  const gibbsnet::ExperimentConfig cfg = gibbsnet::load_config(config);
  std::cout << "ok: n=" << cfg.network.n << " m=" << cfg.network.m << " d=" << cfg.network.d
            << " edges=" << cfg.network.edges.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blocked Gibbs sampling over bipartite networks"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  unsigned threads = 0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "sample chains and write trace.csv, report.csv, manifest.json");
  run->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->capture_default_str();
  run->add_option("--threads", threads, "worker threads, 0 = auto")->capture_default_str();
  run->add_flag("--quiet", quiet, "no progress output");

  std::string rates_out;
  auto* rates = app.add_subcommand("rates", "print the rate report without sampling");
  rates->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  rates->add_option("--out", rates_out, "also write report.csv here");

  auto* check = app.add_subcommand("validate", "parse and validate a config");
  check->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out, threads, quiet);
    if (*rates) return cmd_rates(config, rates_out);
    return cmd_validate(config);
  } catch (const gibbsnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
