// Copyright (c) dcalm contributors

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dcalm/dcalm.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kIoError = 3;

void print_summary(const dcalm::ExperimentResult& result) {
  std::printf("%-48s %6s %9s %12s %12s\n", "cell", "runs", "successes", "mean_time", "median_time");
  for (const auto& [cell, s] : result.summary) {
    std::printf("%-48s %6d %9d %12.4g %12.4g\n", cell.c_str(), s.runs, s.successes,
                s.mean_wall_time, s.median_wall_time);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch runner for DC-constrained benchmark experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> solver;
  std::optional<double> time_limit;
  std::optional<int> threads;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "Flat key = value config file")->required();
  run->add_option("--seed", seed, "Master seed (overrides config)");
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  run->add_option("--solver", solver, "psalmdc, dca or both (overrides config)")
      ->check(CLI::IsMember({"psalmdc", "dca", "both"}));
  run->add_option("--time-limit", time_limit, "Per-run wall-clock limit in seconds");
  run->add_option("--threads", threads, "Concurrent runs");

  CLI11_PARSE(app, argc, argv);

  try {
    dcalm::ExperimentConfig cfg = dcalm::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (solver) cfg.solver = dcalm::parse_solver_choice(*solver);
    if (time_limit) cfg.time_limit = *time_limit;
    if (threads) cfg.threads = *threads;
    cfg.validate();

    const dcalm::ExperimentResult result = dcalm::run_experiment(cfg);
    dcalm::emit_outputs(result.records, result.summary, cfg.output_dir);
    print_summary(result);
    std::cout << "wrote " << result.records.size() << " runs to " << cfg.output_dir << '\n';
    return 0;
  } catch (const dcalm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const dcalm::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
