// Command-line driver for simulation, estimation and diagnostics runs.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parexp/pipeline.hpp"
#include "parexp/scenarios.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kIdentification = 3, kIo = 4 };

std::filesystem::path default_out() {
  if (const char* env = std::getenv("PAREXP_OUT"); env != nullptr && *env != '\0') return env;
  return "parexp_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel experimentation simulator and estimators"};
  app.require_subcommand(1);

  unsigned threads = 1;
  std::string out;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1U, 256U));
  app.add_option("--out", out, "Output directory (default: $PAREXP_OUT or ./parexp_out)");

  parexp::SimulateArgs sim;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Generate exposure logs, outcomes and oracle ATEs");
  simulate->add_option("--config", sim.config, "Experiment config")->required();
  simulate->add_option("--seed", sim_seed, "Overrides the config seed");
  simulate->add_flag("--compress", sim.compress, "gzip the large CSV outputs");
  bool no_oracle = false;
  simulate->add_flag("--no-oracle", no_oracle, "Skip the oracle table");

  parexp::EstimateArgs est;
  std::string method = "cells";
  std::string in_dir;
  double lambda = -1.0;
  auto* estimate = app.add_subcommand("estimate", "Estimate degenerate ATEs from logs");
  estimate->add_option("--in", in_dir, "Directory with exposure.csv and outcomes.csv")->required();
  estimate->add_option("--focal", est.focal, "Focal campaign (default: every campaign)");
  estimate->add_option("--method", method, "cells, kernel or interaction")
      ->check(CLI::IsMember({"cells", "kernel", "interaction"}));
  estimate->add_option("--split", est.options.split, "Kernel training fraction; 0 disables the split")
      ->check(CLI::Range(0.0, 0.99));
  estimate->add_option("--min-cell", est.options.min_cell, "Minimum users per arm before a cell is low-support");
  estimate->add_option("--lambda", lambda, "Common kernel bandwidth; skips cross-validation")
      ->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--rival", est.options.rival, "Rival campaign for the interaction regression");
  estimate->add_option("--seed", est.options.seed, "Seed for the split and CV starts");
  estimate->add_flag("--all-users", est.options.all_users, "Use every targeted user, not the eligibility sample");

  parexp::CalculusArgs calc;
  std::string calc_table;
  std::string beliefs;
  auto* calculus = app.add_subcommand("calculus", "Prospective ATEs, competitor curves and scenario curves");
  calculus->add_option("--in", in_dir, "Directory with outcomes.csv")->required();
  calculus->add_option("--table", calc_table, "AteTable or oracle CSV (default: <in>/ate_table.csv)");
  calculus->add_option("--config", beliefs, "Config with [belief] or [joint] sections");
  calculus->add_option("--focal", calc.focal, "Focal campaign");
  calculus->add_option("--partition", calc.partition, "Partition label (default: most competitors)");
  calculus->add_option("--rival", calc.rival, "Competitor for the curve and surface");
  calculus->add_option("--sigma", calc.sigma, "Competitor test share")->check(CLI::Range(0.0, 1.0));
  calculus->add_option("--grid", calc.grid, "Grid points on [0,1]")->check(CLI::Range(1, 10001));

  parexp::DiagnoseArgs diag;
  std::string diag_config;
  auto* diagnose = app.add_subcommand("diagnose", "Randomization, balance and heterogeneity diagnostics");
  diagnose->add_option("--in", in_dir, "Directory with outcomes.csv and covariates.csv")->required();
  diagnose->add_option("--config", diag_config, "Config supplying target shares");
  diagnose->add_option("--target", diag.target, "Target share when no config is given")->check(CLI::Range(0.0, 1.0));

  std::string scenario;
  std::uint64_t rep_seed = 1;
  auto* replicate = app.add_subcommand("replicate", "Run a built-in reproduction scenario");
  replicate->add_option("scenario", scenario, "two_firm, overlap_table or balance")->required();
  replicate->add_option("--seed", rep_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  const std::filesystem::path out_dir = out.empty() ? default_out() : std::filesystem::path(out);

  try {
    if (*simulate) {
      sim.seed = sim_seed;
      sim.out = out_dir;
      sim.threads = threads;
      sim.oracle = !no_oracle;
      std::cout << parexp::run_simulate(sim).string() << "\n";
    } else if (*estimate) {
      est.in = in_dir;
      est.out = out_dir;
      est.options.threads = threads;
      est.options.method = method == "kernel"        ? parexp::Method::kernel
                           : method == "interaction" ? parexp::Method::interaction
                                                     : parexp::Method::cells;
      if (lambda >= 0.0) est.options.lambda = lambda;
      std::cout << parexp::run_estimate(est).string() << "\n";
    } else if (*calculus) {
      calc.in = in_dir;
      calc.out = out_dir;
      calc.table = calc_table.empty() ? std::filesystem::path(in_dir) / "ate_table.csv" : std::filesystem::path(calc_table);
      if (!beliefs.empty()) calc.beliefs = beliefs;
      std::cout << parexp::run_calculus(calc).string() << "\n";
    } else if (*diagnose) {
      diag.in = in_dir;
      diag.out = out_dir;
      if (!diag_config.empty()) diag.config = diag_config;
      std::cout << parexp::run_diagnose(diag).string() << "\n";
    } else if (*replicate) {
      const auto report = parexp::replicate(scenario, out_dir, rep_seed, threads);
      std::cout << report.text();
      return report.passed() ? kOk : kIdentification;
    }
  } catch (const parexp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const parexp::IdentificationError& e) {
    std::cerr << e.what() << "\n";
    return kIdentification;
  } catch (const parexp::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
