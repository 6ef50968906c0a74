#include "qdarwin/errors.hpp"
#include "qdarwin/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using qdarwin::Complex;

Complex parse_complex_flag(const std::string& raw) {
  const size_t comma = raw.find(',');
  if (comma == std::string::npos) {
    throw qdarwin::ConfigError("expected complex value as re,im: " + raw);
  }
  try {
    return Complex(std::stod(raw.substr(0, comma)), std::stod(raw.substr(comma + 1)));
  } catch (const std::exception&) {
    throw qdarwin::ConfigError("expected complex value as re,im: " + raw);
  }
}

struct GlobalFlags {
  std::optional<long> seed;
  std::optional<std::string> out_dir;
  std::optional<double> tol;

  void apply(qdarwin::ExperimentConfig& cfg) const {
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (out_dir) cfg.out_dir = *out_dir;
    if (tol) cfg.tol = *tol;
  }
};

int run_config(const std::string& path, const GlobalFlags& flags,
               const std::vector<qdarwin::Operation>* forced_ops) {
  qdarwin::ExperimentConfig cfg = qdarwin::load_experiment_config(path);
  flags.apply(cfg);
  if (forced_ops) cfg.operations = *forced_ops;
  const qdarwin::RunResult result = qdarwin::run_experiment(cfg);
  for (const auto& record : result.records) std::cout << record.dump() << "\n";
  if (!result.contracts_ok) {
    for (const auto& failure : result.contract_failures) {
      std::cerr << "contract violation: " << failure << "\n";
    }
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redundant-record, joint-measurability and Markov-blanket analyses "
               "for dense quantum many-body scenarios"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Override the experiment seed");
  app.add_option("--out-dir", flags.out_dir, "Override the report directory");
  app.add_option("--tol", flags.tol, "Override the contract tolerance");

  // scenario grid
  auto* scenario = app.add_subcommand("scenario", "Build a scenario and print its facts");
  scenario->fallthrough();
  auto* grid = scenario->add_subcommand("grid", "The n x n grid scenario");
  grid->fallthrough();
  int grid_n = 2;
  std::string alpha_raw = "1,0", beta_raw = "0,0";
  double noise = 0.0;
  grid->add_option("--n", grid_n, "Grid side length");
  grid->add_option("--alpha", alpha_raw, "Coefficient of |0bar> as re,im");
  grid->add_option("--beta", beta_raw, "Coefficient of |1bar> as re,im");
  grid->add_option("--noise", noise, "Per-qubit depolarizing probability");

  std::string config_path;
  auto add_config_subcommand = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->fallthrough();
    cmd->add_option("config", config_path, "Experiment config file")->required();
    return cmd;
  };
  auto* audit_cmd = add_config_subcommand("audit-records", "Redundancy audit");
  auto* covering_cmd = add_config_subcommand("check-covering", "Covering predicates");
  auto* jm_cmd = add_config_subcommand("certify-jm", "Joint-measurability certification");
  auto* blanket_cmd = add_config_subcommand("find-blanket", "Markov-blanket search");
  auto* bound_cmd = add_config_subcommand("verify-bound", "Deviation-bound verification");
  auto* run_cmd = add_config_subcommand("run", "Full configured pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    using qdarwin::Operation;
    if (grid->parsed()) {
      qdarwin::GridScenario s;
      s.n = grid_n;
      s.alpha = parse_complex_flag(alpha_raw);
      s.beta = parse_complex_flag(beta_raw);
      s.noise_p = noise;
      std::cout << qdarwin::grid_scenario_summary(s).dump(2) << "\n";
      return 0;
    }
    if (audit_cmd->parsed()) {
      const std::vector<Operation> ops{Operation::audit};
      return run_config(config_path, flags, &ops);
    }
    if (covering_cmd->parsed()) {
      const std::vector<Operation> ops{Operation::covering};
      return run_config(config_path, flags, &ops);
    }
    if (jm_cmd->parsed()) {
      const std::vector<Operation> ops{Operation::jm};
      return run_config(config_path, flags, &ops);
    }
    if (blanket_cmd->parsed()) {
      const std::vector<Operation> ops{Operation::blanket};
      return run_config(config_path, flags, &ops);
    }
    if (bound_cmd->parsed()) {
      const std::vector<Operation> ops{Operation::blanket, Operation::bound};
      return run_config(config_path, flags, &ops);
    }
    if (run_cmd->parsed()) {
      return run_config(config_path, flags, nullptr);
    }
  } catch (const qdarwin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qdarwin::EnvelopeError& e) {
    std::cerr << "envelope exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
