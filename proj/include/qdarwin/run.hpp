#pragma once

#include "qdarwin/config.hpp"
#include "qdarwin/dynamics.hpp"
#include "qdarwin/scenarios.hpp"
#include "qdarwin/serialize.hpp"

#include <string>
#include <vector>

namespace qdarwin {

struct RunResult {
  bool contracts_ok = true;
  std::vector<std::string> contract_failures;
  std::vector<Json> records;
  std::map<std::string, std::string> csv_files;  // name -> contents

  void add_failure(const std::string& what) {
    contracts_ok = false;
    contract_failures.push_back(what);
  }
};

/// Executes the configured pipeline and, on success, writes
/// <out_dir>/report.jsonl plus per-operation CSV tables. All outputs are
/// buffered and written only after every stage finished, so a failed run
/// leaves no partial files.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Scenario facts for the `scenario grid` subcommand: normalization,
/// code-vector orthogonality, agreement of the two code-vector forms,
/// row/column outcome probabilities.
Json grid_scenario_summary(const GridScenario& s);

/// End-to-end check of the pairwise constructive witness on a noisy grid:
/// two single-row record families that do not pair-cover each other, audited
/// over the attainable-state set {Lambda_p(sigma)} for a spanning sigma set
/// plus `extra_random_sigma` random inputs.
struct PairwiseWitnessGridReport {
  int n = 0;
  double noise_p = 0.0;
  long n_states = 0;
  double audited_delta = 0.0;    // max record delta over both families and all states
  double witness_residual = 0.0; // max verify residual over all (f, g) pairs
  bool covering_holds = false;
  bool sound = false;            // residual <= audited delta + 1e-9
};

PairwiseWitnessGridReport run_grid_pairwise_witness_check(int n, double noise_p, int extra_random_sigma,
                                     std::uint64_t seed);

/// Seeded (sigma, f, F_f) trials for the deviation-bound verifier: random
/// reference inputs, fragments cycling over the allowed subsets, and random
/// product-basis measurements on each fragment.
std::vector<BoundTrial> make_bound_trials(const ChoiState& choi,
                                          const BlanketResult& blanket, int count,
                                          std::uint64_t seed);

/// The scenario's channel (grid isometry, classical copy, seeded random, or
/// a deserialized Kraus file).
Channel scenario_channel(const ExperimentConfig& cfg);

}  // namespace qdarwin
