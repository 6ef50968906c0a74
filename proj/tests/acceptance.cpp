// Acceptance suite: one checked criterion per entry, one pass/fail line each.
// Run all criteria with no arguments, or a single one with --criterion N.
// --cli <path> points at the command-line binary for the determinism check.

#include "qdarwin/compat.hpp"
#include "qdarwin/covering.hpp"
#include "qdarwin/dynamics.hpp"
#include "qdarwin/measurement.hpp"
#include "qdarwin/run.hpp"
#include "qdarwin/scenarios.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace qdarwin;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct CriterionResult {
  bool passed = false;
  std::string detail;
};

using CriterionFn = std::function<CriterionResult()>;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// --- criterion 1: noiseless grid audits --------------------------------------

CriterionResult criterion_grid_reproduction() {
  CriterionResult r;
  double worst_delta = 0.0;
  double worst_perp = 0.0;
  for (int n : {2, 3}) {
    const GridScenario s{n, Complex(std::sqrt(0.3), 0), Complex(std::sqrt(0.7), 0), 0.0};
    const SystemState state = build_grid_state(s);
    const auto [rows, columns] = grid_partitions(n);

    std::vector<Povm> row_povms, col_povms;
    for (int i = 1; i <= n; ++i) row_povms.push_back(row_povm(i, n));
    for (int j = 1; j <= n; ++j) col_povms.push_back(column_parity_povm(j, n));

    worst_delta = std::max(worst_delta,
                           redundancy_audit(row_povms, rows, state).overall_delta);
    worst_delta = std::max(worst_delta,
                           redundancy_audit(col_povms, columns, state).overall_delta);
    for (const Povm& p : row_povms) {
      const auto probs = outcome_probabilities(p, state);
      worst_perp = std::max(worst_perp, probs[p.outcome_index("perp")]);
    }
  }
  r.passed = worst_delta <= 1e-10 && worst_perp <= 1e-12;
  r.detail = "max delta " + fmt(worst_delta) + ", max off-code probability " +
             fmt(worst_perp);
  return r;
}

// --- criterion 2: redundancy is not enough -----------------------------------

CriterionResult criterion_grid_paradox() {
  CriterionResult r;
  for (int n : {1, 2, 3}) {
    const auto [rows, columns] = grid_partitions(n);
    const PairCoveringReport report = non_pair_covering(rows, columns);
    if (report.holds) {
      r.detail = "rows/columns unexpectedly non pair-covering at n = " + std::to_string(n);
      return r;
    }
    if (!verify_pair_counterexample(rows, columns, report)) {
      r.detail = "counterexample failed re-verification at n = " + std::to_string(n);
      return r;
    }
    const GridScenario s{n, Complex(std::sqrt(0.5), 0), Complex(std::sqrt(0.5), 0), 0.0};
    const SystemState state = build_grid_state(s);
    std::vector<Povm> row_povms, col_povms;
    for (int i = 1; i <= n; ++i) row_povms.push_back(row_povm(i, n));
    for (int j = 1; j <= n; ++j) col_povms.push_back(column_parity_povm(j, n));
    const double row_delta = redundancy_audit(row_povms, rows, state).overall_delta;
    const double col_delta = redundancy_audit(col_povms, columns, state).overall_delta;
    if (row_delta > 1e-10 || col_delta > 1e-10) {
      r.detail = "family not maximally redundant at n = " + std::to_string(n);
      return r;
    }
  }
  r.passed = true;
  r.detail = "pair-covering counterexamples sound for n = 1, 2, 3; both families delta = 0";
  return r;
}

// --- criterion 3: perfect-imprint consequence --------------------------------

CriterionResult criterion_lemma() {
  CriterionResult r;
  double worst = 0.0;
  int states = 0;
  for (int n : {2, 3}) {
    for (int k = 0; k < 10; ++k) {
      const double theta = 0.12 + 0.13 * k;
      const double phi = 0.4 * k;
      const GridScenario s{n, Complex(std::cos(theta), 0.0),
                           Complex(std::sin(theta) * std::cos(phi),
                                   std::sin(theta) * std::sin(phi)),
                           0.0};
      const StateVector psi = build_grid_vector(s);
      ++states;
      for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
          if (i == j) continue;
          const LemmaReport rep =
              verify_perfect_imprint_lemma(row_povm(i, n), row_povm(j, n), psi);
          if (!rep.preconditions_ok) {
            r.detail = "lemma preconditions failed on a noiseless grid";
            return r;
          }
          worst = std::max(worst, rep.max_residual());
        }
      }
    }
  }
  r.passed = worst <= 1e-8 && states >= 20;
  r.detail = std::to_string(states) + " states x 2 grid sizes, max residual " + fmt(worst);
  return r;
}

// --- criterion 4: pairwise constructive witness ------------------------------

CriterionResult criterion_pairwise_witness() {
  CriterionResult r;
  std::ostringstream detail;
  for (double p : {0.0, 0.02, 0.05, 0.1}) {
    const auto t0 = std::chrono::steady_clock::now();
    const PairwiseWitnessGridReport small = run_grid_pairwise_witness_check(2, p, 100, 1000 + int(p * 1000));
    const double small_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const PairwiseWitnessGridReport large = run_grid_pairwise_witness_check(3, p, 100, 2000 + int(p * 1000));
    if (!small.covering_holds || !large.covering_holds) {
      r.detail = "row families unexpectedly pair-cover each other";
      return r;
    }
    if (!small.sound || !large.sound) {
      r.detail = "witness residual " + fmt(std::max(small.witness_residual,
                                                    large.witness_residual)) +
                 " exceeds audited delta at p = " + fmt(p);
      return r;
    }
    if (small_seconds > 120.0) {
      r.detail = "n = 2 level exceeded the two-minute budget";
      return r;
    }
    detail << "p=" << fmt(p) << " delta=" << fmt(large.audited_delta)
           << " residual=" << fmt(large.witness_residual) << "; ";
  }
  r.passed = true;
  r.detail = detail.str();
  return r;
}

// --- criterion 5: tuple constructive witness on 12 sites ----------------------

CriterionResult criterion_tuple_witness() {
  CriterionResult r;
  const int n_sites = 12;
  const Partition f_part(n_sites, {{0, 1}, {2, 3}});
  const Partition g_part(n_sites, {{4, 5}, {6, 7}});
  // Interleaved family: one block straddles the other partitions' supports.
  const Partition z_part(n_sites, {{8, 9}, {10, 11}, {0, 4}});

  const TupleCoveringReport covering = non_tuple_covering({f_part, g_part, z_part});
  if (!covering.holds || !verify_tuple_witnesses({f_part, g_part, z_part}, covering)) {
    r.detail = "tuple covering witness missing or unsound";
    return r;
  }

  auto block_povm = [&](const std::vector<int>& block) {
    return repetition_record_povm(block);
  };

  std::vector<SystemState> states;
  for (int k = 0; k < 20; ++k) {
    const double theta = 0.1 + 0.07 * k;
    states.emplace_back(ghz_vector(n_sites, Complex(std::cos(theta), 0.0),
                                   Complex(std::sin(theta), 0.0)));
  }
  StateSet d_set;
  d_set.states = states;
  d_set.tag = "ghz_family";

  double audited = 0.0;
  auto audit_family = [&](const Partition& part) {
    std::vector<Povm> povms;
    for (const auto& block : part.blocks) povms.push_back(block_povm(block));
    for (const SystemState& state : states) {
      audited = std::max(audited, redundancy_audit(povms, part, state).overall_delta);
    }
  };
  audit_family(f_part);
  audit_family(g_part);
  audit_family(z_part);

  double worst_residual = 0.0;
  const std::vector<Partition> parts{f_part, g_part, z_part};
  for (const auto& [tuple, primed] : covering.witnesses) {
    std::vector<Povm> members, subs;
    for (size_t m = 0; m < parts.size(); ++m) {
      members.push_back(block_povm(parts[m].blocks[tuple[m]]));
      subs.push_back(block_povm(parts[m].blocks[primed[m]]));
    }
    const JmWitness witness = constructive_tuple_parent(subs);
    worst_residual =
        std::max(worst_residual, verify_jm_witness(members, witness, d_set).max_residual);
  }
  r.passed = worst_residual <= audited + 1e-9;
  r.detail = "audited delta " + fmt(audited) + ", witness residual " +
             fmt(worst_residual) + " over " + std::to_string(covering.witnesses.size()) +
             " tuples";
  return r;
}

// --- criterion 6: solver calibration ------------------------------------------

CriterionResult criterion_jm_solver() {
  CriterionResult r;
  FeasibilityOptions fast;
  fast.max_iters = 500;
  const FeasibilitySearchResult commuting =
      jm_feasibility_search({qubit_z_povm(0), qubit_z_povm(1)}, SiteSpace::qubits(2), fast);
  if (!commuting.feasible || commuting.residual > 1e-6) {
    r.detail = "commuting pair not certified within 500 iterations";
    return r;
  }

  FeasibilityOptions slow;
  slow.max_iters = 10000;
  const FeasibilitySearchResult xz =
      jm_feasibility_search({qubit_x_povm(0), qubit_z_povm(0)}, SiteSpace::qubits(1), slow);
  const double sweep = oracles::xz_bloch_sweep_lower_bound(0.02);
  r.passed = !xz.feasible && xz.residual >= 0.05 && sweep >= 0.05;
  r.detail = "commuting residual " + fmt(commuting.residual) + " in " +
             std::to_string(commuting.iterations) + " iters; X/Z plateau " +
             fmt(xz.residual) + ", sweep lower bound " + fmt(sweep);
  return r;
}

// --- criterion 7: deviation bound ---------------------------------------------

struct ChannelBoundOutcome {
  double max_deviation = 0.0;
  bool within = false;
};

ChannelBoundOutcome bound_for_random_channel(std::uint64_t seed) {
  const Channel ch = random_channel(2, std::vector<int>(9, 2), 2, seed);
  const ChoiState choi = choi_state(ch);
  BlanketOptions opt;
  opt.w_q = 8;
  opt.w_f = 1;
  opt.include_smaller_subsets = false;
  opt.random_bases_q = 1;
  opt.random_bases_f = 1;
  opt.f_samples = 1;
  opt.seed = seed;
  const BlanketResult blanket = find_markov_blanket(choi, opt);
  const auto trials = make_bound_trials(choi, blanket, 50, seed + 1);
  const BoundReport report = verify_deviation_bound(choi, blanket, trials);
  return {report.max_deviation, report.within_bound};
}

CriterionResult criterion_deviation_bound() {
  CriterionResult r;

  // Exact Markov structure: the classical copy channel.
  const Channel copy = classical_copy_channel(2, {0, 1}, {2, 3});
  const ChoiState copy_choi = choi_state(copy);
  BlanketOptions copy_opt;
  copy_opt.w_q = 2;
  copy_opt.w_f = 1;
  copy_opt.seed = 4;
  const BlanketResult copy_blanket = find_markov_blanket(copy_choi, copy_opt);
  const BoundReport copy_report = verify_deviation_bound(
      copy_choi, copy_blanket, make_bound_trials(copy_choi, copy_blanket, 50, 5));
  if (copy_report.max_deviation > 1e-8) {
    r.detail = "classical copy deviation " + fmt(copy_report.max_deviation);
    return r;
  }

  // Twenty seeded generic channels at d_R = 2, N = 9, w_q = 8, w_f = 1.
  const double delta = blanket_delta_bound(2, 1, 8);
  if (std::abs(delta - 0.8325546111576977) > 1e-12) {
    r.detail = "analytic bound formula mismatch";
    return r;
  }
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);

  std::vector<ChannelBoundOutcome> outcomes(seeds.size());
  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) outcomes[i] = bound_for_random_channel(seeds[i]);
  };
  auto half = std::async(std::launch::async, worker, 0, seeds.size() / 2);
  worker(seeds.size() / 2, seeds.size());
  half.get();

  double worst = 0.0;
  for (const auto& outcome : outcomes) {
    worst = std::max(worst, outcome.max_deviation);
    if (!outcome.within) {
      r.detail = "deviation " + fmt(outcome.max_deviation) + " exceeds the bound";
      return r;
    }
  }
  r.passed = worst <= std::min(1.0, delta);
  r.detail = "copy-channel max deviation " + fmt(copy_report.max_deviation) +
             "; generic channels max deviation " + fmt(worst) + " vs bound " + fmt(delta);
  return r;
}

// --- criterion 8: Pinsker inequality -------------------------------------------

CriterionResult criterion_pinsker() {
  CriterionResult r;
  Rng rng(271828);
  double margin = 1e9;
  for (int trial = 0; trial < 200; ++trial) {
    const DenseOperator rho(SiteSpace::qubits(2), random_density_matrix(4, rng));
    const auto [lhs, rhs] = pinsker_check(rho, {0}, {1});
    if (lhs > rhs + 1e-9) {
      r.detail = "violated on a random two-qubit state";
      return r;
    }
    margin = std::min(margin, rhs - lhs);
  }

  // Decomposition states of the criterion-7 channel family: conditional
  // (reference, fragment) states after measuring the blanket in the
  // computational basis.
  int decomposition_states = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Channel ch = random_channel(2, std::vector<int>(9, 2), 2, seed);
    const ChoiState choi = choi_state(ch);
    const std::vector<int> q{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> joint_q = choi.joint_sites_of_system(q);
    const Matrix basis = Matrix::Identity(256, 256);
    const auto comps =
        basis_measurement_conditionals(choi.rho, joint_q, basis, {0, 1});
    for (const auto& c : comps) {
      if (c.flagged_zero) continue;
      ++decomposition_states;
      const auto [lhs, rhs] = pinsker_check(c.conditional, {0}, {1});
      if (lhs > rhs + 1e-9) {
        r.detail = "violated on a decomposition state";
        return r;
      }
    }
  }
  r.passed = true;
  r.detail = "200 random states plus " + std::to_string(decomposition_states) +
             " decomposition states, min slack " + fmt(margin);
  return r;
}

// --- criterion 9: combinatorics oracle equivalence ------------------------------

CriterionResult criterion_covering_oracle() {
  CriterionResult r;
  const auto partitions = oracles::enumerate_partial_partitions(6, 3);
  long checked = 0;
  for (const Partition& f : partitions) {
    for (const Partition& g : partitions) {
      const bool predicate = non_pair_covering(f, g).holds;
      const bool oracle = oracles::pair_covering_bruteforce(f, g);
      ++checked;
      if (predicate != oracle) {
        r.detail = "mismatch on a pair after " + std::to_string(checked) + " checks";
        return r;
      }
    }
  }
  r.passed = true;
  r.detail = std::to_string(checked) + " partition pairs match the brute-force oracle";
  return r;
}

// --- criterion 10: determinism ---------------------------------------------------

CriterionResult criterion_determinism() {
  CriterionResult r;
  if (g_cli_path.empty()) {
    r.detail = "no --cli path provided";
    return r;
  }
  const fs::path work = fs::temp_directory_path() / "qdarwin_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path config = work / "experiment.cfg";
  {
    std::ofstream out(config);
    out << "[scenario]\n"
           "type = grid\n"
           "n = 2\n"
           "alpha = (0.5477225575051661, 0.0)\n"
           "beta = (0.8366600265340756, 0.0)\n"
           "noise = 0.02\n\n"
           "[run]\n"
           "operations = audit, covering, jm, blanket\n"
           "seed = 42\n\n"
           "[jm]\n"
           "members = shared_xz\n"
           "max_iters = 2000\n\n"
           "[blanket]\n"
           "w_q = 2\n"
           "w_f = 1\n";
  }

  auto run_once = [&](const std::string& out_dir) {
    const std::string command = "\"" + g_cli_path + "\" run \"" + config.string() +
                                "\" --out-dir \"" + out_dir + "\" > /dev/null 2>&1";
    return std::system(command.c_str());
  };
  const std::string dir_a = (work / "a").string(), dir_b = (work / "b").string();
  if (run_once(dir_a) != 0 || run_once(dir_b) != 0) {
    r.detail = "CLI run failed";
    return r;
  }

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    names.push_back(entry.path().filename().string());
  }
  if (names.empty()) {
    r.detail = "no report files produced";
    return r;
  }
  std::sort(names.begin(), names.end());
  for (const std::string& name : names) {
    if (slurp(fs::path(dir_a) / name) != slurp(fs::path(dir_b) / name)) {
      r.detail = "byte mismatch in " + name;
      return r;
    }
  }
  r.passed = true;
  r.detail = std::to_string(names.size()) + " report files byte-identical across runs";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
  }

  const std::vector<std::pair<std::string, CriterionFn>> criteria{
      {"grid reproduction (rows and columns perfectly redundant)",
       criterion_grid_reproduction},
      {"grid paradox (redundancy without non pair-covering)", criterion_grid_paradox},
      {"perfect-imprint lemma residuals", criterion_lemma},
      {"pairwise witness soundness on noisy grids", criterion_pairwise_witness},
      {"tuple witness soundness on 12 sites", criterion_tuple_witness},
      {"joint-measurability solver calibration", criterion_jm_solver},
      {"blanket deviation bound", criterion_deviation_bound},
      {"Pinsker inequality", criterion_pinsker},
      {"covering oracle equivalence", criterion_covering_oracle},
      {"report determinism", criterion_determinism},
  };

  bool all_passed = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && only != id) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (result.passed ? "PASS" : "FAIL") << " criterion " << id << " ("
              << criteria[i].first << ") [" << fmt(seconds) << "s]: " << result.detail
              << "\n";
    all_passed = all_passed && result.passed;
  }
  return all_passed ? 0 : 1;
}
