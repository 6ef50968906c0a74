#pragma once

#include "qdarwin/tensor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qdarwin {

/// Sectioned key = value experiment file. Numerics parse as float64; complex
/// values as "(re, im)" pairs; lists are comma separated.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  long get_int(const std::string& section, const std::string& key) const;
  long get_int_or(const std::string& section, const std::string& key, long fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  Complex get_complex(const std::string& section, const std::string& key) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class ScenarioType { grid, classical_copy, random_channel, channel_file };

enum class Operation { audit, covering, jm, blanket, bound, lemma, chain };

struct ExperimentConfig {
  ScenarioType scenario = ScenarioType::grid;

  // grid
  int grid_n = 2;
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};
  double noise_p = 0.0;

  // classical_copy
  int copy_dim = 2;
  std::vector<int> copy_sites;
  std::vector<int> filler_sites;

  // random_channel
  int d_in = 2;
  int n_sites = 4;
  int rank = 1;
  std::uint64_t channel_seed = 0;

  // channel_file
  std::string channel_path;

  std::vector<Operation> operations;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  double tol = 1e-9;

  // covering
  bool covering_maximal = true;

  // jm
  std::string jm_method = "feasibility";  // feasibility | constructive
  std::string jm_members = "shared_xz";   // shared_xz | file:<path>
  double jm_tol = 1e-8;
  long jm_max_iters = 10000;

  // blanket / bound
  int w_q = 1;
  int w_f = 1;
  bool blanket_all_sizes = true;
  int f_samples = 4;
  int random_bases_q = 2;
  int random_bases_f = 2;
  int bound_trials = 50;
};

/// Parses and validates a full experiment configuration; throws ConfigError
/// on any malformed or inconsistent input.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from(const ConfigFile& file);

}  // namespace qdarwin
