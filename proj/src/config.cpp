#include "qdarwin/config.hpp"

#include "qdarwin/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace qdarwin {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string current;
  int paren_depth = 0;
  for (char c : value) {
    if (c == '(') ++paren_depth;
    if (c == ')') --paren_depth;
    if (c == ',' && paren_depth == 0) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  const std::string last = trim(current);
  if (!last.empty()) parts.push_back(last);
  return parts;
}

double parse_double(const std::string& value, const std::string& context) {
  try {
    size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number '" + value + "' for " + context);
  }
}

long parse_int(const std::string& value, const std::string& context) {
  try {
    size_t consumed = 0;
    const long v = std::stol(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse integer '" + value + "' for " + context);
  }
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

ConfigFile ConfigFile::parse_text(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config: unterminated section header at line " +
                          std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("config: empty section name at line " + std::to_string(line_no));
      }
      cfg.sections_[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no));
    }
    if (section.empty()) {
      throw ConfigError("config: key outside any section at line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key at line " + std::to_string(line_no));
    }
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key)) {
    throw ConfigError("config: missing [" + section + "] " + key);
  }
  return s->second.at(key);
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

long ConfigFile::get_int(const std::string& section, const std::string& key) const {
  return parse_int(get_string(section, key), "[" + section + "] " + key);
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                            long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get_string(section, key), "[" + section + "] " + key);
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

Complex ConfigFile::get_complex(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  const std::string context = "[" + section + "] " + key;
  if (raw.empty() || raw.front() != '(' || raw.back() != ')') {
    throw ConfigError("config: complex value must look like (re, im) for " + context);
  }
  const auto parts = split_list(raw.substr(1, raw.size() - 2));
  if (parts.size() != 2) {
    throw ConfigError("config: complex value must have two components for " + context);
  }
  return Complex(parse_double(parts[0], context), parse_double(parts[1], context));
}

std::vector<int> ConfigFile::get_int_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<int> out;
  for (const std::string& part : split_list(get_string(section, key))) {
    out.push_back(static_cast<int>(parse_int(part, "[" + section + "] " + key)));
  }
  return out;
}

std::vector<std::string> ConfigFile::get_string_list(const std::string& section,
                                                     const std::string& key) const {
  return split_list(get_string(section, key));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(ConfigFile::parse_file(path));
}

ExperimentConfig experiment_config_from(const ConfigFile& file) {
  ExperimentConfig cfg;

  const std::string type = file.get_string("scenario", "type");
  if (type == "grid") {
    cfg.scenario = ScenarioType::grid;
    cfg.grid_n = static_cast<int>(file.get_int("scenario", "n"));
    if (cfg.grid_n < 1) throw ConfigError("config: grid n must be >= 1");
    cfg.alpha = file.has("scenario", "alpha") ? file.get_complex("scenario", "alpha")
                                              : Complex(1.0, 0.0);
    cfg.beta = file.has("scenario", "beta") ? file.get_complex("scenario", "beta")
                                            : Complex(0.0, 0.0);
    cfg.noise_p = file.get_double_or("scenario", "noise", 0.0);
    const double norm2 = std::norm(cfg.alpha) + std::norm(cfg.beta);
    if (std::abs(norm2 - 1.0) > 1e-6) {
      throw ConfigError("config: |alpha|^2 + |beta|^2 must equal 1");
    }
    if (cfg.noise_p < 0.0 || cfg.noise_p > 1.0) {
      throw ConfigError("config: noise must lie in [0, 1]");
    }
  } else if (type == "classical_copy") {
    cfg.scenario = ScenarioType::classical_copy;
    cfg.copy_dim = static_cast<int>(file.get_int_or("scenario", "d", 2));
    cfg.copy_sites = file.get_int_list("scenario", "copy_sites");
    cfg.filler_sites = file.has("scenario", "filler_sites")
                           ? file.get_int_list("scenario", "filler_sites")
                           : std::vector<int>{};
  } else if (type == "random_channel") {
    cfg.scenario = ScenarioType::random_channel;
    cfg.d_in = static_cast<int>(file.get_int_or("scenario", "d_in", 2));
    cfg.n_sites = static_cast<int>(file.get_int("scenario", "n_sites"));
    cfg.rank = static_cast<int>(file.get_int_or("scenario", "rank", 1));
    cfg.channel_seed = static_cast<std::uint64_t>(
        file.get_int_or("scenario", "channel_seed", 0));
  } else if (type == "channel_file") {
    cfg.scenario = ScenarioType::channel_file;
    cfg.channel_path = file.get_string("scenario", "file");
  } else {
    throw ConfigError("config: unknown scenario type '" + type + "'");
  }

  const auto op_names = file.get_string_list("run", "operations");
  if (op_names.empty()) throw ConfigError("config: no operations requested");
  for (const std::string& name : op_names) {
    if (name == "audit") cfg.operations.push_back(Operation::audit);
    else if (name == "covering") cfg.operations.push_back(Operation::covering);
    else if (name == "jm") cfg.operations.push_back(Operation::jm);
    else if (name == "blanket") cfg.operations.push_back(Operation::blanket);
    else if (name == "bound") cfg.operations.push_back(Operation::bound);
    else if (name == "lemma") cfg.operations.push_back(Operation::lemma);
    else if (name == "chain") cfg.operations.push_back(Operation::chain);
    else throw ConfigError("config: unknown operation '" + name + "'");
  }

  cfg.seed = static_cast<std::uint64_t>(file.get_int_or("run", "seed", 0));
  cfg.out_dir = file.get_string_or("run", "out_dir", "out");
  cfg.tol = file.get_double_or("run", "tol", 1e-9);

  const std::string mode = file.get_string_or("covering", "mode", "maximal");
  if (mode == "maximal") cfg.covering_maximal = true;
  else if (mode == "unprimed_only") cfg.covering_maximal = false;
  else throw ConfigError("config: unknown covering mode '" + mode + "'");

  cfg.jm_method = file.get_string_or("jm", "method", "feasibility");
  if (cfg.jm_method != "feasibility" && cfg.jm_method != "constructive") {
    throw ConfigError("config: unknown jm method '" + cfg.jm_method + "'");
  }
  cfg.jm_members = file.get_string_or("jm", "members", "shared_xz");
  cfg.jm_tol = file.get_double_or("jm", "tol", 1e-8);
  cfg.jm_max_iters = file.get_int_or("jm", "max_iters", 10000);

  cfg.w_q = static_cast<int>(file.get_int_or("blanket", "w_q", 1));
  cfg.w_f = static_cast<int>(file.get_int_or("blanket", "w_f", 1));
  const std::string subsets = file.get_string_or("blanket", "subsets", "all");
  if (subsets == "all") cfg.blanket_all_sizes = true;
  else if (subsets == "exact") cfg.blanket_all_sizes = false;
  else throw ConfigError("config: blanket subsets must be 'all' or 'exact'");
  cfg.f_samples = static_cast<int>(file.get_int_or("blanket", "f_samples", 4));
  cfg.random_bases_q = static_cast<int>(file.get_int_or("blanket", "random_bases_q", 2));
  cfg.random_bases_f = static_cast<int>(file.get_int_or("blanket", "random_bases_f", 2));
  cfg.bound_trials = static_cast<int>(file.get_int_or("bound", "trials", 50));

  return cfg;
}

}  // namespace qdarwin
