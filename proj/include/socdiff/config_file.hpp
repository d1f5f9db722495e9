#pragma once

// Flat key=value configuration files with dotted section keys, e.g.
//
//   grid.n = 255
//   noise.N = 1
//   noise.mu = 0.2
//
// '#' starts a comment, blank lines are skipped, every key is optional
// (defaults below), unknown or malformed keys are rejected with the
// offending key path. parse_config returns the simulation config, the
// per-experiment parameters, and the fully resolved key list used for
// the reproducibility manifest.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "socdiff/solver.hpp"

namespace socdiff {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what)
      : std::runtime_error("config: " + what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw config_error(key + ": expected a number, got '" + raw + "'");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw config_error(key + ": expected an integer, got '" + raw + "'");
  }
  return v;
}

inline std::uint64_t parse_uint64(const std::string& key,
                                  const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  if (!raw.empty() && raw[0] == '-') {
    throw config_error(key + ": expected a non-negative integer, got '" + raw +
                       "'");
  }
  const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw config_error(key + ": expected a non-negative integer, got '" + raw +
                       "'");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(raw);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace detail

/// Raw key -> value store with consumed-key tracking, so that anything the
/// builder did not ask for is reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig from_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw config_error("line " + std::to_string(line_no) +
                           ": expected key=value, got '" + line + "'");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) {
        throw config_error("line " + std::to_string(line_no) + ": empty key");
      }
      if (!cfg.kv_.emplace(key, value).second) {
        throw config_error(key + ": duplicate key");
      }
    }
    return cfg;
  }

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return from_text(os.str());
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : detail::parse_double(key, it->second);
  }

  long long get_int(const std::string& key, long long dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : detail::parse_int(key, it->second);
  }

  std::uint64_t get_uint64(const std::string& key, std::uint64_t dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : detail::parse_uint64(key, it->second);
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<double> out;
    for (const auto& part : detail::split_list(it->second)) {
      out.push_back(detail::parse_double(key, part));
    }
    return out;
  }

  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> dflt) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<long long> out;
    for (const auto& part : detail::split_list(it->second)) {
      out.push_back(detail::parse_int(key, part));
    }
    return out;
  }

  void reject_unknown_keys() const {
    for (const auto& [key, value] : kv_) {
      if (used_.count(key) == 0) {
        throw config_error("unknown key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

struct ExperimentParams {
  std::uint64_t simulate_path_index = 0;
  int extinction_paths = 1000;
  std::vector<double> extinction_t_grid = {0.2, 0.4, 0.8};
  std::string extinction_gamma = "continuum";  // or "discrete"
  std::vector<double> bounds_t_grid = {0.2, 0.4, 0.8, 1.6};
  std::vector<Eigen::Index> gamma_n_values = {255, 511, 1023};
  std::string study_kind = "none";  // lambda | mesh | contraction
  std::vector<double> study_lambda_ladder = {0.2, 0.1, 0.05, 0.025};
  std::vector<Eigen::Index> study_n_ladder = {63, 127, 255};
  std::uint64_t study_pair_seed = 7;
};

struct ParsedConfig {
  SimulationConfig sim;
  ExperimentParams exp;
  std::uint64_t seed = 0;
  // every key with its resolved value, sorted; the manifest hashes this
  std::vector<std::pair<std::string, std::string>> resolved;
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

template <class Int>
std::string join_ints(const std::vector<Int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace detail

inline ParsedConfig build_config(const KeyValueConfig& kv) {
  ParsedConfig pc;
  SimulationConfig& sim = pc.sim;
  ExperimentParams& exp = pc.exp;

  const long long n = kv.get_int("grid.n", 255);
  if (n < 1) throw config_error("grid.n: must be >= 1, got " + std::to_string(n));
  sim.grid = make_grid<double>(n);

  sim.dt = kv.get_double("dt", 1e-4);
  if (!(sim.dt > 0)) throw config_error("dt: must be > 0");
  sim.t_max = kv.get_double("t_max", 1.0);
  if (!(sim.t_max >= sim.dt)) throw config_error("t_max: must be >= dt");
  sim.x_c = kv.get_double("x_c", 0.0);
  sim.lambda = kv.get_double("lambda", 0.01);
  if (!(sim.lambda > 0)) throw config_error("lambda: must be > 0");

  if (kv.has("extinction_epsilon")) {
    const double eps = kv.get_double("extinction_epsilon", 0.0);
    if (!(eps > 0)) throw config_error("extinction_epsilon: must be > 0");
    sim.extinction_epsilon = eps;
  } else {
    kv.get_double("extinction_epsilon", 0.0);  // mark as known
  }

  const long long sample_every = kv.get_int("sample_every", 1);
  if (sample_every < 1) throw config_error("sample_every: must be >= 1");
  sim.sample_every = static_cast<int>(sample_every);

  const long long substeps = kv.get_int("brownian_substeps", 1);
  if (substeps < 1) throw config_error("brownian_substeps: must be >= 1");
  sim.brownian_substeps = static_cast<int>(substeps);

  pc.seed = kv.get_uint64("seed", 0);

  // nonlinearity
  const std::string psi_kind = kv.get_string("nonlinearity.psi_tilde", "linear");
  const double rho = kv.get_double("nonlinearity.rho", 1.0);
  const double slope = kv.get_double("nonlinearity.slope", 1.0);
  const double alpha1 = kv.get_double("nonlinearity.alpha1", 1.0);
  const double alpha2 = kv.get_double("nonlinearity.alpha2", 1.0);
  const double c = kv.get_double("nonlinearity.c", 0.0);
  if (psi_kind == "linear") {
    sim.nonlinearity = NonlinearitySpec<double>::linear(rho, slope);
  } else if (psi_kind == "piecewise_linear") {
    sim.nonlinearity =
        NonlinearitySpec<double>::piecewise_linear(rho, alpha1, alpha2, c);
  } else {
    throw config_error(
        "nonlinearity.psi_tilde: expected 'linear' or 'piecewise_linear', "
        "got '" +
        psi_kind + "'");
  }
  {
    const auto rep = validate_hypothesis(sim.nonlinearity);
    if (!rep.valid) throw config_error("nonlinearity: " + rep.summary());
  }

  // noise
  const long long n_modes = kv.get_int("noise.N", 0);
  if (n_modes < 0) throw config_error("noise.N: must be >= 0");
  sim.noise.n_modes = n_modes;
  const std::vector<double> mu = kv.get_double_list("noise.mu", {});
  if (static_cast<long long>(mu.size()) != n_modes) {
    throw config_error("noise.mu: expected " + std::to_string(n_modes) +
                       " amplitudes for noise.N, got " +
                       std::to_string(mu.size()));
  }
  sim.noise.mu.resize(n_modes);
  for (long long k = 0; k < n_modes; ++k) {
    if (mu[static_cast<std::size_t>(k)] < 0) {
      throw config_error("noise.mu: amplitudes must be >= 0");
    }
    sim.noise.mu[k] = mu[static_cast<std::size_t>(k)];
  }
  sim.noise.master_seed = pc.seed;

  // initial condition
  const std::string init_kind = kv.get_string("initial.kind", "sine");
  sim.initial.amplitude = kv.get_double("initial.amplitude", 0.5);
  const long long mode = kv.get_int("initial.mode", 1);
  if (mode < 1) throw config_error("initial.mode: must be >= 1");
  sim.initial.mode = static_cast<int>(mode);
  sim.initial.value = kv.get_double("initial.value", 0.0);
  sim.initial.width = kv.get_double("initial.width", std::numbers::pi / 4.0);
  if (!(sim.initial.width > 0)) throw config_error("initial.width: must be > 0");
  const std::vector<double> init_values = kv.get_double_list("initial.values", {});
  if (init_kind == "sine") {
    sim.initial.kind = InitialKind::SineMode;
  } else if (init_kind == "constant") {
    sim.initial.kind = InitialKind::Constant;
  } else if (init_kind == "bump") {
    sim.initial.kind = InitialKind::Bump;
  } else if (init_kind == "values") {
    sim.initial.kind = InitialKind::NodeValues;
    if (static_cast<long long>(init_values.size()) != n) {
      throw config_error("initial.values: expected grid.n = " +
                         std::to_string(n) + " values, got " +
                         std::to_string(init_values.size()));
    }
    sim.initial.values.resize(static_cast<Eigen::Index>(init_values.size()));
    for (std::size_t i = 0; i < init_values.size(); ++i) {
      sim.initial.values[static_cast<Eigen::Index>(i)] = init_values[i];
    }
  } else {
    throw config_error(
        "initial.kind: expected sine|constant|bump|values, got '" + init_kind +
        "'");
  }

  // experiment parameters
  const long long path_index = kv.get_int("simulate.path_index", 0);
  if (path_index < 0) throw config_error("simulate.path_index: must be >= 0");
  exp.simulate_path_index = static_cast<std::uint64_t>(path_index);

  const long long paths = kv.get_int("extinction.paths", 1000);
  if (paths < 1) throw config_error("extinction.paths: must be >= 1");
  exp.extinction_paths = static_cast<int>(paths);
  exp.extinction_t_grid =
      kv.get_double_list("extinction.t_grid", exp.extinction_t_grid);
  for (double t : exp.extinction_t_grid) {
    if (!(t > 0) || t > sim.t_max) {
      throw config_error("extinction.t_grid: probe times must lie in (0, t_max]");
    }
  }
  exp.extinction_gamma = kv.get_string("extinction.gamma", "continuum");
  if (exp.extinction_gamma != "continuum" && exp.extinction_gamma != "discrete") {
    throw config_error("extinction.gamma: expected 'continuum' or 'discrete'");
  }

  exp.bounds_t_grid = kv.get_double_list("bounds.t_grid", exp.bounds_t_grid);
  for (double t : exp.bounds_t_grid) {
    if (!(t > 0)) throw config_error("bounds.t_grid: probe times must be > 0");
  }

  const auto gamma_ns = kv.get_int_list("gamma.n_values", {255, 511, 1023});
  exp.gamma_n_values.clear();
  for (long long gn : gamma_ns) {
    if (gn < 1) throw config_error("gamma.n_values: entries must be >= 1");
    exp.gamma_n_values.push_back(gn);
  }

  exp.study_kind = kv.get_string("study.kind", "none");
  if (exp.study_kind != "none" && exp.study_kind != "lambda" &&
      exp.study_kind != "mesh" && exp.study_kind != "contraction") {
    throw config_error("study.kind: expected lambda|mesh|contraction");
  }
  exp.study_lambda_ladder =
      kv.get_double_list("study.lambda_ladder", exp.study_lambda_ladder);
  const auto study_ns = kv.get_int_list("study.n_ladder", {63, 127, 255});
  exp.study_n_ladder.clear();
  for (long long sn : study_ns) {
    if (sn < 1) throw config_error("study.n_ladder: entries must be >= 1");
    exp.study_n_ladder.push_back(sn);
  }
  exp.study_pair_seed = kv.get_uint64("study.pair_seed", 7);

  kv.reject_unknown_keys();

  // resolved key list, sorted, defaults included
  using detail::format_double;
  std::map<std::string, std::string> r;
  r["grid.n"] = std::to_string(n);
  r["dt"] = format_double(sim.dt);
  r["t_max"] = format_double(sim.t_max);
  r["x_c"] = format_double(sim.x_c);
  r["lambda"] = format_double(sim.lambda);
  r["extinction_epsilon"] = sim.extinction_epsilon
                                ? format_double(*sim.extinction_epsilon)
                                : std::string("auto");
  r["sample_every"] = std::to_string(sim.sample_every);
  r["brownian_substeps"] = std::to_string(sim.brownian_substeps);
  r["seed"] = std::to_string(pc.seed);
  r["nonlinearity.psi_tilde"] = psi_kind;
  r["nonlinearity.rho"] = format_double(rho);
  r["nonlinearity.slope"] = format_double(slope);
  r["nonlinearity.alpha1"] = format_double(alpha1);
  r["nonlinearity.alpha2"] = format_double(alpha2);
  r["nonlinearity.c"] = format_double(c);
  r["noise.N"] = std::to_string(n_modes);
  r["noise.mu"] = detail::join_doubles(mu);
  r["initial.kind"] = init_kind;
  r["initial.amplitude"] = format_double(sim.initial.amplitude);
  r["initial.mode"] = std::to_string(sim.initial.mode);
  r["initial.value"] = format_double(sim.initial.value);
  r["initial.width"] = format_double(sim.initial.width);
  r["initial.values"] = detail::join_doubles(init_values);
  r["simulate.path_index"] = std::to_string(exp.simulate_path_index);
  r["extinction.paths"] = std::to_string(exp.extinction_paths);
  r["extinction.t_grid"] = detail::join_doubles(exp.extinction_t_grid);
  r["extinction.gamma"] = exp.extinction_gamma;
  r["bounds.t_grid"] = detail::join_doubles(exp.bounds_t_grid);
  r["gamma.n_values"] = detail::join_ints(
      std::vector<long long>(gamma_ns.begin(), gamma_ns.end()));
  r["study.kind"] = exp.study_kind;
  r["study.lambda_ladder"] = detail::join_doubles(exp.study_lambda_ladder);
  r["study.n_ladder"] =
      detail::join_ints(std::vector<long long>(study_ns.begin(), study_ns.end()));
  r["study.pair_seed"] = std::to_string(exp.study_pair_seed);
  pc.resolved.assign(r.begin(), r.end());
  return pc;
}

inline ParsedConfig parse_config_text(const std::string& text) {
  return build_config(KeyValueConfig::from_text(text));
}

inline ParsedConfig parse_config(const std::string& path) {
  return build_config(KeyValueConfig::from_file(path));
}

/// Applies a command-line seed override, keeping the resolved list (and
/// with it the manifest checksum) consistent with what actually runs.
inline void override_seed(ParsedConfig& pc, std::uint64_t seed) {
  pc.seed = seed;
  pc.sim.noise.master_seed = seed;
  for (auto& [key, value] : pc.resolved) {
    if (key == "seed") value = std::to_string(seed);
  }
}

}  // namespace socdiff
