#include "qduff/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qduff/errors.hpp"

namespace qduff {

namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* type) {
  if (!node.IsScalar()) throw ConfigError(key + ": expected " + type);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": expected " + type + ", got '" + node.Scalar() + "'");
  }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& key, const char* type) {
  std::vector<T> out;
  // a bare scalar is accepted as a one-element list
  if (node.IsScalar()) {
    out.push_back(scalar<T>(node, key, type));
    return out;
  }
  if (!node.IsSequence()) throw ConfigError(key + ": expected a list of " + type);
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar<T>(node[i], key + "[" + std::to_string(i) + "]", type));
  }
  return out;
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;
using Section = std::map<std::string, Setter>;

template <typename T>
Setter set(T& field, const char* type) {
  return [&field, type](const YAML::Node& n, const std::string& key) { field = scalar<T>(n, key, type); };
}

template <typename T>
Setter set_list(std::vector<T>& field, const char* type) {
  return [&field, type](const YAML::Node& n, const std::string& key) { field = list<T>(n, key, type); };
}

void check(bool ok, const std::string& key, const char* constraint) {
  if (!ok) throw ConfigError(key + ": " + constraint);
}

}  // namespace

std::vector<ControlStrategy> ExperimentConfig::strategy_list() const {
  std::vector<ControlStrategy> out;
  for (const auto& label : strategies) out.push_back(configured_strategy(*this, label));
  return out;
}

ControlStrategy configured_strategy(const ExperimentConfig& config, std::string_view label) {
  ControlStrategy s = parse_strategy(label);
  if (std::holds_alternative<AdaptiveParallel>(s.variant)) s.grid_angles = config.grid_angles_parallel;
  if (std::holds_alternative<AdaptivePerpendicular>(s.variant)) {
    s.grid_angles = config.grid_angles_perpendicular;
  }
  s.update_interval = config.update_interval;
  return s;
}

std::vector<double> ExperimentConfig::snapshot_times() const {
  if (!snapshots.empty()) return snapshots;
  std::vector<double> out;
  if (snapshot_every <= 0.0) return out;
  const long count = static_cast<long>(std::floor(t_end / snapshot_every + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(k * snapshot_every);
  return out;
}

void ExperimentConfig::validate() const {
  params.validate();
  check(!betas.empty(), "sweep.beta", "must list at least one value");
  for (double b : betas) check(b > 0.0, "sweep.beta", "values must be > 0");
  check(!strategies.empty(), "sweep.strategy", "must list at least one strategy");
  for (const auto& s : strategies) {
    try {
      configured_strategy(*this, s).validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("sweep.strategy: ") + e.what());
    }
  }
  check(seeds >= 1, "sweep.seeds", "must be >= 1");
  check(t_end > 0.0, "sweep.t_end", "must be > 0");
  check(update_interval >= 1, "control.update_interval", "must be >= 1");
  check(grid_angles_parallel >= 2, "control.grid_angles_parallel", "must be >= 2");
  check(grid_angles_perpendicular >= 2, "control.grid_angles_perpendicular", "must be >= 2");
  check(peak_floor >= 0.0 && peak_floor < 1.0, "control.peak_floor", "must lie in [0, 1)");
  check(reset_period >= 0.0, "lyapunov.reset_period", "must be >= 0");
  check(!output_dir.empty(), "output.dir", "must not be empty");
  check(snapshot_every >= 0.0, "output.snapshot_every", "must be >= 0");
  for (double t : snapshots) check(t >= 0.0, "output.snapshots", "times must be >= 0");
  check(series_stride >= 0, "output.series_stride", "must be >= 0");
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: cannot parse: ") + e.what());
  }

  ExperimentConfig c;
  std::string scheme;
  double signal_gain = -1.0;
  int workers = 0;

  std::map<std::string, Section> sections;
  sections["model"] = {{"beta", set(c.params.beta, "a number")},
                       {"Gamma", set(c.params.Gamma, "a number")},
                       {"g", set(c.params.g, "a number")},
                       {"Omega", set(c.params.Omega, "a number")}};
  sections["integration"] = {{"N", set(c.params.N, "an integer")},
                             {"dt", set(c.params.dt, "a number")},
                             {"scheme", set(scheme, "a string")},
                             {"signal_gain", set(signal_gain, "a number")}};
  sections["control"] = {{"update_interval", set(c.update_interval, "an integer")},
                         {"grid_angles_parallel", set(c.grid_angles_parallel, "an integer")},
                         {"grid_angles_perpendicular", set(c.grid_angles_perpendicular, "an integer")},
                         {"peak_floor", set(c.peak_floor, "a number")}};
  sections["lyapunov"] = {{"d0", set(c.params.d0, "a number")},
                          {"reset_period", set(c.reset_period, "a number")},
                          {"transient", set(c.transient, "a number")}};
  sections["sweep"] = {{"beta", set_list(c.betas, "numbers")},
                       {"strategy", set_list(c.strategies, "strings")},
                       {"seeds", set(c.seeds, "an integer")},
                       {"master_seed", set(c.master_seed, "an unsigned integer")},
                       {"t_end", set(c.t_end, "a number")},
                       {"workers", set(workers, "an integer")}};
  sections["output"] = {{"dir", set(c.output_dir, "a string")},
                        {"snapshot_every", set(c.snapshot_every, "a number")},
                        {"snapshots", set_list(c.snapshots, "numbers")},
                        {"series_stride", set(c.series_stride, "an integer")}};

  bool beta_in_sweep = false;
  if (root.IsDefined() && !root.IsNull()) {
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping of sections");
    for (const auto& sec : root) {
      const auto name = sec.first.as<std::string>();
      const auto it = sections.find(name);
      if (it == sections.end()) throw ConfigError("config: unknown section '" + name + "'");
      if (sec.second.IsNull()) continue;
      if (!sec.second.IsMap()) throw ConfigError(name + ": expected a mapping of keys");
      for (const auto& kv : sec.second) {
        const auto key = kv.first.as<std::string>();
        const auto setter = it->second.find(key);
        if (setter == it->second.end()) throw ConfigError(name + "." + key + ": unknown key");
        setter->second(kv.second, name + "." + key);
        if (name == "sweep" && key == "beta") beta_in_sweep = true;
      }
    }
  }

  if (!scheme.empty()) {
    try {
      c.params.scheme = parse_scheme(scheme);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("integration.scheme: ") + e.what());
    }
  }
  if (signal_gain >= 0.0) c.params.signal_gain = signal_gain;
  check(workers >= 0, "sweep.workers", "must be >= 0");
  c.workers = static_cast<unsigned>(workers);
  // a single model.beta stands in for the sweep list when no list is given
  if (!beta_in_sweep) c.betas = {c.params.beta};

  try {
    c.params.validate();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    const std::string key = what.substr(0, colon);
    static const std::map<std::string, std::string> where = {
        {"beta", "model."},      {"Gamma", "model."},   {"g", "model."},
        {"Omega", "model."},     {"N", "integration."}, {"dt", "integration."},
        {"d0", "lyapunov."}};
    const auto w = where.find(key);
    throw ConfigError(w == where.end() ? what : w->second + what);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t job_index) {
  std::uint64_t z = master_seed + (job_index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace qduff
