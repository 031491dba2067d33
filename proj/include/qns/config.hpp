#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "qns/integrator.hpp"

namespace qns {

struct OutputSpec {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool snapshots = false;
};

struct ConfigFile {
  RunConfig run;
  OutputSpec output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class IniDocument {
 public:
  explicit IniDocument(std::istream& in) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ValidationError("config line " + std::to_string(lineno) +
                                ": malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        sections_.insert(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": expected key = value, got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      if (section.empty())
        throw ValidationError("config line " + std::to_string(lineno) + ": key '" + key +
                              "' appears before any [section]");
      values_[section + "." + key] = value;
    }
  }

  bool has(const std::string& full_key) const { return values_.count(full_key) > 0; }

  std::string get_string(const std::string& full_key, const std::string& fallback) {
    consumed_.insert(full_key);
    auto it = values_.find(full_key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& full_key, double fallback) {
    consumed_.insert(full_key);
    auto it = values_.find(full_key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + full_key + "': '" + it->second +
                            "' is not a number");
    }
  }

  long get_int(const std::string& full_key, long fallback) {
    consumed_.insert(full_key);
    auto it = values_.find(full_key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + full_key + "': '" + it->second +
                            "' is not an integer");
    }
  }

  /// Error out on any key that was never consumed (typos, unknown options).
  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key))
        throw ValidationError("config key '" + key + "' is not recognized");
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> sections_;
  std::set<std::string> consumed_;
};

}  // namespace detail

inline ConfigFile parse_config_stream(std::istream& in) {
  detail::IniDocument doc(in);
  ConfigFile cfg;
  RunConfig& run = cfg.run;

  run.grid.dim = static_cast<int>(doc.get_int("grid.dim", run.grid.dim));
  run.grid.points = static_cast<int>(doc.get_int("grid.points", run.grid.points));
  run.grid.length = doc.get_double("grid.length", run.grid.length);

  PhysParams& p = run.physics;
  p.gamma = doc.get_double("physics.gamma", p.gamma);
  p.nu = doc.get_double("physics.nu", p.nu);
  p.eps = doc.get_double("physics.eps", p.eps);
  p.cold_c = doc.get_double("physics.cold_c", p.cold_c);
  p.cold_k = doc.get_double("physics.cold_k", p.cold_k);
  p.delta = doc.get_double("physics.delta", p.delta);
  p.n_floor = doc.get_double("physics.n_floor", p.n_floor);

  const std::string form = doc.get_string("run.formulation", "eq2");
  if (form == "eq2")
    run.formulation = SystemForm::eq2;
  else if (form == "eqw")
    run.formulation = SystemForm::eqw;
  else if (form == "eql")
    run.formulation = SystemForm::eql;
  else
    throw ValidationError("config key 'run.formulation': expected eq2, eqw or eql, got '" +
                          form + "'");
  run.final_time = doc.get_double("run.T", run.final_time);
  run.dt = doc.get_double("run.dt", run.dt);
  run.cfl_safety = doc.get_double("run.cfl", run.cfl_safety);
  run.galerkin_cap = static_cast<int>(doc.get_int("run.galerkin_N", run.galerkin_cap));
  run.cadence = static_cast<int>(doc.get_int("run.cadence", run.cadence));
  const std::string pos = doc.get_string("run.positivity_mode", "strict");
  if (pos == "strict")
    run.positivity = PositivityMode::strict;
  else if (pos == "clamp")
    run.positivity = PositivityMode::clamp;
  else
    throw ValidationError("config key 'run.positivity_mode': expected strict or clamp, got '" +
                          pos + "'");
  run.initial.seed = static_cast<unsigned long>(doc.get_int("run.seed", 1));

  ProfileSpec& init = run.initial;
  init.name = doc.get_string("initial.profile", init.name);
  init.n_base = doc.get_double("initial.n_base", init.n_base);
  init.n_amp = doc.get_double("initial.n_amp", init.n_amp);
  init.u_amp = doc.get_double("initial.u_amp", init.u_amp);
  init.sigma = doc.get_double("initial.sigma", init.sigma);
  init.kmax = static_cast<int>(doc.get_int("initial.kmax", init.kmax));

  cfg.output.directory = doc.get_string("output.directory", cfg.output.directory);
  const std::string formats = doc.get_string("output.formats", "csv,json");
  cfg.output.csv = formats.find("csv") != std::string::npos;
  cfg.output.json = formats.find("json") != std::string::npos;
  cfg.output.snapshots = formats.find("snapshots") != std::string::npos;

  doc.reject_unknown();
  run.validate();
  // Surface grid errors at parse time with key names attached.
  try {
    (void)Grid::make(run.grid.dim, run.grid.points, run.grid.length);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config section [grid]: ") + e.what());
  }
  return cfg;
}

inline ConfigFile parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_config_stream(in);
}

}  // namespace qns
