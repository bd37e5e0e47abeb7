#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"
#include "mqed/scenario.hpp"
#include "mqed/trace.hpp"

namespace mqed {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {"cqed_ddi", "cqed", "mqed_wf", "mqed_dmma"};
  return m;
}

enum class ModeSource { Fixtures, Fit, File };
enum class WfDensity { Effective, Sommerfeld };

/// Parsed run configuration. Optional fields hold nothing until the file sets
/// them; `resolved_*` accessors apply defaults.
struct ScenarioConfig {
  std::vector<Emitter> emitters;
  Environment environment = Environment::free_space();

  // spectral window around the mean emitter energy
  std::size_t n_omega = 2000;
  double half_window_eV = 1.5;

  std::vector<std::string> methods = known_methods();

  ModeSource mode_source = ModeSource::Fixtures;
  std::string panel;            // fixtures
  std::size_t n_modes = 0;      // fit
  std::string modes_file;       // file: mode set for cqed_ddi (scattering part)
  std::string modes_file_total; // file: mode set for cqed (total density)

  TimeGrid time;
  bool rwa = true;
  bool counter_rotating = true;
  WfDensity wf_density = WfDensity::Effective;
  std::string output_dir = "out";

  std::string source_dir;  // directory of the config file, for relative paths

  Scenario scenario() const { return validate_scenario(emitters, environment); }
  bool wants(const std::string& method) const {
    return std::find(methods.begin(), methods.end(), method) != methods.end();
  }
  std::string resolve_path(const std::string& p) const {
    if (p.empty() || p.front() == '/' || source_dir.empty()) return p;
    return source_dir + "/" + p;
  }
};

inline std::string to_string(ModeSource s) {
  switch (s) {
    case ModeSource::Fixtures: return "fixtures";
    case ModeSource::Fit: return "fit";
    case ModeSource::File: return "file";
  }
  return "?";
}

inline std::string to_string(WfDensity d) { return d == WfDensity::Effective ? "effective" : "sommerfeld"; }

namespace detail {

[[noreturn]] inline void config_error(std::size_t line, const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigParseError, "line " + std::to_string(line) + ": field '" + field + "': " + what);
}

inline double config_number(std::size_t line, const std::string& key, const std::string& v) {
  double x = 0.0;
  if (!parse_double(v, x)) config_error(line, key, "expected a number, got '" + v + "'");
  return x;
}

inline std::size_t config_count(std::size_t line, const std::string& key, const std::string& v) {
  const double x = config_number(line, key, v);
  if (x < 0 || x != std::floor(x) || x > 1e9) config_error(line, key, "expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

inline Vec3 config_vec3(std::size_t line, const std::string& key, const std::string& v) {
  std::vector<double> xs;
  if (!parse_doubles(v, xs) || xs.size() != 3) config_error(line, key, "expected three numbers");
  return {xs[0], xs[1], xs[2]};
}

inline bool config_bool(std::size_t line, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  config_error(line, key, "expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Flat `key = value` text; '#' starts a comment; arrays are space or comma
/// separated. Emitters are `emitter.<i>.<field>` with i counted from 1.
inline ScenarioConfig parse_config(const std::string& text) {
  using namespace detail;
  ScenarioConfig c;
  struct EmitterFields {
    std::optional<Vec3> position, dipole;
    std::optional<double> energy;
    std::size_t line = 0;
  };
  std::map<std::size_t, EmitterFields> em;
  std::string env_kind = "free_space";
  double wp = 0.0, gamma = 0.0, eps_inf = 1.0, z0 = 0.0;
  std::size_t env_line = 0;
  const auto rows = lines(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t ln = i + 1;
    std::string row = rows[i];
    if (const auto hash = row.find('#'); hash != std::string::npos) row.resize(hash);
    row = trim(row);
    if (row.empty()) continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos) config_error(ln, row, "expected key = value");
    const std::string key = trim(row.substr(0, eq));
    const std::string val = trim(row.substr(eq + 1));
    if (key.empty()) config_error(ln, key, "empty key");

    if (key.rfind("emitter.", 0) == 0) {
      const auto parts = split(key, '.');
      if (parts.size() != 3) config_error(ln, key, "expected emitter.<index>.<field>");
      const std::size_t idx = config_count(ln, key, parts[1]);
      if (idx == 0) config_error(ln, key, "emitter indices start at 1");
      auto& e = em[idx];
      e.line = ln;
      if (parts[2] == "position_nm")
        e.position = config_vec3(ln, key, val);
      else if (parts[2] == "dipole_D")
        e.dipole = config_vec3(ln, key, val);
      else if (parts[2] == "energy_eV")
        e.energy = config_number(ln, key, val);
      else
        config_error(ln, key, "unknown field");
    } else if (key == "environment") {
      if (val != "free_space" && val != "drude") config_error(ln, key, "expected free_space or drude");
      env_kind = val;
      env_line = ln;
    } else if (key == "drude.plasma_eV") {
      wp = config_number(ln, key, val);
    } else if (key == "drude.damping_eV") {
      gamma = config_number(ln, key, val);
    } else if (key == "drude.eps_inf") {
      eps_inf = config_number(ln, key, val);
    } else if (key == "interface_z_nm") {
      z0 = config_number(ln, key, val);
    } else if (key == "grid.n_omega") {
      c.n_omega = config_count(ln, key, val);
      if (c.n_omega < 3) config_error(ln, key, "need at least 3 points");
    } else if (key == "grid.half_window_eV") {
      c.half_window_eV = config_number(ln, key, val);
      if (!(c.half_window_eV > 0)) config_error(ln, key, "must be positive");
    } else if (key == "methods") {
      c.methods.clear();
      for (auto m : split(val, val.find(',') != std::string::npos ? ',' : ' ')) {
        m = trim(m);
        if (m.empty()) continue;
        const auto& km = known_methods();
        if (std::find(km.begin(), km.end(), m) == km.end()) config_error(ln, key, "unknown method '" + m + "'");
        if (!c.wants(m)) c.methods.push_back(m);
      }
      if (c.methods.empty()) config_error(ln, key, "no methods listed");
    } else if (key == "modes.source") {
      if (val == "fixtures")
        c.mode_source = ModeSource::Fixtures;
      else if (val == "fit")
        c.mode_source = ModeSource::Fit;
      else if (val == "file")
        c.mode_source = ModeSource::File;
      else
        config_error(ln, key, "expected fixtures, fit or file");
    } else if (key == "modes.panel") {
      c.panel = val;
    } else if (key == "modes.n_modes") {
      c.n_modes = config_count(ln, key, val);
    } else if (key == "modes.file") {
      c.modes_file = val;
    } else if (key == "modes.file_total") {
      c.modes_file_total = val;
    } else if (key == "time.t_max_fs") {
      c.time.t_max = config_number(ln, key, val);
    } else if (key == "time.dt_fs") {
      c.time.dt = config_number(ln, key, val);
    } else if (key == "rwa") {
      c.rwa = config_bool(ln, key, val);
    } else if (key == "counter_rotating") {
      c.counter_rotating = config_bool(ln, key, val);
    } else if (key == "wf.density") {
      if (val == "effective")
        c.wf_density = WfDensity::Effective;
      else if (val == "sommerfeld")
        c.wf_density = WfDensity::Sommerfeld;
      else
        config_error(ln, key, "expected effective or sommerfeld");
    } else if (key == "output_dir") {
      c.output_dir = val;
    } else {
      config_error(ln, key, "unknown field");
    }
  }

  if (em.empty()) throw Error(ErrorCode::ConfigParseError, "field 'emitter': no emitters defined");
  std::size_t expect = 1;
  for (const auto& [idx, e] : em) {
    if (idx != expect) config_error(e.line, "emitter." + std::to_string(expect), "emitter indices must be contiguous");
    ++expect;
    const std::string name = "emitter." + std::to_string(idx);
    if (!e.position) config_error(e.line, name + ".position_nm", "missing");
    if (!e.energy) config_error(e.line, name + ".energy_eV", "missing");
    Emitter x;
    x.position = *e.position;
    x.transition_energy = *e.energy;
    if (e.dipole) x.dipole = *e.dipole;
    c.emitters.push_back(x);
  }
  if (env_kind == "drude") {
    if (!(wp > 0.0)) config_error(env_line, "drude.plasma_eV", "must be positive for a drude environment");
    c.environment = Environment::drude(wp, gamma, eps_inf, z0);
  }
  const bool needs_modes = c.wants("cqed_ddi") || c.wants("cqed") ||
                           (c.wants("mqed_wf") && c.wf_density == WfDensity::Effective);
  if (needs_modes) {
    if (c.mode_source == ModeSource::Fixtures && c.panel.empty())
      throw Error(ErrorCode::ConfigParseError, "field 'modes.panel': required when modes.source = fixtures");
    if (c.mode_source == ModeSource::Fit && c.n_modes == 0)
      throw Error(ErrorCode::ConfigParseError, "field 'modes.n_modes': required when modes.source = fit");
    if (c.mode_source == ModeSource::File && c.modes_file.empty())
      throw Error(ErrorCode::ConfigParseError, "field 'modes.file': required when modes.source = file");
    if (c.mode_source == ModeSource::File && c.wants("cqed") && c.modes_file_total.empty())
      throw Error(ErrorCode::ConfigParseError, "field 'modes.file_total': required for cqed when modes.source = file");
  }
  c.time.steps();
  return c;
}

inline ScenarioConfig read_config(const std::string& path) {
  ScenarioConfig c = parse_config(detail::read_file(path));
  if (const auto slash = path.find_last_of('/'); slash != std::string::npos) c.source_dir = path.substr(0, slash);
  return c;
}

}  // namespace mqed
