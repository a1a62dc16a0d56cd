#pragma once

// Scenario files: a flat subset of TOML. One `key = number` per line, `#`
// comments, `[section]` headers are accepted and ignored. Power-like keys may
// be given in dB with a `_db` / `_dbm_hz` suffix.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "gloc/errors.hpp"
#include "gloc/scenario.hpp"
#include "gloc/units.hpp"

namespace gloc {

/// Scenario plus the parameters of both traffic models.
struct LoadedConfig {
  ScenarioConfig scenario;
  NonPeriodic non_periodic;
  Periodic periodic;
};

enum class TrafficKind { Periodic, NonPeriodic };

inline std::string_view to_string(TrafficKind t) {
  return t == TrafficKind::Periodic ? "periodic" : "non-periodic";
}

inline TrafficKind parse_traffic(std::string_view text) {
  if (text == "periodic") return TrafficKind::Periodic;
  if (text == "non-periodic" || text == "non_periodic" || text == "nonperiodic")
    return TrafficKind::NonPeriodic;
  throw ConfigError("unknown traffic '" + std::string(text) + "' (expected periodic|non-periodic)");
}

inline TrafficModel traffic_model(const LoadedConfig& c, TrafficKind kind) {
  if (kind == TrafficKind::Periodic) return c.periodic;
  return c.non_periodic;
}

namespace config_detail {

inline std::int64_t as_count(double value, std::string_view key) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 9.0e15)
    throw ConfigError(std::string(key) + " must be a positive integer");
  return static_cast<std::int64_t>(value);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view text, std::string_view key) {
  std::string cleaned;
  for (char ch : text)
    if (ch != '_') cleaned.push_back(ch);
  std::string_view s = cleaned;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || std::isnan(value))
    throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(text) +
                      "' as a number");
  return value;
}

}  // namespace config_detail

/// Sets one named parameter. Used by the file parser, CLI overrides and sweeps.
inline void apply_setting(LoadedConfig& c, std::string_view key, double value) {
  auto& s = c.scenario;
  if (key == "tau") s.tau = value;
  else if (key == "alpha") s.alpha = value;
  else if (key == "lambda_lane") s.lambda_lane = value;
  else if (key == "d_safe") s.d_safe = value;
  else if (key == "n_lanes") s.n_lanes = config_detail::as_count(value, key);
  else if (key == "d_segment") s.d_segment = value;
  else if (key == "n_ar") s.n_ar = config_detail::as_count(value, key);
  else if (key == "bw") s.bw = value;
  else if (key == "rho_vt") s.rho_vt = value;
  else if (key == "rho_vt_dbm_hz") s.rho_vt = units::dbm_hz_to_mw_hz(value);
  else if (key == "sigma_n2") s.sigma_n2 = value;
  else if (key == "sigma_n2_dbm_hz") s.sigma_n2 = units::dbm_hz_to_mw_hz(value);
  else if (key == "gamma") s.gamma = value;
  else if (key == "gamma_db") s.gamma = units::db_to_linear(value);
  else if (key == "d_max") s.d_max = value;
  else if (key == "r_bc") s.r_bc = value;
  else if (key == "p_a") c.non_periodic.p_a = value;
  else if (key == "m_bc") c.periodic.m_bc = value;
  else if (key == "t_rep") c.periodic.t_rep = value;
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// Canonical name of the parameter a key writes, so that `gamma` and
/// `gamma_db` count as the same setting.
inline std::string canonical_key(std::string_view key) {
  for (std::string_view suffix : {"_dbm_hz", "_db"}) {
    if (key.size() > suffix.size() && key.substr(key.size() - suffix.size()) == suffix)
      return std::string(key.substr(0, key.size() - suffix.size()));
  }
  return std::string(key);
}

inline LoadedConfig parse_config(std::string_view text, std::string_view origin = "<config>") {
  LoadedConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = config_detail::trim(line);
    if (line.empty() || line.front() == '[') continue;

    const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = config_detail::trim(line.substr(0, eq));
    const auto value = config_detail::trim(line.substr(eq + 1));
    if (!seen.insert(canonical_key(key)).second)
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      apply_setting(c, key, config_detail::parse_number(value, key));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  c.scenario.validate();
  return c;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

/// Linear-unit echo of every parameter, readable by parse_config.
inline std::string to_config_text(const LoadedConfig& c) {
  const auto& s = c.scenario;
  std::string out;
  auto put = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out += buf;
  };
  put("tau", s.tau);
  put("alpha", s.alpha);
  put("lambda_lane", s.lambda_lane);
  put("d_safe", s.d_safe);
  put("n_lanes", static_cast<double>(s.n_lanes));
  put("d_segment", s.d_segment);
  put("n_ar", static_cast<double>(s.n_ar));
  put("bw", s.bw);
  put("rho_vt", s.rho_vt);
  put("sigma_n2", s.sigma_n2);
  put("gamma", s.gamma);
  put("d_max", s.d_max);
  put("r_bc", s.r_bc);
  put("p_a", c.non_periodic.p_a);
  put("m_bc", c.periodic.m_bc);
  put("t_rep", c.periodic.t_rep);
  return out;
}

}  // namespace gloc
