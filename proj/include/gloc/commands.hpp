#pragma once

// Command layer behind the `gloc` executable: parameter sweeps, the power
// optimizer, figure presets and run records. Everything here returns text so
// the CLI only has to deal with arguments and files.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gloc/analytic.hpp"
#include "gloc/config_io.hpp"
#include "gloc/montecarlo.hpp"
#include "gloc/parallel.hpp"
#include "gloc/scenario.hpp"
#include "gloc/units.hpp"

namespace gloc::cli {

using gloc::to_string;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20170101;

inline const char* kSweepHeader =
    "variable,value,scheme,traffic,capture_analytic,capture_mc,capture_mc_se,"
    "mean_interference_mw_hz,avg_br_bps,avg_ee_bpj,flag";
inline const char* kOptimizeHeader =
    "scheme,traffic,delta,gamma_db,rho_opt_dbm_hz,rho_opt_mw_hz,ee_opt_bpj,capture_at_opt,c1,"
    "c2_mw_hz,flag";
inline const char* kSimulateHeader =
    "metric,scheme,traffic,mode,mc_mean,mc_std_error,n_samples,seed,analytic,flag";

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void add_flag(std::string& flags, const std::string& f) {
  if (!flags.empty()) flags += ';';
  flags += f;
}

inline std::string_view to_string(mc::SimMode m) {
  return m == mc::SimMode::ModelFaithful ? "model-faithful" : "ground-truth";
}

inline mc::SimMode parse_mode(std::string_view s) {
  if (s == "model-faithful" || s == "model_faithful") return mc::SimMode::ModelFaithful;
  if (s == "ground-truth" || s == "ground_truth") return mc::SimMode::GroundTruth;
  throw ConfigError("unknown simulation mode '" + std::string(s) + "'");
}

struct McSettings {
  bool enabled = false;
  std::uint64_t n_realizations = 10000;
  std::uint64_t seed = kDefaultSeed;
  mc::SimMode mode = mc::SimMode::ModelFaithful;
};

struct SweepSpec {
  std::string variable;
  std::vector<double> values;
  std::vector<Scheme> schemes{Scheme::SLP, Scheme::MLP};
  std::vector<TrafficKind> traffics{TrafficKind::Periodic, TrafficKind::NonPeriodic};
  McSettings mc;
};

struct OptimizeSpec {
  std::vector<double> deltas{0.99};
  std::vector<double> gamma_db;  // empty: use the config's threshold
  std::vector<Scheme> schemes{Scheme::SLP, Scheme::MLP};
  std::vector<TrafficKind> traffics{TrafficKind::Periodic, TrafficKind::NonPeriodic};
};

inline const std::vector<std::string>& sweep_variables() {
  static const std::vector<std::string> vars{"gamma_db", "p_a",           "n_ar",  "r_bc",
                                             "d_segment", "rho_vt_dbm_hz", "delta", "x"};
  return vars;
}

/// `count` values from start to stop inclusive, linearly or geometrically spaced.
inline std::vector<double> make_range(double start, double stop, std::size_t count, bool log_scale) {
  if (count == 0) throw ConfigError("sweep needs at least one value");
  if (log_scale && !(start > 0.0 && stop > 0.0)) throw ConfigError("log sweep needs positive bounds");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = log_scale ? start * std::pow(stop / start, f) : start + (stop - start) * f;
  }
  if (count > 1) out.back() = stop;
  return out;
}

inline void validate(const SweepSpec& spec) {
  bool known = false;
  for (const auto& v : sweep_variables()) known = known || v == spec.variable;
  if (!known) throw ConfigError("cannot sweep '" + spec.variable + "'");
  if (spec.values.empty()) throw ConfigError("sweep values are empty");
  if (spec.schemes.empty() || spec.traffics.empty())
    throw ConfigError("sweep needs at least one scheme and one traffic model");
  if (spec.values.size() > 1) {
    const bool up = spec.values[1] > spec.values[0];
    for (std::size_t i = 1; i < spec.values.size(); ++i)
      if (up ? !(spec.values[i] > spec.values[i - 1]) : !(spec.values[i] < spec.values[i - 1]))
        throw ConfigError("sweep values must be strictly monotone");
  }
  if (spec.mc.enabled && spec.mc.n_realizations < 100)
    throw ConfigError("Monte Carlo needs at least 100 realizations");
}

/// Applies the swept variable to a copy of the base config. `delta` moves the
/// transmit power to the energy-efficient optimum for that delta.
inline LoadedConfig configure_point(const LoadedConfig& base, const std::string& variable, double value,
                                    Scheme scheme, TrafficKind traffic) {
  LoadedConfig c = base;
  if (variable == "x") return c;
  if (variable == "delta") {
    const auto opt = optimal_power(value, c.scenario, scheme, traffic_model(c, traffic));
    c.scenario.rho_vt = opt.rho_opt;
    return c;
  }
  apply_setting(c, variable, value);
  c.scenario.validate();
  return c;
}

struct SweepRow {
  std::string variable;
  double value = NAN;
  Scheme scheme = Scheme::SLP;
  TrafficKind traffic = TrafficKind::Periodic;
  double capture = NAN;
  double capture_mc = NAN;
  double capture_mc_se = NAN;
  double mean_interference = NAN;
  double avg_br = NAN;
  double avg_ee = NAN;
  std::string flag;

  std::string to_csv() const {
    std::string s = variable + "," + fmt(value) + "," + std::string(gloc::to_string(scheme)) + "," +
                    std::string(cli::to_string(traffic)) + ",";
    for (double v : {capture, capture_mc, capture_mc_se, mean_interference, avg_br, avg_ee})
      s += fmt(v) + ",";
    return s + csv_field(flag);
  }
};

/// Analytic (and optionally simulated) metrics for one configuration. The mean
/// interference is taken at the receiver, or at `x` for position sweeps.
/// An empty variable evaluates the base config as is. Errors propagate.
inline SweepRow compute_point(const LoadedConfig& base, const std::string& variable, double value,
                              Scheme scheme, TrafficKind traffic, const McSettings& mc_cfg,
                              unsigned mc_threads = 0) {
  SweepRow row;
  row.variable = variable;
  row.value = value;
  row.scheme = scheme;
  row.traffic = traffic;
  const LoadedConfig c =
      variable.empty() ? base : configure_point(base, variable, value, scheme, traffic);
  const auto& cfg = c.scenario;
  const TrafficModel tm = traffic_model(c, traffic);

  const double x = variable == "x" ? value : cfg.r_bc;
  const auto mi = mean_interference(x, 0.0, scheme, cfg, tm);
  row.mean_interference = mi.value;
  if (mi.divergent) add_flag(row.flag, "interference_divergent");
  if (variable == "x") return row;

  const auto cap = capture_details(cfg, scheme, tm);
  const double se = spectral_efficiency(cfg);
  row.capture = cap.value;
  row.avg_br = derive_scheme(cfg, scheme).b_ar * se * cap.value;
  row.avg_ee = se / (cfg.rho_vt * units::kMilliwattToWatt) * cap.value;
  if (cap.weights_flagged) add_flag(row.flag, "weights_unnormalized");
  if (scheme == Scheme::MLP && noise_limited(cfg)) add_flag(row.flag, "noise_limited");

  if (mc_cfg.enabled) {
    const auto est = mc::estimate(mc::Metric::Capture, cfg, scheme, tm, mc_cfg.mode,
                                  mc_cfg.n_realizations, mc_cfg.seed, mc_threads);
    row.capture_mc = est.mean;
    row.capture_mc_se = est.std_error;
    if (std::abs(cap.value - est.mean) > 3.0 * est.std_error) add_flag(row.flag, "mc_mismatch");
  }
  return row;
}

/// compute_point that records a failure in the flag column instead of throwing.
inline SweepRow evaluate_point(const LoadedConfig& base, const std::string& variable, double value,
                               Scheme scheme, TrafficKind traffic, const McSettings& mc_cfg,
                               unsigned mc_threads = 0) {
  try {
    return compute_point(base, variable, value, scheme, traffic, mc_cfg, mc_threads);
  } catch (const Error& e) {
    SweepRow row;
    row.variable = variable;
    row.value = value;
    row.scheme = scheme;
    row.traffic = traffic;
    row.flag = std::string("error:") + e.what();
    return row;
  }
}

inline std::vector<SweepRow> run_sweep_rows(const LoadedConfig& base, const SweepSpec& spec) {
  validate(spec);
  struct Task {
    double value;
    Scheme scheme;
    TrafficKind traffic;
  };
  std::vector<Task> tasks;
  for (double v : spec.values)
    for (Scheme s : spec.schemes)
      for (TrafficKind t : spec.traffics) tasks.push_back({v, s, t});

  std::vector<SweepRow> rows(tasks.size());
  // Points run concurrently unless the simulator is already using the threads.
  const unsigned outer = spec.mc.enabled ? 1 : 0;
  parallel_for(
      tasks.size(),
      [&](std::size_t i) {
        rows[i] = evaluate_point(base, spec.variable, tasks[i].value, tasks[i].scheme,
                                 tasks[i].traffic, spec.mc, spec.mc.enabled ? 0 : 1);
      },
      outer);
  return rows;
}

inline std::string run_sweep(const LoadedConfig& base, const SweepSpec& spec) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : run_sweep_rows(base, spec)) out += r.to_csv() + "\n";
  return out;
}

inline std::string run_optimize(const LoadedConfig& base, const OptimizeSpec& spec) {
  for (double d : spec.deltas)
    if (!(d > 0.0 && d < 1.0)) throw DomainError("delta must lie in (0, 1), got " + fmt(d));
  std::vector<double> gammas = spec.gamma_db;
  if (gammas.empty()) gammas.push_back(units::linear_to_db(base.scenario.gamma));

  std::string out = std::string(kOptimizeHeader) + "\n";
  for (Scheme s : spec.schemes) {
    for (TrafficKind t : spec.traffics) {
      for (double g : gammas) {
        for (double d : spec.deltas) {
          LoadedConfig c = base;
          if (!spec.gamma_db.empty()) apply_setting(c, "gamma_db", g);
          std::string line = std::string(gloc::to_string(s)) + "," + std::string(to_string(t)) + "," +
                             fmt(d) + "," + fmt(g) + ",";
          try {
            const auto r = optimal_power(d, c.scenario, s, traffic_model(c, t));
            line += fmt(units::mw_hz_to_dbm_hz(r.rho_opt)) + "," + fmt(r.rho_opt) + "," +
                    fmt(r.ee_opt) + "," + fmt(r.capture_at_opt) + "," + fmt(r.c1) + "," +
                    fmt(r.c2) + ",";
          } catch (const Error& e) {
            line += ",,,,,," + csv_field(std::string("error:") + e.what());
          }
          out += line + "\n";
        }
      }
    }
  }
  return out;
}

struct SimulateSpec {
  std::vector<mc::Metric> metrics{mc::Metric::Capture};
  Scheme scheme = Scheme::SLP;
  TrafficKind traffic = TrafficKind::NonPeriodic;
  McSettings mc{true};
};

inline std::string_view to_string(mc::Metric m) {
  switch (m) {
    case mc::Metric::MeanInterference: return "mean_interference";
    case mc::Metric::BR: return "avg_br";
    case mc::Metric::EE: return "avg_ee";
    case mc::Metric::Capture:
    default: return "capture";
  }
}

inline mc::Metric parse_metric(std::string_view s) {
  for (auto m : {mc::Metric::Capture, mc::Metric::MeanInterference, mc::Metric::BR, mc::Metric::EE})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

inline std::string run_simulate(const LoadedConfig& base, const SimulateSpec& spec) {
  const auto& cfg = base.scenario;
  const TrafficModel tm = traffic_model(base, spec.traffic);
  std::string out = std::string(kSimulateHeader) + "\n";
  for (auto metric : spec.metrics) {
    const auto est = mc::estimate(metric, cfg, spec.scheme, tm, spec.mc.mode, spec.mc.n_realizations,
                                  spec.mc.seed);
    double analytic = NAN;
    std::string flag;
    if (metric == mc::Metric::MeanInterference) {
      const auto mi = mean_interference(cfg.r_bc, 0.0, spec.scheme, cfg, tm);
      analytic = mi.value;
      if (mi.divergent) add_flag(flag, "interference_divergent");
    } else {
      const auto lm = link_metrics(cfg, spec.scheme, tm);
      analytic = metric == mc::Metric::Capture ? lm.capture : metric == mc::Metric::BR ? lm.avg_br : lm.avg_ee;
      if (std::abs(analytic - est.mean) > 3.0 * est.std_error) add_flag(flag, "mc_mismatch");
    }
    out += std::string(to_string(metric)) + "," + std::string(gloc::to_string(spec.scheme)) + "," +
           std::string(to_string(spec.traffic)) + "," + std::string(to_string(spec.mc.mode)) + "," +
           fmt(est.mean) + "," + fmt(est.std_error) + "," + std::to_string(est.n_samples) + "," +
           std::to_string(est.seed) + "," + fmt(analytic) + "," + csv_field(flag) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jobs and run records

struct Job {
  std::string command;  // "sweep" | "optimize" | "simulate"
  std::string name;     // output stem used by figure presets
  LoadedConfig config;
  SweepSpec sweep;
  OptimizeSpec optimize;
  SimulateSpec simulate;
};

inline std::string run_job(const Job& job) {
  if (job.command == "sweep") return run_sweep(job.config, job.sweep);
  if (job.command == "optimize") return run_optimize(job.config, job.optimize);
  if (job.command == "simulate") return run_simulate(job.config, job.simulate);
  throw ConfigError("unknown job command '" + job.command + "'");
}

namespace record_detail {

using nlohmann::json;

inline json config_json(const LoadedConfig& c) {
  const auto& s = c.scenario;
  return {{"tau", s.tau},         {"alpha", s.alpha},       {"lambda_lane", s.lambda_lane},
          {"d_safe", s.d_safe},   {"n_lanes", s.n_lanes},   {"d_segment", s.d_segment},
          {"n_ar", s.n_ar},       {"bw", s.bw},             {"rho_vt", s.rho_vt},
          {"sigma_n2", s.sigma_n2}, {"gamma", s.gamma},     {"d_max", s.d_max},
          {"r_bc", s.r_bc},       {"p_a", c.non_periodic.p_a}, {"m_bc", c.periodic.m_bc},
          {"t_rep", c.periodic.t_rep}};
}

inline LoadedConfig config_from_json(const json& j) {
  LoadedConfig c;
  for (const auto& [key, value] : j.items()) apply_setting(c, key, value.get<double>());
  c.scenario.validate();
  return c;
}

inline json mc_json(const McSettings& m) {
  return {{"enabled", m.enabled},
          {"n_realizations", m.n_realizations},
          {"seed", m.seed},
          {"mode", std::string(to_string(m.mode))}};
}

inline McSettings mc_from_json(const json& j) {
  McSettings m;
  m.enabled = j.at("enabled").get<bool>();
  m.n_realizations = j.at("n_realizations").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.mode = parse_mode(j.at("mode").get<std::string>());
  return m;
}

inline json schemes_json(const std::vector<Scheme>& v) {
  json a = json::array();
  for (auto s : v) a.push_back(std::string(gloc::to_string(s)));
  return a;
}

inline std::vector<Scheme> schemes_from_json(const json& j) {
  std::vector<Scheme> v;
  for (const auto& s : j) v.push_back(parse_scheme(s.get<std::string>()));
  return v;
}

inline json traffics_json(const std::vector<TrafficKind>& v) {
  json a = json::array();
  for (auto t : v) a.push_back(std::string(to_string(t)));
  return a;
}

inline std::vector<TrafficKind> traffics_from_json(const json& j) {
  std::vector<TrafficKind> v;
  for (const auto& s : j) v.push_back(parse_traffic(s.get<std::string>()));
  return v;
}

}  // namespace record_detail

inline nlohmann::json job_to_json(const Job& job) {
  using namespace record_detail;
  json j{{"command", job.command}, {"name", job.name}, {"config", config_json(job.config)}};
  if (job.command == "sweep") {
    j["spec"] = {{"variable", job.sweep.variable},
                 {"values", job.sweep.values},
                 {"schemes", schemes_json(job.sweep.schemes)},
                 {"traffics", traffics_json(job.sweep.traffics)},
                 {"mc", mc_json(job.sweep.mc)}};
  } else if (job.command == "optimize") {
    j["spec"] = {{"deltas", job.optimize.deltas},
                 {"gamma_db", job.optimize.gamma_db},
                 {"schemes", schemes_json(job.optimize.schemes)},
                 {"traffics", traffics_json(job.optimize.traffics)}};
  } else {
    json metrics = json::array();
    for (auto m : job.simulate.metrics) metrics.push_back(std::string(to_string(m)));
    j["spec"] = {{"metrics", metrics},
                 {"scheme", std::string(gloc::to_string(job.simulate.scheme))},
                 {"traffic", std::string(to_string(job.simulate.traffic))},
                 {"mc", mc_json(job.simulate.mc)}};
  }
  return j;
}

inline Job job_from_json(const nlohmann::json& j) {
  using namespace record_detail;
  try {
    Job job;
    job.command = j.at("command").get<std::string>();
    job.name = j.value("name", "");
    job.config = config_from_json(j.at("config"));
    const auto& s = j.at("spec");
    if (job.command == "sweep") {
      job.sweep.variable = s.at("variable").get<std::string>();
      job.sweep.values = s.at("values").get<std::vector<double>>();
      job.sweep.schemes = schemes_from_json(s.at("schemes"));
      job.sweep.traffics = traffics_from_json(s.at("traffics"));
      job.sweep.mc = mc_from_json(s.at("mc"));
    } else if (job.command == "optimize") {
      job.optimize.deltas = s.at("deltas").get<std::vector<double>>();
      job.optimize.gamma_db = s.at("gamma_db").get<std::vector<double>>();
      job.optimize.schemes = schemes_from_json(s.at("schemes"));
      job.optimize.traffics = traffics_from_json(s.at("traffics"));
    } else if (job.command == "simulate") {
      job.simulate.metrics.clear();
      for (const auto& m : s.at("metrics")) job.simulate.metrics.push_back(parse_metric(m.get<std::string>()));
      job.simulate.scheme = parse_scheme(s.at("scheme").get<std::string>());
      job.simulate.traffic = parse_traffic(s.at("traffic").get<std::string>());
      job.simulate.mc = mc_from_json(s.at("mc"));
    } else {
      throw ConfigError("unknown job command '" + job.command + "'");
    }
    return job;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
}

/// Sidecar written next to every CSV: enough to rerun the job bit-identically.
inline nlohmann::json make_run_record(const Job& job, const std::string& csv, double wall_clock_s) {
  nlohmann::json rec = job_to_json(job);
  rec["artifact"] = "gloc";
  rec["version"] = kVersion;
  rec["mc_window_half_width_m"] = mc::window_half_width(job.config.scenario);
  std::vector<std::string> rows;
  std::size_t start = 0;
  while (start < csv.size()) {
    const auto nl = csv.find('\n', start);
    rows.push_back(csv.substr(start, nl - start));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  rec["outputs"] = rows;
  rec["wall_clock_s"] = wall_clock_s;
  return rec;
}

struct JobResult {
  std::string csv;
  nlohmann::json record;
};

inline JobResult execute(const Job& job) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string csv = run_job(job);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {csv, make_run_record(job, csv, dt)};
}

// ---------------------------------------------------------------------------
// Figure presets

inline const std::vector<int>& figure_ids() {
  static const std::vector<int> ids{4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  return ids;
}

inline std::vector<double> step_range(double start, double stop, double step) {
  const auto n = static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + step * static_cast<double>(i);
  return out;
}

/// Sweep grid of a figure of the evaluation section, on top of `base`.
inline Job figure_job(int figure, const LoadedConfig& base, const McSettings& mc_cfg) {
  Job job;
  job.command = "sweep";
  job.config = base;
  char name[16];
  std::snprintf(name, sizeof name, "fig%02d", figure);
  job.name = name;
  auto& s = job.sweep;
  s.mc = mc_cfg;
  switch (figure) {
    case 4:  // capture vs SINR threshold
    case 5:  // average BR vs SINR threshold
      s.variable = "gamma_db";
      s.values = step_range(-10, 20, 1);
      break;
    case 6:  // capture vs activity probability
      s.variable = "p_a";
      s.values = step_range(0.05, 1.0, 0.05);
      s.traffics = {TrafficKind::NonPeriodic};
      break;
    case 7:  // capture vs number of ARs
    case 9:  // average BR vs number of ARs
      s.variable = "n_ar";
      s.values = step_range(1, 100, 1);
      break;
    case 8:  // c1 of MLP towards the noise-limited regime
      s.variable = "n_ar";
      s.values = make_range(100, 10000, 41, true);
      for (auto& v : s.values) v = std::round(v);
      s.schemes = {Scheme::MLP};
      job.config.scenario.sigma_n2 = 0.0;
      s.mc.enabled = false;
      break;
    case 10:  // mean interference vs position, d_safe = 21 m
    case 11:  // mean interference vs position, d_safe = 42 m
      s.variable = "x";
      s.values = step_range(-105, 105, 1);
      s.traffics = {TrafficKind::NonPeriodic};
      job.config.scenario.n_ar = 3;
      job.config.scenario.lambda_lane = 0.8 / 84.0;
      job.config.scenario.d_safe = figure == 10 ? 21.0 : 42.0;
      s.mc.enabled = false;
      break;
    case 12:  // capture vs broadcast distance
      s.variable = "r_bc";
      s.values = step_range(50, 500, 10);
      break;
    case 13:  // capture vs segment size
      s.variable = "d_segment";
      s.values = step_range(2, 100, 2);
      break;
    case 14:  // capture vs transmit power
    case 15:  // average EE vs transmit power
      s.variable = "rho_vt_dbm_hz";
      s.values = step_range(-90, -20, 1);
      break;
    case 16:  // optimum EE vs optimum power, one point per SINR threshold
      job.command = "optimize";
      job.optimize.gamma_db = step_range(-5, 20, 1);
      job.optimize.deltas = {0.3, 0.99};
      break;
    default:
      throw ConfigError("no preset for figure " + std::to_string(figure) + " (expected 4..16)");
  }
  // Snap grid values so that 0.05 * 3 prints as 0.15.
  for (auto& v : s.values) v = std::round(v * 1e9) / 1e9;
  return job;
}

}  // namespace gloc::cli
