// gloc: analytic and simulated performance of geo-location based channel
// access for V2V broadcast.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gloc/analytic.hpp"
#include "gloc/commands.hpp"
#include "gloc/config_io.hpp"
#include "gloc/errors.hpp"
#include "gloc/scenario.hpp"

namespace {

using namespace gloc;
using namespace gloc::cli;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;  // key=value
  std::map<std::string, std::string> shortcuts;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "Scenario file (key = value)")->check(CLI::ExistingFile);
  app->add_option("--set", o.sets, "Override a parameter, e.g. --set n_ar=100")->take_all();
  for (const char* key : {"p_a", "gamma_db", "n_ar", "r_bc", "d_segment", "d_safe", "rho_vt_dbm_hz",
                          "sigma_n2_dbm_hz", "m_bc", "t_rep", "d_max"}) {
    std::string flag = std::string("--") + key;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    app->add_option(flag, o.shortcuts[key], std::string("Override ") + key);
  }
}

LoadedConfig resolve_config(const CommonOptions& o) {
  LoadedConfig c = o.config_path.empty() ? LoadedConfig{} : load_config(o.config_path);
  auto apply = [&](const std::string& key, const std::string& text) {
    apply_setting(c, key, config_detail::parse_number(text, key));
  };
  for (const auto& [key, text] : o.shortcuts)
    if (!text.empty()) apply(key, text);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.scenario.validate();
  return c;
}

std::uint64_t resolve_seed(const std::string& flag) {
  std::string text = flag;
  if (text.empty())
    if (const char* env = std::getenv("GLOC_SEED")) text = env;
  if (text.empty()) return kDefaultSeed;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed must be an unsigned 64-bit integer, got '" + text + "'");
  }
}

std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(config_detail::parse_number(tok, "list"));
  }
  return out;
}

template <class T, class Parse>
std::vector<T> parse_names(const std::vector<std::string>& items, Parse parse) {
  std::vector<T> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(parse(tok));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

// CSV to --out plus sidecar, or CSV to stdout.
void emit(const Job& job, const std::string& out_path) {
  const JobResult r = execute(job);
  if (out_path.empty()) {
    std::cout << r.csv;
    return;
  }
  write_text(out_path, r.csv);
  auto record = r.record;
  record["out"] = out_path;
  write_text(out_path + ".run.json", record.dump(2) + "\n");
  std::cerr << "wrote " << out_path << " (" << r.record["outputs"].size() - 1 << " rows)\n";
}

struct McOptions {
  bool enabled = false;
  std::uint64_t n = 10000;
  std::string seed;
  std::string mode = "model-faithful";

  McSettings resolve() const { return {enabled, n, resolve_seed(seed), parse_mode(mode)}; }
};

void add_mc(CLI::App* app, McOptions& o, bool with_switch) {
  if (with_switch) app->add_flag("--mc", o.enabled, "Add Monte Carlo columns");
  app->add_option("--n", o.n, "Monte Carlo realizations")->capture_default_str();
  app->add_option("--seed", o.seed, "Master seed (default: $GLOC_SEED or built-in)");
  app->add_option("--mode", o.mode, "model-faithful | ground-truth")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"gloc: capture probability, rate and energy efficiency of geo-location based access"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // analyze
  CommonOptions an_common;
  std::string an_scheme = "mlp", an_traffic = "periodic", an_format = "text";
  auto* analyze = app.add_subcommand("analyze", "Analytic metrics at one configuration");
  add_common(analyze, an_common);
  analyze->add_option("--scheme", an_scheme, "slp | mlp")->capture_default_str();
  analyze->add_option("--traffic", an_traffic, "periodic | non-periodic")->capture_default_str();
  analyze->add_option("--format", an_format, "text | csv")->capture_default_str();

  // sweep
  CommonOptions sw_common;
  McOptions sw_mc;
  std::string sw_variable, sw_out;
  std::vector<std::string> sw_values, sw_schemes{"slp,mlp"}, sw_traffics{"periodic,non-periodic"};
  double sw_start = 0, sw_stop = 0;
  std::size_t sw_count = 0;
  bool sw_log = false;
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and write CSV");
  add_common(sweep, sw_common);
  add_mc(sweep, sw_mc, true);
  sweep->add_option("--variable", sw_variable, "gamma_db|p_a|n_ar|r_bc|d_segment|rho_vt_dbm_hz|delta|x")
      ->required();
  sweep->add_option("--values", sw_values, "Explicit values, comma separated");
  sweep->add_option("--start", sw_start);
  sweep->add_option("--stop", sw_stop);
  sweep->add_option("--count", sw_count);
  sweep->add_flag("--log", sw_log, "Geometric spacing for --start/--stop/--count");
  sweep->add_option("--schemes", sw_schemes)->capture_default_str();
  sweep->add_option("--traffics", sw_traffics)->capture_default_str();
  sweep->add_option("--out", sw_out, "CSV path (a .run.json record is written next to it)");

  // simulate
  CommonOptions si_common;
  McOptions si_mc;
  std::string si_scheme = "slp", si_traffic = "non-periodic", si_out;
  std::vector<std::string> si_metrics{"capture"};
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates next to the analytic values");
  add_common(simulate, si_common);
  add_mc(simulate, si_mc, false);
  simulate->add_option("--scheme", si_scheme)->capture_default_str();
  simulate->add_option("--traffic", si_traffic)->capture_default_str();
  simulate->add_option("--metric", si_metrics, "capture|mean_interference|avg_br|avg_ee")
      ->capture_default_str();
  simulate->add_option("--out", si_out);

  // optimize
  CommonOptions op_common;
  std::vector<std::string> op_delta{"0.99"}, op_gamma, op_schemes{"slp,mlp"},
      op_traffics{"periodic,non-periodic"};
  std::string op_out;
  auto* optimize = app.add_subcommand("optimize", "Energy-efficient transmit power");
  add_common(optimize, op_common);
  optimize->add_option("--delta", op_delta, "Fractions of the maximum capture probability")
      ->capture_default_str();
  optimize->add_option("--gamma-db-list", op_gamma, "SINR thresholds to scan (dB)");
  optimize->add_option("--schemes", op_schemes)->capture_default_str();
  optimize->add_option("--traffics", op_traffics)->capture_default_str();
  optimize->add_option("--out", op_out);

  // reproduce
  CommonOptions re_common;
  McOptions re_mc;
  std::vector<int> re_figures;
  std::string re_dir = "results";
  auto* reproduce = app.add_subcommand("reproduce", "Figure sweeps of the evaluation section");
  add_common(reproduce, re_common);
  add_mc(reproduce, re_mc, true);
  reproduce->add_option("--figure", re_figures, "Figure ids 4..16 (default: all)");
  reproduce->add_option("--out", re_dir, "Output directory")->capture_default_str();

  // rerun
  std::string rr_record, rr_out;
  auto* rerun = app.add_subcommand("rerun", "Re-execute a job from its .run.json record");
  rerun->add_option("--record", rr_record)->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", rr_out, "CSV path (default: the record's own output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*analyze) {
    const LoadedConfig c = resolve_config(an_common);
    const Scheme scheme = parse_scheme(an_scheme);
    const TrafficKind traffic = parse_traffic(an_traffic);
    const SweepRow row = compute_point(c, "", NAN, scheme, traffic, McSettings{});
    if (an_format == "csv") {
      std::cout << kSweepHeader << "\n" << row.to_csv() << "\n";
    } else if (an_format == "text") {
      const auto tm = traffic_model(c, traffic);
      const auto cap = capture_details(c.scenario, scheme, tm);
      std::cout << "scheme                   " << gloc::to_string(scheme) << "\n"
                << "traffic                  " << cli::to_string(traffic) << "\n"
                << "p_a                      " << fmt(cap.p_a) << "\n"
                << "capture_probability      " << fmt(row.capture) << "\n"
                << "c1                       " << fmt(cap.c1) << "\n"
                << "c2_mw_hz                 " << fmt(cap.c2) << "\n"
                << "mean_interference_mw_hz  " << fmt(row.mean_interference) << "\n"
                << "avg_br_bps               " << fmt(row.avg_br) << "\n"
                << "avg_ee_bpj               " << fmt(row.avg_ee) << "\n"
                << "noise_limited            " << (noise_limited(c.scenario) ? "true" : "false") << "\n";
      if (!row.flag.empty()) std::cout << "flags                    " << row.flag << "\n";
    } else {
      throw ConfigError("unknown format '" + an_format + "' (expected text|csv)");
    }
    return 0;
  }

  if (*sweep) {
    Job job;
    job.command = "sweep";
    job.config = resolve_config(sw_common);
    job.sweep.variable = sw_variable;
    job.sweep.values = parse_list(sw_values);
    if (job.sweep.values.empty() && sw_count > 0) job.sweep.values = make_range(sw_start, sw_stop, sw_count, sw_log);
    job.sweep.schemes = parse_names<Scheme>(sw_schemes, parse_scheme);
    job.sweep.traffics = parse_names<TrafficKind>(sw_traffics, parse_traffic);
    job.sweep.mc = sw_mc.resolve();
    validate(job.sweep);
    emit(job, sw_out);
    return 0;
  }

  if (*simulate) {
    Job job;
    job.command = "simulate";
    job.config = resolve_config(si_common);
    job.simulate.scheme = parse_scheme(si_scheme);
    job.simulate.traffic = parse_traffic(si_traffic);
    job.simulate.metrics = parse_names<mc::Metric>(si_metrics, parse_metric);
    job.simulate.mc = si_mc.resolve();
    job.simulate.mc.enabled = true;
    emit(job, si_out);
    return 0;
  }

  if (*optimize) {
    Job job;
    job.command = "optimize";
    job.config = resolve_config(op_common);
    job.optimize.deltas = parse_list(op_delta);
    job.optimize.gamma_db = parse_list(op_gamma);
    job.optimize.schemes = parse_names<Scheme>(op_schemes, parse_scheme);
    job.optimize.traffics = parse_names<TrafficKind>(op_traffics, parse_traffic);
    for (double d : job.optimize.deltas)
      if (!(d > 0.0 && d < 1.0)) throw DomainError("delta must lie in (0, 1), got " + fmt(d));
    emit(job, op_out);
    return 0;
  }

  if (*reproduce) {
    const LoadedConfig base = resolve_config(re_common);
    const McSettings mc_cfg = re_mc.resolve();
    if (re_figures.empty()) re_figures = figure_ids();
    std::filesystem::create_directories(re_dir);
    for (int fig : re_figures) {
      const Job job = figure_job(fig, base, mc_cfg);
      emit(job, (std::filesystem::path(re_dir) / (job.name + ".csv")).string());
    }
    return 0;
  }

  if (*rerun) {
    std::ifstream in(rr_record);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("cannot parse run record: ") + e.what());
    }
    const Job job = job_from_json(rec);
    std::string out = rr_out;
    if (out.empty()) out = rec.value("out", "");
    emit(job, out);
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gloc::ConfigError& e) {
    std::cerr << "gloc: " << e.what() << "\n";
    return 2;
  } catch (const gloc::NumericalError& e) {
    std::cerr << "gloc: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "gloc: " << e.what() << "\n";
    return 3;
  }
}
