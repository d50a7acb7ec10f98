#pragma once

// Command implementations behind the `alp` executable: train, compare and
// plotdata. Each returns a process exit code.

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alp/baselines.hpp"
#include "alp/config.hpp"
#include "alp/data_io.hpp"
#include "alp/drl.hpp"
#include "alp/nn/checkpoint.hpp"
#include "alp/report.hpp"
#include "alp/trainer.hpp"

namespace alp::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kInfeasible = 4 };

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Inputs

/// "synth:key=value,..." with keys n, count, rate, interval, seed, jitter.
struct SynthSpec {
  ScenarioSpec scenario;
  std::optional<std::size_t> n;
  std::size_t count = 1;
};

inline bool is_synth(const std::string& s) { return s.rfind("synth:", 0) == 0; }

inline SynthSpec parse_synth(const std::string& text) {
  if (!is_synth(text)) throw UsageError("synthetic data spec must start with 'synth:'");
  SynthSpec out;
  std::stringstream ss(text.substr(6));
  std::string item;
  auto number = [](const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw UsageError("bad value '" + v + "' for synth key '" + key + "'");
    }
  };
  auto whole = [&](const std::string& key, const std::string& v) {
    const double d = number(key, v);
    if (d < 0 || d != std::floor(d)) throw UsageError("synth key '" + key + "' needs a non-negative integer");
    return static_cast<std::uint64_t>(d);
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("synth entry '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq), v = item.substr(eq + 1);
    if (key == "n") out.n = whole(key, v);
    else if (key == "count") out.count = whole(key, v);
    else if (key == "rate") out.scenario.rate_per_hour = number(key, v);
    else if (key == "interval") {
      interval_start_hour(v);
      out.scenario.interval = v;
    } else if (key == "seed") out.scenario.seed = whole(key, v);
    else if (key == "jitter") out.scenario.ata_jitter = number(key, v);
    else throw UsageError("unknown synth key '" + key + "'");
  }
  if (out.n) out.scenario.count = *out.n;
  if (out.count == 0) throw UsageError("synth count must be >= 1");
  return out;
}

/// Synthetic instances seed, seed+1, ...; names get a _<k> suffix when more
/// than one is requested.
inline std::vector<Instance> synth_instances(const SynthSpec& s) {
  std::vector<Instance> out;
  for (std::size_t k = 0; k < s.count; ++k) {
    ScenarioSpec spec = s.scenario;
    spec.seed = s.scenario.seed + k;
    Instance inst = synthesize(spec);
    if (s.count > 1) inst.set_name(inst.name() + "_" + std::to_string(k));
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

/// Ikli-style CSV for .csv files, OR-Library text otherwise.
inline Instance load_instance(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return parse_ikli_csv(path);
  return parse_orlibrary(path);
}

inline std::vector<Instance> load_instances(const std::vector<std::string>& specs) {
  std::vector<Instance> out;
  for (const auto& s : specs) {
    if (is_synth(s)) {
      for (auto& inst : synth_instances(parse_synth(s))) out.push_back(std::move(inst));
      continue;
    }
    auto paths = expand_glob(s);
    if (paths.empty()) throw Error("no instance files match '" + s + "'");
    for (const auto& p : paths) out.push_back(load_instance(p));
  }
  return out;
}

struct Settings {
  env::EnvConfig env;
  policy::PolicyConfig policy;
  trainer::TrainConfig train;
  safety::AssignmentConfig safety;
};

inline Settings load_settings(const std::optional<std::filesystem::path>& path) {
  Settings s;
  if (!path) return s;
  ConfigFile f = ConfigFile::load(*path);
  s.env = env::EnvConfig::from(f);
  s.policy = policy::PolicyConfig::from(f);
  s.train = trainer::TrainConfig::from(f);
  const double attempts = f.get("max_attempts", static_cast<double>(s.safety.max_attempts));
  if (!(attempts >= 1) || attempts != std::floor(attempts)) throw ParseError("max_attempts must be a positive integer");
  s.safety.max_attempts = static_cast<std::size_t>(attempts);
  if (auto unused = f.unused_keys(); !unused.empty()) {
    std::string keys;
    for (const auto& k : unused) keys += (keys.empty() ? "" : ", ") + k;
    throw ParseError("unknown configuration keys: " + keys);
  }
  return s;
}

/// Verbosity from ALP_LOG: quiet, warn (default) or info.
inline int log_level() {
  const char* v = std::getenv("ALP_LOG");
  const std::string s = v ? v : "warn";
  if (s == "quiet" || s == "error") return 0;
  if (s == "info" || s == "debug") return 2;
  return 1;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::filesystem::path config;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> log;
  std::optional<std::size_t> episodes;
};

inline std::filesystem::path default_log_path(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".trainlog.csv";
}

inline int cmd_train(const TrainArgs& args, std::ostream& err) {
  Settings settings;
  try {
    settings = load_settings(args.config);
  } catch (const Error& e) {
    err << "error: configuration: " << e.what() << '\n';
    return kUsage;
  }
  settings.train.seed = args.seed;
  if (args.episodes) settings.train.episodes_per_scenario = *args.episodes;
  trainer::TrainData data;
  try {
    if (is_synth(args.data)) {
      const auto s = parse_synth(args.data);
      data.synthetic = s.scenario;
      if (s.n) settings.train.scenario_sizes = {*s.n};
    } else {
      data.instances = load_instances({args.data});
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: data: " << e.what() << '\n';
    return kDataError;
  }
  trainer::TrainResult result;
  try {
    const bool verbose = log_level() >= 2;
    result = trainer::train(data, settings.train, settings.env, settings.policy, settings.safety,
                            [&](const trainer::LogRow& row) {
                              if (verbose && row.episode % 100 == 0)
                                err << "episode " << row.episode << " reward " << row.reward << " cost " << row.cost
                                    << '\n';
                              return true;
                            });
  } catch (const InfeasibleInstance& e) {
    err << "error: infeasible: " << e.what() << '\n';
    return kInfeasible;
  }
  if (log_level() >= 1)
    for (const auto& s : result.skipped)
      err << "warning: episode " << s.episode << " on " << s.instance << " skipped: " << s.reason << '\n';
  nn::save_checkpoint(result.store, args.out);
  write_file(args.log.value_or(default_log_path(args.out)), trainer::write_train_log(result.log));
  return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::vector<std::string> instances;
  std::vector<std::string> methods{"fcfs", "tabu"};
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> config;
  std::optional<Seconds> buffer;
  std::optional<std::filesystem::path> out;
  ReportFormat format = ReportFormat::Csv;
  std::optional<std::filesystem::path> schedules_dir;
  bool omit_timing = false;
  std::uint64_t seed = 1;
  std::size_t cps_k = 2;
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"drl", "fcfs", "tabu", "oracle", "cps"};
  return m;
}

/// Nearest-rank 95th percentile.
inline double percentile95(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

inline ReportRow metrics_row(const Instance& inst, const std::string& method, const Schedule& s, double wall_ms) {
  ReportRow r;
  r.instance = inst.name();
  r.method = method;
  r.n = inst.size();
  r.rt = runway_throughput(s);
  r.total_cost = total_cost(inst, s);
  const auto d = delays(inst, s);
  double sum = 0;
  std::vector<double> late;
  for (double x : d) {
    late.push_back(std::max(0.0, x));
    sum += late.back();
  }
  r.mean_delay_s = late.empty() ? 0 : sum / static_cast<double>(late.size());
  r.p95_delay_s = percentile95(late);
  r.wall_ms = wall_ms;
  r.violations = validate_schedule(inst, s).size();
  if (r.violations) r.status = "infeasible: " + std::to_string(r.violations) + " violations";
  return r;
}

inline int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  for (const auto& m : args.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      err << "error: unknown method '" << m << "' (expected drl, fcfs, tabu, oracle, cps)\n";
      return kUsage;
    }
  const bool want_drl = std::find(args.methods.begin(), args.methods.end(), "drl") != args.methods.end();
  if (want_drl && !args.checkpoint) {
    err << "error: method drl needs --checkpoint\n";
    return kUsage;
  }
  if (args.instances.empty()) {
    err << "error: no instances given\n";
    return kUsage;
  }
  Settings settings;
  try {
    settings = load_settings(args.config);
  } catch (const Error& e) {
    err << "error: configuration: " << e.what() << '\n';
    return kUsage;
  }
  std::vector<Instance> instances;
  std::optional<nn::ParameterStore> store;
  try {
    instances = load_instances(args.instances);
    if (want_drl) store = nn::load_checkpoint(*args.checkpoint);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: data: " << e.what() << '\n';
    return kDataError;
  }
  if (args.buffer)
    for (auto& inst : instances) inst = inst.with_buffer(*args.buffer);

  RunReport report;
  bool infeasible = false;
  for (const auto& inst : instances) {
    const auto ienv = std::make_shared<Instance>(inst);
    for (const auto& method : args.methods) {
      std::optional<Schedule> schedule;
      std::string failure;
      const auto start = std::chrono::steady_clock::now();
      try {
        if (method == "fcfs") {
          schedule = baselines::fcfs(inst);
        } else if (method == "tabu") {
          baselines::TabuConfig tc;
          tc.seed = args.seed;
          schedule = baselines::tabu_search(inst, tc).schedule;
        } else if (method == "oracle" || method == "cps") {
          baselines::OracleConfig oc;
          if (method == "cps") oc.cps_k = args.cps_k;
          schedule = baselines::exact_oracle(inst, oc).schedule;
        } else {
          env::Environment e(ienv, settings.env);
          schedule = drl::drl_schedule(e, *store, settings.policy, settings.safety).schedule;
        }
      } catch (const InfeasibleInstance& e) {
        failure = std::string("infeasible: ") + e.what();
        infeasible = true;
      } catch (const InvalidArgument& e) {
        failure = std::string("skipped: ") + e.what();
      }
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (!schedule) {
        ReportRow r;
        r.instance = inst.name();
        r.method = method;
        r.n = inst.size();
        r.status = failure;
        report.rows.push_back(r);
        continue;
      }
      ReportRow r = metrics_row(inst, method, *schedule, args.omit_timing ? 0.0 : ms);
      if (r.violations) infeasible = true;
      report.rows.push_back(r);
      if (args.schedules_dir) {
        std::filesystem::create_directories(*args.schedules_dir);
        write_file(*args.schedules_dir / (inst.name() + "." + method + ".csv"), write_schedule_csv(inst, *schedule));
      }
    }
  }
  const std::string text = write_report(report, args.format);
  if (args.out) write_file(*args.out, text);
  else out << text;
  return infeasible ? kInfeasible : kOk;
}

// ---------------------------------------------------------------------------
// plotdata

struct PlotArgs {
  std::filesystem::path in;
  std::string kind;
  std::optional<std::filesystem::path> out;
  Seconds bin_width = 60;
};

inline const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> k{"delay_hist", "sequence", "throughput_bars", "quadrant", "training_curves"};
  return k;
}

inline ReportFormat guess_format(const std::string& text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  return (p != std::string::npos && text[p] == '[') ? ReportFormat::Json : ReportFormat::Csv;
}

/// CSV plot data for one figure kind; throws on bad input.
inline std::string plot_data(const std::string& text, const std::string& kind, Seconds bin_width = 60) {
  using detail::csv_field;
  using detail::format_double;
  std::ostringstream os;
  if (kind == "delay_hist") {
    if (!(bin_width > 0)) throw InvalidArgument("bin width must be > 0");
    std::map<long long, std::size_t> bins;
    for (const auto& r : read_schedule_rows(text))
      ++bins[static_cast<long long>(std::floor(std::max(0.0, r.delay) / bin_width))];
    os << "bin_start_s,count\n";
    if (!bins.empty())
      for (long long b = 0; b <= bins.rbegin()->first; ++b)
        os << format_double(static_cast<double>(b) * bin_width) << ',' << (bins.count(b) ? bins[b] : 0) << '\n';
  } else if (kind == "sequence") {
    auto rows = read_schedule_rows(text);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.landing < b.landing; });
    os << "id,wake,landing_time_s\n";
    for (const auto& r : rows) os << csv_field(r.id) << ',' << wake_letter(r.wake) << ',' << format_double(r.landing) << '\n';
  } else if (kind == "throughput_bars") {
    os << "instance,method,rt\n";
    for (const auto& r : read_report(text, guess_format(text)).rows)
      if (r.status == "ok") os << csv_field(r.instance) << ',' << csv_field(r.method) << ',' << r.rt << '\n';
  } else if (kind == "quadrant") {
    std::vector<std::string> order;
    std::map<std::string, std::array<double, 3>> acc;  // rt sum, wall sum, count
    for (const auto& r : read_report(text, guess_format(text)).rows) {
      if (r.status != "ok") continue;
      if (!acc.count(r.method)) order.push_back(r.method);
      auto& a = acc[r.method];
      a[0] += r.rt;
      a[1] += r.wall_ms;
      a[2] += 1;
    }
    os << "method,mean_rt,mean_wall_ms\n";
    for (const auto& m : order)
      os << csv_field(m) << ',' << format_double(acc[m][0] / acc[m][2]) << ',' << format_double(acc[m][1] / acc[m][2])
         << '\n';
  } else if (kind == "training_curves") {
    const auto rows = trainer::read_train_log(text);
    constexpr std::size_t kWindow = 100;
    double sum_r = 0, sum_c = 0;
    os << "episode,reward,cost,avg_delay_s,reward_ma100,cost_ma100\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sum_r += rows[i].reward;
      sum_c += rows[i].cost;
      if (i >= kWindow) {
        sum_r -= rows[i - kWindow].reward;
        sum_c -= rows[i - kWindow].cost;
      }
      const double w = static_cast<double>(std::min(i + 1, kWindow));
      os << rows[i].episode << ',' << format_double(rows[i].reward) << ',' << format_double(rows[i].cost) << ','
         << format_double(rows[i].avg_delay_s) << ',' << format_double(sum_r / w) << ',' << format_double(sum_c / w)
         << '\n';
    }
  } else {
    throw UsageError("unknown plot kind '" + kind + "'");
  }
  return os.str();
}

inline int cmd_plotdata(const PlotArgs& args, std::ostream& out, std::ostream& err) {
  if (std::find(plot_kinds().begin(), plot_kinds().end(), args.kind) == plot_kinds().end()) {
    err << "error: unknown plot kind '" << args.kind
        << "' (expected delay_hist, sequence, throughput_bars, quadrant, training_curves)\n";
    return kUsage;
  }
  std::string text;
  try {
    text = plot_data(read_file(args.in), args.kind, args.bin_width);
  } catch (const Error& e) {
    err << "error: data: " << e.what() << '\n';
    return kDataError;
  }
  if (args.out) write_file(*args.out, text);
  else out << text;
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Single-runway aircraft landing scheduler"};
  app.require_subcommand(1);

  TrainArgs targs;
  std::string config;
  std::optional<std::string> log;
  std::optional<std::size_t> episodes;
  auto* train = app.add_subcommand("train", "Train the actor-critic scheduler");
  train->add_option("--data", targs.data, "Instance file, glob or synth:key=value,... spec")->required();
  train->add_option("--config", config, "Configuration file (key = value)")->required();
  train->add_option("--out", targs.out, "Checkpoint path")->required();
  train->add_option("--seed", targs.seed, "Random seed");
  train->add_option("--log", log, "Training log CSV (default <out>.trainlog.csv)");
  train->add_option("--episodes", episodes, "Override episodes per scenario");

  CompareArgs cargs;
  std::string methods = "fcfs,tabu";
  std::string format = "csv";
  std::optional<std::string> checkpoint, cconfig, cout_path, sched_dir;
  auto* compare = app.add_subcommand("compare", "Run scheduling methods and report metrics");
  compare->add_option("--instances", cargs.instances, "Instance files, globs or synth:key=value,... specs")
      ->required();
  compare->add_option("--methods", methods, "Comma list of drl, fcfs, tabu, oracle, cps");
  compare->add_option("--checkpoint", checkpoint, "Trained checkpoint (needed for drl)");
  compare->add_option("--config", cconfig, "Configuration file used at training time");
  compare->add_option("--buffer", cargs.buffer, "Override the separation buffer (s)");
  compare->add_option("--out", cout_path, "Report path (default stdout)");
  compare->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  compare->add_option("--schedules", sched_dir, "Directory for per-method schedule CSVs");
  compare->add_flag("--omit-timing", cargs.omit_timing, "Write wall_ms as 0 for reproducible reports");
  compare->add_option("--seed", cargs.seed, "Tabu tie-break seed");
  compare->add_option("--cps-k", cargs.cps_k, "Position-shift limit for the cps method");

  PlotArgs pargs;
  std::optional<std::string> pout;
  auto* plot = app.add_subcommand("plotdata", "Turn reports, schedules or training logs into plot CSVs");
  plot->add_option("--in", pargs.in, "Input report, schedule CSV or training log")->required();
  plot->add_option("--kind", pargs.kind, "delay_hist, sequence, throughput_bars, quadrant, training_curves")
      ->required();
  plot->add_option("--out", pout, "Output CSV (default stdout)");
  plot->add_option("--bin", pargs.bin_width, "Histogram bin width in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      targs.config = config;
      targs.log = log ? std::optional<std::filesystem::path>(*log) : std::nullopt;
      targs.episodes = episodes;
      return cmd_train(targs, err);
    }
    if (*compare) {
      cargs.methods.clear();
      std::stringstream ss(methods);
      for (std::string m; std::getline(ss, m, ',');)
        if (!m.empty()) cargs.methods.push_back(m);
      if (checkpoint) cargs.checkpoint = *checkpoint;
      if (cconfig) cargs.config = *cconfig;
      if (cout_path) cargs.out = *cout_path;
      if (sched_dir) cargs.schedules_dir = *sched_dir;
      cargs.format = format == "json" ? ReportFormat::Json : ReportFormat::Csv;
      return cmd_compare(cargs, out, err);
    }
    if (pout) pargs.out = *pout;
    return cmd_plotdata(pargs, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleInstance& e) {
    err << "error: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace alp::cli
