#pragma once

// Benchmark instance readers (Ikli CSV, OR-Library airland), synthetic
// scenario generation and schedule CSV serialization.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "alp/core.hpp"
#include "alp/random.hpp"
#include "alp/report.hpp"

namespace alp {

struct WindowRule {
  Seconds before = 600;  // E = sta - before, clamped at 0
  Seconds after = 900;   // L = sta + after
};

struct IkliColumns {
  std::string id = "sr";
  std::string model = "mdl";
  std::string wake = "cat";
  std::string sta = "sta";
  std::string ata = "ata";
  std::array<std::string, 4> costs{"cost_300", "cost_900", "cost_1800", "cost_3600"};
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << bytes;
  if (!out) throw Error("write failed: " + path.string());
}

/// Parses Ikli-format CSV text. Row numbers in errors are file line numbers
/// (header = 1).
inline Instance parse_ikli_csv_text(const std::string& text, WindowRule window = {},
                                    const IkliColumns& cols = {}) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.find_first_not_of(" \t\r") == std::string::npos) throw ParseError("empty file");

  const auto header = detail::split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("missing column '" + name + "'", lineno);
  };
  const std::size_t c_id = column(cols.id), c_mdl = column(cols.model), c_wake = column(cols.wake),
                    c_sta = column(cols.sta), c_ata = column(cols.ata);
  std::array<std::size_t, 4> c_cost{};
  for (std::size_t k = 0; k < 4; ++k) c_cost[k] = column(cols.costs[k]);

  std::vector<Aircraft> fleet;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() < header.size()) throw ParseError("missing fields", lineno);
    Aircraft a;
    a.id = f[c_id];
    a.model = f[c_mdl];
    auto wake = wake_from_letter(f[c_wake]);
    if (!wake) throw ParseError("unknown wake category '" + f[c_wake] + "'", lineno);
    a.wake = *wake;
    const Seconds sta = detail::parse_double(f[c_sta], lineno);
    const Seconds ata = detail::parse_double(f[c_ata], lineno);
    if (sta < 0 || ata < 0) throw ParseError("negative time", lineno);
    std::array<double, 4> c{};
    for (std::size_t k = 0; k < 4; ++k) {
      c[k] = detail::parse_double(f[c_cost[k]], lineno);
      if (c[k] < 0) throw ParseError("negative cost coefficient", lineno);
    }
    a.target = sta;
    a.arrival = ata;
    a.earliest = std::max(0.0, sta - window.before);
    a.latest = sta + window.after;
    a.cost = CostProfile::tiered(c[0], c[1], c[2], c[3]);
    fleet.push_back(std::move(a));
  }
  if (fleet.empty()) throw ParseError("no aircraft rows");
  try {
    return Instance(std::move(fleet));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

/// Instance names follow the file stem, e.g. "alp_7_30".
inline Instance parse_ikli_csv(const std::filesystem::path& path, WindowRule window = {},
                               const IkliColumns& cols = {}) {
  Instance inst = parse_ikli_csv_text(read_file(path), window, cols);
  inst.set_name(path.stem().string());
  return inst;
}

/// OR-Library airland layout: "n freeze", then per aircraft
/// "appearance E T L early_penalty late_penalty" followed by n separations.
/// Wake classes are not part of the format; aircraft are tagged Medium and
/// the per-pair matrix overrides class separations.
inline Instance parse_orlibrary_text(const std::string& text,
                                     Seconds buffer = Instance::kDefaultBuffer) {
  std::istringstream is(text);
  std::vector<std::string> tokens;
  for (std::string tok; is >> tok;) tokens.push_back(tok);
  std::size_t pos = 0;
  auto next = [&](const char* what) {
    if (pos >= tokens.size()) throw ParseError(std::string("truncated file: expected ") + what);
    const std::string& t = tokens[pos++];
    return detail::parse_double(t, 0);
  };
  const double n_raw = next("aircraft count");
  if (n_raw < 1 || n_raw != std::floor(n_raw)) throw ParseError("invalid aircraft count");
  const auto n = static_cast<std::size_t>(n_raw);
  const Seconds freeze = next("freeze time");

  std::vector<Aircraft> fleet(n);
  std::vector<Seconds> sep(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Aircraft& a = fleet[i];
    a.id = std::to_string(i + 1);
    a.model = "orlib";
    a.wake = WakeClass::Medium;
    a.arrival = next("appearance time");
    a.earliest = next("earliest time");
    a.target = next("target time");
    a.latest = next("latest time");
    const double early = next("early penalty");
    const double late = next("late penalty");
    if (early < 0 || late < 0) throw ParseError("negative penalty", i + 1);
    a.cost = CostProfile::linear(early, late);
    for (std::size_t j = 0; j < n; ++j) {
      const Seconds s = next("separation entry");
      if (s < 0) throw ParseError("negative separation", i + 1);
      if (i != j) sep[i * n + j] = s;
    }
  }
  if (pos != tokens.size())
    throw ParseError("aircraft count mismatch: " + std::to_string(tokens.size() - pos) +
                     " trailing values");
  try {
    Instance inst(std::move(fleet), SeparationMatrix{}, buffer, {}, std::move(sep));
    inst.set_freeze_time(freeze);
    return inst;
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

inline Instance parse_orlibrary(const std::filesystem::path& path,
                                Seconds buffer = Instance::kDefaultBuffer) {
  Instance inst = parse_orlibrary_text(read_file(path), buffer);
  inst.set_name(path.stem().string());
  return inst;
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

struct ScenarioSpec {
  std::size_t count = 10;
  std::string interval = "7-11";  // start hour - end hour of the traffic period
  std::uint64_t seed = 0;
  double rate_per_hour = 20;      // mean arrivals per hour
  Seconds ata_jitter = 120;       // stddev of actual vs scheduled arrival
  std::array<std::array<double, 2>, 4> cost_ranges{{{0.5, 1.5}, {1.0, 3.0}, {2.0, 6.0}, {4.0, 12.0}}};
  std::array<double, 3> wake_mix{0.2, 0.6, 0.2};  // Heavy, Medium, Light
  WindowRule window{};
  Seconds buffer = Instance::kDefaultBuffer;
};

inline int interval_start_hour(const std::string& interval) {
  const auto dash = interval.find('-');
  try {
    return std::stoi(interval.substr(0, dash));
  } catch (const std::exception&) {
    throw InvalidArgument("bad interval label '" + interval + "'");
  }
}

/// Deterministic synthetic traffic: Poisson arrivals starting at the interval's
/// hour, random wake mix and tiered cost coefficients.
inline Instance synthesize(const ScenarioSpec& spec) {
  if (spec.count < 1) throw InvalidArgument("scenario needs at least one aircraft");
  if (!(spec.rate_per_hour > 0)) throw InvalidArgument("arrival rate must be > 0");
  Rng rng(spec.seed);
  const int hour = interval_start_hour(spec.interval);
  static constexpr std::array<std::array<const char*, 3>, 3> kModels{
      {{"A332", "B77W", "A359"}, {"A320", "B738", "A321"}, {"E145", "C525", "AT72"}}};

  Seconds clock = hour * 3600.0;
  std::vector<Aircraft> fleet;
  fleet.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    clock += rng.exponential(spec.rate_per_hour / 3600.0);
    Aircraft a;
    a.id = std::to_string(i + 1);
    const double u = rng.uniform();
    a.wake = u < spec.wake_mix[0]                      ? WakeClass::Heavy
             : u < spec.wake_mix[0] + spec.wake_mix[1] ? WakeClass::Medium
                                                       : WakeClass::Light;
    a.model = kModels[wake_code(a.wake)][rng.index(3)];
    a.target = std::round(clock);
    a.arrival = std::max(0.0, std::round(a.target + rng.normal(0.0, spec.ata_jitter)));
    a.earliest = std::max(0.0, a.target - spec.window.before);
    a.latest = a.target + spec.window.after;
    std::array<double, 4> c{};
    for (std::size_t k = 0; k < 4; ++k)
      c[k] = std::round(rng.uniform(spec.cost_ranges[k][0], spec.cost_ranges[k][1]) * 100) / 100;
    a.cost = CostProfile::tiered(c[0], c[1], c[2], c[3]);
    fleet.push_back(std::move(a));
  }
  Instance inst(std::move(fleet), SeparationMatrix{}, spec.buffer);
  inst.set_name("alp_" + std::to_string(hour) + "_" + std::to_string(spec.count));
  return inst;
}

/// Writes an instance back out in Ikli CSV form (tiered profiles only).
inline std::string write_ikli_csv(const Instance& inst) {
  std::ostringstream os;
  os << "sr,mdl,cat,sta,ata,cost_300,cost_900,cost_1800,cost_3600\n";
  for (const auto& a : inst.aircraft()) {
    os << detail::csv_field(a.id) << ',' << detail::csv_field(a.model) << ','
       << wake_letter(a.wake) << ',' << detail::format_double(a.target) << ','
       << detail::format_double(a.arrival) << ',' << detail::format_double(a.cost.c300) << ','
       << detail::format_double(a.cost.c900) << ',' << detail::format_double(a.cost.c1800) << ','
       << detail::format_double(a.cost.c3600) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Schedules

inline constexpr const char* kScheduleCsvHeader = "id,wake,landing_time_s,target_s,delay_s";

/// One row per aircraft, sorted by landing time.
inline std::string write_schedule_csv(const Instance& inst, const Schedule& s) {
  std::ostringstream os;
  os << kScheduleCsvHeader << '\n';
  for (std::size_t i : s.landing_order()) {
    const auto& a = inst[i];
    os << detail::csv_field(a.id) << ',' << wake_letter(a.wake) << ','
       << detail::format_double(s.at(i)) << ',' << detail::format_double(a.target) << ','
       << detail::format_double(deviation(s.at(i), a.target).late) << '\n';
  }
  return os.str();
}

struct ScheduleRow {
  std::string id;
  WakeClass wake;
  Seconds landing;
  Seconds target;
  Seconds delay;
};

inline std::vector<ScheduleRow> read_schedule_rows(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw ParseError("empty schedule file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScheduleCsvHeader) throw ParseError("unexpected schedule header", lineno);
  std::vector<ScheduleRow> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 5) throw ParseError("expected 5 schedule fields", lineno);
    auto wake = wake_from_letter(f[1]);
    if (!wake) throw ParseError("unknown wake category '" + f[1] + "'", lineno);
    rows.push_back({f[0], *wake, detail::parse_double(f[2], lineno),
                    detail::parse_double(f[3], lineno), detail::parse_double(f[4], lineno)});
  }
  return rows;
}

inline Schedule read_schedule_csv(const Instance& inst, const std::string& text) {
  std::map<std::string, Seconds> by_id;
  for (const auto& r : read_schedule_rows(text)) by_id[r.id] = r.landing;
  return Schedule::from_ids(inst, by_id);
}

}  // namespace alp
