#pragma once

// Benchmark report rows and their CSV / JSON encodings.

#include <charconv>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alp/core.hpp"

namespace alp {

struct ReportRow {
  std::string instance;
  std::string method;
  std::size_t n = 0;
  int rt = 0;                 // runway throughput, aircraft per hour
  double total_cost = 0;
  double mean_delay_s = 0;
  double p95_delay_s = 0;
  double wall_ms = 0;
  std::size_t violations = 0;
  std::string status = "ok";  // "ok" or "skipped: <reason>"

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct RunReport {
  std::vector<ReportRow> rows;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

enum class ReportFormat { Csv, Json };

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t row) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("malformed number '" + std::string(s) + "'", row);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (c == '"') {
      if (quoted && k + 1 < line.size() && line[k + 1] == '"') {
        cur.push_back('"');
        ++k;
      } else {
        quoted = !quoted;
      }
    } else if (c == ',' && !quoted) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

}  // namespace detail

inline constexpr const char* kReportCsvHeader =
    "instance,method,n,rt,total_cost,mean_delay_s,p95_delay_s,wall_ms,violations,status";

inline std::string write_report(const RunReport& report, ReportFormat format) {
  using detail::format_double;
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
      nlohmann::ordered_json j;
      j["instance"] = r.instance;
      j["method"] = r.method;
      j["n"] = r.n;
      j["rt"] = r.rt;
      j["total_cost"] = r.total_cost;
      j["mean_delay_s"] = r.mean_delay_s;
      j["p95_delay_s"] = r.p95_delay_s;
      j["wall_ms"] = r.wall_ms;
      j["violations"] = r.violations;
      j["status"] = r.status;
      rows.push_back(std::move(j));
    }
    return rows.dump(2) + "\n";
  }
  std::ostringstream os;
  os << kReportCsvHeader << '\n';
  for (const auto& r : report.rows) {
    os << detail::csv_field(r.instance) << ',' << detail::csv_field(r.method) << ',' << r.n << ','
       << r.rt << ',' << format_double(r.total_cost) << ',' << format_double(r.mean_delay_s) << ','
       << format_double(r.p95_delay_s) << ',' << format_double(r.wall_ms) << ',' << r.violations
       << ',' << detail::csv_field(r.status) << '\n';
  }
  return os.str();
}

inline RunReport read_report(const std::string& text, ReportFormat format) {
  RunReport report;
  if (format == ReportFormat::Json) {
    nlohmann::json rows;
    try {
      rows = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("report json: ") + e.what());
    }
    if (!rows.is_array()) throw ParseError("report json must be an array of rows");
    for (const auto& j : rows) {
      try {
        ReportRow r;
        r.instance = j.at("instance").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.rt = j.at("rt").get<int>();
        r.total_cost = j.at("total_cost").get<double>();
        r.mean_delay_s = j.at("mean_delay_s").get<double>();
        r.p95_delay_s = j.at("p95_delay_s").get<double>();
        r.wall_ms = j.at("wall_ms").get<double>();
        r.violations = j.at("violations").get<std::size_t>();
        r.status = j.at("status").get<std::string>();
        report.rows.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report json row: ") + e.what(), report.rows.size() + 1);
      }
    }
    return report;
  }
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty report");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportCsvHeader) throw ParseError("unexpected report header", lineno);
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 10) throw ParseError("expected 10 report fields", lineno);
    ReportRow r;
    r.instance = f[0];
    r.method = f[1];
    r.n = static_cast<std::size_t>(detail::parse_double(f[2], lineno));
    r.rt = static_cast<int>(detail::parse_double(f[3], lineno));
    r.total_cost = detail::parse_double(f[4], lineno);
    r.mean_delay_s = detail::parse_double(f[5], lineno);
    r.p95_delay_s = detail::parse_double(f[6], lineno);
    r.wall_ms = detail::parse_double(f[7], lineno);
    r.violations = static_cast<std::size_t>(detail::parse_double(f[8], lineno));
    r.status = f[9];
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace alp
