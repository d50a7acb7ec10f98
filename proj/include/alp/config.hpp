#pragma once

// Flat "key = value" configuration files. '#' starts a comment.

#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alp/core.hpp"
#include "alp/data_io.hpp"

namespace alp {

class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
      std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError("empty key", lineno);
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static ConfigFile load(const std::filesystem::path& path) { return parse(read_file(path)); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get(const std::string& key, double fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return detail::parse_double(it->second, 0);
  }

  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& f : detail::split_csv_line(it->second)) out.push_back(detail::parse_double(f, 0));
    return out;
  }

  /// Keys present in the file but never read; callers report these as typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace alp
