#pragma once

// Aircraft landing problem model: wake classes, separations, cost profiles,
// instances, schedules, feasibility checking and evaluation metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace alp {

using Seconds = double;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. `row` is the 1-based data row when known, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0)
      : Error(row ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Wake classes and separations

enum class WakeClass : std::uint8_t { Heavy = 0, Medium = 1, Light = 2 };

inline constexpr std::array<WakeClass, 3> kWakeClasses{WakeClass::Heavy, WakeClass::Medium,
                                                       WakeClass::Light};

constexpr int wake_code(WakeClass c) noexcept { return static_cast<int>(c); }

constexpr char wake_letter(WakeClass c) noexcept {
  switch (c) {
    case WakeClass::Heavy: return 'H';
    case WakeClass::Medium: return 'M';
    case WakeClass::Light: return 'L';
  }
  return '?';
}

inline std::optional<WakeClass> wake_from_letter(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  switch (s.front()) {
    case 'H': case 'h': return WakeClass::Heavy;
    case 'M': case 'm': return WakeClass::Medium;
    case 'L': case 'l': return WakeClass::Light;
    default: return std::nullopt;
  }
}

/// Minimum seconds between consecutive landings, indexed (lead, follow).
class SeparationMatrix {
 public:
  using Grid = std::array<std::array<Seconds, 3>, 3>;

  /// Wake-vortex separations used by the Paris-Orly benchmark data.
  SeparationMatrix() : grid_{{{96, 157, 240}, {60, 69, 156}, {60, 69, 82}}} {}

  explicit SeparationMatrix(const Grid& grid) : grid_(grid) {
    for (const auto& row : grid_)
      for (Seconds v : row)
        if (!(v > 0) || !std::isfinite(v))
          throw InvalidArgument("separation entries must be finite and > 0");
  }

  Seconds operator()(WakeClass lead, WakeClass follow) const noexcept {
    return grid_[wake_code(lead)][wake_code(follow)];
  }

  const Grid& grid() const noexcept { return grid_; }

  friend bool operator==(const SeparationMatrix&, const SeparationMatrix&) = default;

 private:
  Grid grid_;
};

inline Seconds required_separation(WakeClass lead, WakeClass follow, const SeparationMatrix& m) {
  return m(lead, follow);
}

// ---------------------------------------------------------------------------
// Costs

inline constexpr std::array<Seconds, 4> kTierBounds{300, 900, 1800, 3600};

/// Per-second delay coefficients. Tiered profiles (c300..c3600) charge lateness
/// piecewise; linear profiles carry the classic early/late penalty pair.
struct CostProfile {
  enum class Kind : std::uint8_t { Tiered, Linear };

  Kind kind = Kind::Tiered;
  double c300 = 0, c900 = 0, c1800 = 0, c3600 = 0;
  double early = 0, late = 0;

  static CostProfile tiered(double c300, double c900, double c1800, double c3600) {
    CostProfile p;
    p.kind = Kind::Tiered;
    p.c300 = c300;
    p.c900 = c900;
    p.c1800 = c1800;
    p.c3600 = c3600;
    p.check();
    return p;
  }

  static CostProfile linear(double early, double late) {
    CostProfile p;
    p.kind = Kind::Linear;
    p.early = early;
    p.late = late;
    p.check();
    return p;
  }

  std::array<double, 4> tiers() const noexcept { return {c300, c900, c1800, c3600}; }

  /// True when cost never decreases as the landing moves later.
  bool delay_monotone() const noexcept { return kind == Kind::Tiered || early == 0; }

  void check() const {
    for (double c : {c300, c900, c1800, c3600, early, late})
      if (!(c >= 0) || !std::isfinite(c))
        throw InvalidArgument("cost coefficients must be finite and >= 0");
  }

  friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

/// Piecewise delay cost over the 300/900/1800 s tier boundaries.
inline double tiered_delay_cost(Seconds d, const CostProfile& p) {
  if (!(d >= 0)) throw InvalidArgument("delay must be >= 0");
  if (d <= 300) return d * p.c300;
  if (d <= 900) return 300 * p.c300 + (d - 300) * p.c900;
  if (d <= 1800) return 300 * p.c300 + 600 * p.c900 + (d - 900) * p.c1800;
  return 300 * p.c300 + 600 * p.c900 + 900 * p.c1800 + (d - 1800) * p.c3600;
}

struct Deviation {
  Seconds early = 0;  // alpha
  Seconds late = 0;   // beta
};

inline Deviation deviation(Seconds landing, Seconds target) noexcept {
  return {std::max(target - landing, 0.0), std::max(landing - target, 0.0)};
}

/// Cost of one aircraft's deviation. Earliness is free under tiered profiles.
inline double deviation_cost(const CostProfile& p, Deviation d) {
  if (p.kind == CostProfile::Kind::Linear) return p.early * d.early + p.late * d.late;
  return tiered_delay_cost(d.late, p);
}

// ---------------------------------------------------------------------------
// Instances

struct Aircraft {
  std::string id;
  std::string model;
  WakeClass wake = WakeClass::Medium;
  Seconds target = 0;    // T
  Seconds arrival = 0;   // ata / appearance time, drives FCFS order
  Seconds earliest = 0;  // E
  Seconds latest = 0;    // L
  CostProfile cost;
};

class Instance {
 public:
  static constexpr Seconds kDefaultBuffer = 30;

  Instance() = default;

  /// `precedence` holds (before, after) index pairs. `pair_separation`, when
  /// non-empty, is an n*n row-major (lead, follow) override of the class matrix.
  Instance(std::vector<Aircraft> aircraft, SeparationMatrix separation = {},
           Seconds buffer = kDefaultBuffer,
           std::vector<std::pair<std::size_t, std::size_t>> precedence = {},
           std::vector<Seconds> pair_separation = {})
      : aircraft_(std::move(aircraft)),
        separation_(separation),
        buffer_(buffer),
        precedence_(std::move(precedence)),
        pair_separation_(std::move(pair_separation)) {
    validate();
    for (std::size_t i = 0; i < aircraft_.size(); ++i) index_.emplace(aircraft_[i].id, i);
  }

  std::size_t size() const noexcept { return aircraft_.size(); }
  const Aircraft& operator[](std::size_t i) const { return aircraft_[i]; }
  const std::vector<Aircraft>& aircraft() const noexcept { return aircraft_; }
  const SeparationMatrix& separation_matrix() const noexcept { return separation_; }
  const std::vector<Seconds>& pair_separation() const noexcept { return pair_separation_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& precedence() const noexcept {
    return precedence_;
  }
  Seconds buffer() const noexcept { return buffer_; }

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  Seconds freeze_time() const noexcept { return freeze_time_; }
  void set_freeze_time(Seconds t) { freeze_time_ = t; }

  /// Copy with a different safety buffer.
  Instance with_buffer(Seconds b) const {
    Instance copy = *this;
    if (!(b >= 0)) throw InvalidArgument("buffer must be >= 0");
    copy.buffer_ = b;
    return copy;
  }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Separation when `lead` lands before `follow`, excluding the buffer.
  Seconds separation(std::size_t lead, std::size_t follow) const {
    if (!pair_separation_.empty()) return pair_separation_[lead * size() + follow];
    return separation_(aircraft_[lead].wake, aircraft_[follow].wake);
  }

  /// Separation plus buffer.
  Seconds required_gap(std::size_t lead, std::size_t follow) const {
    return separation(lead, follow) + buffer_;
  }

  Seconds max_required_gap() const {
    Seconds m = 0;
    if (!pair_separation_.empty()) {
      for (Seconds s : pair_separation_) m = std::max(m, s);
    } else {
      for (const auto& row : separation_.grid())
        for (Seconds s : row) m = std::max(m, s);
    }
    return m + buffer_;
  }

  bool must_precede(std::size_t before, std::size_t after) const {
    for (const auto& [a, b] : precedence_)
      if (a == before && b == after) return true;
    return false;
  }

 private:
  void validate() const {
    if (aircraft_.empty()) throw InvalidArgument("instance needs at least one aircraft");
    if (!(buffer_ >= 0) || !std::isfinite(buffer_)) throw InvalidArgument("buffer must be >= 0");
    std::unordered_map<std::string, int> seen;
    for (const auto& a : aircraft_) {
      if (!seen.emplace(a.id, 0).second) throw InvalidArgument("duplicate aircraft id: " + a.id);
      for (Seconds t : {a.target, a.arrival, a.earliest, a.latest})
        if (!std::isfinite(t) || t < 0)
          throw InvalidArgument("aircraft " + a.id + ": times must be finite and >= 0");
      if (!(a.earliest <= a.target && a.target <= a.latest))
        throw InvalidArgument("aircraft " + a.id + ": requires E <= T <= L");
      a.cost.check();
    }
    const std::size_t n = aircraft_.size();
    if (!pair_separation_.empty() && pair_separation_.size() != n * n)
      throw InvalidArgument("pair separation override must be n*n");
    for (const auto& [a, b] : precedence_)
      if (a >= n || b >= n || a == b) throw InvalidArgument("precedence pair out of range");
    if (!precedence_acyclic()) throw InvalidArgument("precedence relation has a cycle");
  }

  bool precedence_acyclic() const {
    const std::size_t n = aircraft_.size();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& [a, b] : precedence_) {
      out[a].push_back(b);
      ++indeg[b];
    }
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) stack.push_back(i);
    std::size_t visited = 0;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      ++visited;
      for (std::size_t w : out[v])
        if (--indeg[w] == 0) stack.push_back(w);
    }
    return visited == n;
  }

  std::string name_;
  std::vector<Aircraft> aircraft_;
  SeparationMatrix separation_;
  Seconds buffer_ = kDefaultBuffer;
  std::vector<std::pair<std::size_t, std::size_t>> precedence_;
  std::vector<Seconds> pair_separation_;
  Seconds freeze_time_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Schedules

/// Landing times aligned with the instance's aircraft indices; unset entries
/// are unscheduled.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::size_t n) : times_(n) {}
  explicit Schedule(std::vector<std::optional<Seconds>> times) : times_(std::move(times)) {}

  static Schedule complete(const std::vector<Seconds>& times) {
    Schedule s(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) s.times_[i] = times[i];
    return s;
  }

  /// Build from id -> time pairs; throws on ids the instance does not know.
  static Schedule from_ids(const Instance& inst, const std::map<std::string, Seconds>& by_id) {
    Schedule s(inst.size());
    for (const auto& [id, t] : by_id) {
      auto idx = inst.index_of(id);
      if (!idx) throw InvalidArgument("unknown aircraft id in schedule: " + id);
      s.times_[*idx] = t;
    }
    return s;
  }

  std::size_t size() const noexcept { return times_.size(); }
  bool assigned(std::size_t i) const { return times_.at(i).has_value(); }
  Seconds at(std::size_t i) const {
    if (!times_.at(i)) throw InvalidArgument("aircraft " + std::to_string(i) + " is unscheduled");
    return *times_[i];
  }
  const std::optional<Seconds>& operator[](std::size_t i) const { return times_[i]; }
  void set(std::size_t i, Seconds t) { times_.at(i) = t; }
  void clear(std::size_t i) { times_.at(i).reset(); }

  std::size_t assigned_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(times_.begin(), times_.end(), [](const auto& t) { return t.has_value(); }));
  }
  bool is_complete() const noexcept { return assigned_count() == times_.size(); }

  std::vector<Seconds> landing_times() const {
    std::vector<Seconds> out;
    for (const auto& t : times_)
      if (t) out.push_back(*t);
    return out;
  }

  /// Indices of scheduled aircraft ordered by landing time, ties by index.
  std::vector<std::size_t> landing_order() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (times_[i]) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return *times_[a] < *times_[b]; });
    return idx;
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<std::optional<Seconds>> times_;
};

/// delta_ij: i lands before j; equal times are ordered by id.
inline bool lands_before(const Instance& inst, const Schedule& s, std::size_t i, std::size_t j) {
  const Seconds xi = s.at(i), xj = s.at(j);
  if (xi != xj) return xi < xj;
  return inst[i].id < inst[j].id;
}

/// Earliest time after `lead_time` that keeps at least `gap` seconds of
/// separation under floating-point subtraction.
inline Seconds separated_after(Seconds lead_time, Seconds gap) {
  Seconds t = lead_time + gap;
  while (t - lead_time < gap) t = std::nextafter(t, std::numeric_limits<Seconds>::infinity());
  return t;
}

/// Latest time before `follow_time` that keeps at least `gap` seconds.
inline Seconds separated_before(Seconds follow_time, Seconds gap) {
  Seconds t = follow_time - gap;
  while (follow_time - t < gap) t = std::nextafter(t, -std::numeric_limits<Seconds>::infinity());
  return t;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind : std::uint8_t { Window, Separation, Precedence };
  Kind kind;
  std::string first;
  std::string second;  // empty for window violations
  double required;
  double actual;
};

struct ViolationReport {
  std::vector<Violation> violations;
  bool feasible() const noexcept { return violations.empty(); }
  std::size_t size() const noexcept { return violations.size(); }
  std::size_t count(Violation::Kind k) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [k](const Violation& v) { return v.kind == k; }));
  }
};

/// Checks windows, all-pairs separation (plus buffer, earlier lander leads)
/// and precedence. Every aircraft must be scheduled.
inline ViolationReport validate_schedule(const Instance& inst, const Schedule& s) {
  if (s.size() != inst.size())
    throw InvalidArgument("schedule size does not match instance");
  ViolationReport report;
  const std::size_t n = inst.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Seconds x = s.at(i);
    const auto& a = inst[i];
    if (x < a.earliest)
      report.violations.push_back({Violation::Kind::Window, a.id, {}, a.earliest, x});
    else if (x > a.latest)
      report.violations.push_back({Violation::Kind::Window, a.id, {}, a.latest, x});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool i_first = lands_before(inst, s, i, j);
      const std::size_t lead = i_first ? i : j, follow = i_first ? j : i;
      const Seconds required = inst.required_gap(lead, follow);
      const Seconds actual = s.at(follow) - s.at(lead);
      if (actual < required)
        report.violations.push_back(
            {Violation::Kind::Separation, inst[lead].id, inst[follow].id, required, actual});
    }
  }
  for (const auto& [before, after] : inst.precedence()) {
    if (s.at(before) >= s.at(after))
      report.violations.push_back({Violation::Kind::Precedence, inst[before].id, inst[after].id,
                                   s.at(after), s.at(before)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Metrics

inline double total_cost(const Instance& inst, const Schedule& s) {
  double cost = 0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    cost += deviation_cost(inst[i].cost, deviation(s.at(i), inst[i].target));
  return cost;
}

inline constexpr Seconds kThroughputWindow = 3600;

/// Largest number of landings in any half-open hour [t, t + 3600) anchored at
/// a landing time.
inline int runway_throughput(const Schedule& s) {
  std::vector<Seconds> t = s.landing_times();
  if (t.empty()) throw InvalidArgument("throughput of an empty schedule");
  std::sort(t.begin(), t.end());
  std::size_t best = 0, hi = 0;
  for (std::size_t lo = 0; lo < t.size(); ++lo) {
    hi = std::max(hi, lo);
    while (hi < t.size() && t[hi] < t[lo] + kThroughputWindow) ++hi;
    best = std::max(best, hi - lo);
  }
  return static_cast<int>(best);
}

struct DelayHistogram {
  Seconds bin_width = 60;
  std::vector<std::size_t> counts;  // bin k covers [k*w, (k+1)*w)

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

inline DelayHistogram delay_histogram(const Instance& inst, const Schedule& s, Seconds bin_width) {
  if (!(bin_width > 0)) throw InvalidArgument("bin width must be > 0");
  DelayHistogram h{bin_width, {}};
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const Seconds late = deviation(s.at(i), inst[i].target).late;
    const auto bin = static_cast<std::size_t>(std::floor(late / bin_width));
    if (h.counts.size() <= bin) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

/// Lateness of each scheduled aircraft, in index order.
inline std::vector<Seconds> delays(const Instance& inst, const Schedule& s) {
  std::vector<Seconds> d;
  d.reserve(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i)
    d.push_back(deviation(s.at(i), inst[i].target).late);
  return d;
}

}  // namespace alp
