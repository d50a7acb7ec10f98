#pragma once

// Safety layer: turns proposed landing times into a separation-feasible
// schedule by priority-ordered placement, local time adjustment and bounded
// backtracking.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "alp/env.hpp"

namespace alp::safety {

struct AssignmentConfig {
  std::size_t max_attempts = 7;
  std::optional<std::size_t> max_backtracks;  // default 2n

  void check() const {
    if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  }
  std::size_t backtracks_for(std::size_t n) const { return max_backtracks.value_or(2 * n); }
};

/// Window, separation (earlier lander leads, buffer included) and precedence
/// against every scheduled aircraft.
inline bool validate_separation(const Instance& inst, const Schedule& s, std::size_t i, Seconds t) {
  return env::placement_valid(inst, s, i, t);
}

namespace detail {

constexpr Seconds kInf = std::numeric_limits<Seconds>::infinity();

/// Boundary points of the forbidden intervals around scheduled aircraft:
/// forward (right ends) or backward (left ends).
inline std::vector<Seconds> boundaries(const Instance& inst, const Schedule& s, std::size_t i, bool forward) {
  std::vector<Seconds> out;
  for (std::size_t j = 0; j < inst.size(); ++j) {
    if (j == i || !s.assigned(j)) continue;
    const Seconds xj = *s[j];
    if (forward) {
      out.push_back(separated_after(xj, inst.required_gap(j, i)));
      out.push_back(std::nextafter(xj, kInf));
    } else {
      out.push_back(separated_before(xj, inst.required_gap(i, j)));
      out.push_back(std::nextafter(xj, -kInf));
    }
  }
  return out;
}

}  // namespace detail

/// Earliest feasible time >= t in the window, if any.
inline std::optional<Seconds> earliest_feasible_from(const Instance& inst, const Schedule& s, std::size_t i,
                                                     Seconds t) {
  const auto& a = inst[i];
  t = std::max(t, a.earliest);
  if (t > a.latest) return std::nullopt;
  std::vector<Seconds> cand{t};
  for (Seconds c : detail::boundaries(inst, s, i, true))
    if (c > t && c <= a.latest) cand.push_back(c);
  std::sort(cand.begin(), cand.end());
  for (Seconds c : cand)
    if (validate_separation(inst, s, i, c)) return c;
  return std::nullopt;
}

/// Latest feasible time <= t in the window, if any.
inline std::optional<Seconds> latest_feasible_until(const Instance& inst, const Schedule& s, std::size_t i,
                                                    Seconds t) {
  const auto& a = inst[i];
  t = std::min(t, a.latest);
  if (t < a.earliest) return std::nullopt;
  std::vector<Seconds> cand{t};
  for (Seconds c : detail::boundaries(inst, s, i, false))
    if (c < t && c >= a.earliest) cand.push_back(c);
  std::sort(cand.begin(), cand.end(), std::greater<>());
  for (Seconds c : cand)
    if (validate_separation(inst, s, i, c)) return c;
  return std::nullopt;
}

/// Earliest feasible time >= t, else the latest feasible time <= t, else t.
inline Seconds adjust_landing_time(const Instance& inst, const Schedule& s, std::size_t i, Seconds t) {
  if (auto f = earliest_feasible_from(inst, s, i, t)) return *f;
  if (auto b = latest_feasible_until(inst, s, i, t)) return *b;
  return t;
}

struct AssignResult {
  Schedule schedule;
  std::vector<std::size_t> order;  // assignment order, oldest first
  std::size_t backtracks = 0;
};

namespace detail {

inline void require_consistent(const Instance& inst, const Schedule& s) {
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (s.assigned(i) && !validate_separation(inst, s, i, *s[i]))
      throw InfeasibleInstance("safety layer produced an infeasible placement for aircraft " + inst[i].id);
}

/// Places `pending` at earliest feasible times, one by one in the order
/// given; false if some aircraft finds no slot.
inline bool place_earliest(const Instance& inst, Schedule& s, std::vector<std::size_t>& order,
                           const std::vector<std::size_t>& pending) {
  for (std::size_t a : pending) {
    auto t = earliest_feasible_from(inst, s, a, inst[a].earliest);
    if (!t) return false;
    s.set(a, *t);
    order.push_back(a);
  }
  return true;
}

/// Orders aircraft by descending priority (ties by id) with precedence pairs
/// respected.
inline std::vector<std::size_t> by_priority(const Instance& inst, std::vector<std::size_t> set,
                                            const std::vector<double>& priority) {
  std::vector<bool> outside(inst.size(), true);
  for (std::size_t a : set) outside[a] = false;
  std::vector<std::size_t> out;
  for (std::size_t a : env::priority_order(inst, priority, outside)) out.push_back(a);
  return out;
}

/// Orders aircraft by arrival time (ties by id) with precedence pairs
/// respected.
inline std::vector<std::size_t> by_arrival(const Instance& inst, const std::vector<std::size_t>& set) {
  std::vector<double> earlier_first(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) earlier_first[i] = -inst[i].arrival;
  return by_priority(inst, set, earlier_first);
}

/// Re-places `pending` on top of `base`, trying priority order, then arrival
/// order.
inline bool replace_pending(const Instance& inst, AssignResult& r, const Schedule& base,
                            const std::vector<std::size_t>& base_order, const std::vector<std::size_t>& pending,
                            const std::vector<double>& priority) {
  for (const auto& ordered : {by_priority(inst, pending, priority), by_arrival(inst, pending)}) {
    Schedule trial = base;
    std::vector<std::size_t> order = base_order;
    if (place_earliest(inst, trial, order, ordered)) {
      r.schedule = std::move(trial);
      r.order = std::move(order);
      return true;
    }
  }
  return false;
}

/// Recovery after `failed` found no slot. First unassign the newest aircraft
/// whose removal lets `failed` in and re-place both at earliest feasible times.
/// If no single removal works, keep unassigning newest first and re-place the
/// whole pending set. Re-placement tries priority order, then arrival order.
/// Each unassignment spends one unit of `budget`.
inline bool recover(const Instance& inst, AssignResult& r, std::size_t failed, const std::vector<double>& priority,
                    std::size_t& budget) {
  if (budget == 0) return false;
  --budget;
  ++r.backtracks;
  for (std::size_t k = r.order.size(); k-- > 0;) {
    const std::size_t victim = r.order[k];
    Schedule trial = r.schedule;
    trial.clear(victim);
    if (!earliest_feasible_from(inst, trial, failed, inst[failed].earliest)) continue;
    std::vector<std::size_t> order = r.order;
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(k));
    if (replace_pending(inst, r, trial, order, {failed, victim}, priority)) return true;
  }

  std::vector<std::size_t> pending{failed};
  Schedule base = r.schedule;
  std::vector<std::size_t> base_order = r.order;
  while (!base_order.empty()) {
    if (budget == 0) return false;
    --budget;
    ++r.backtracks;
    pending.push_back(base_order.back());
    base.clear(base_order.back());
    base_order.pop_back();
    if (replace_pending(inst, r, base, base_order, pending, priority)) return true;
  }
  return false;
}

}  // namespace detail

/// Places every aircraft with a proposal (index -> time) on top of `base`.
/// Aircraft go in descending priority (precedence respected, ties by id);
/// each gets up to max_attempts validate/adjust cycles before recovery.
inline AssignResult assign_all(const Instance& inst, const Schedule& base, const std::vector<std::size_t>& base_order,
                               const std::map<std::size_t, Seconds>& proposals, const std::vector<double>& priority,
                               const AssignmentConfig& cfg = {}) {
  cfg.check();
  AssignResult r{base, base_order, 0};
  std::vector<bool> skip(inst.size(), true);
  for (const auto& [i, t] : proposals) {
    if (i >= inst.size()) throw InvalidArgument("proposal for unknown aircraft index");
    if (base.assigned(i)) throw InvalidArgument("proposal for already assigned aircraft " + inst[i].id);
    if (!std::isfinite(t)) throw InvalidArgument("non-finite proposal for aircraft " + inst[i].id);
    skip[i] = false;
  }
  std::vector<bool> placed_or_skipped(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) placed_or_skipped[i] = base.assigned(i);
  std::size_t budget = cfg.backtracks_for(inst.size());
  for (std::size_t i : env::priority_order(inst, priority, placed_or_skipped)) {
    if (skip[i]) continue;
    const auto& a = inst[i];
    Seconds t = std::clamp(proposals.at(i), a.earliest, a.latest);
    bool placed = false;
    for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      if (validate_separation(inst, r.schedule, i, t)) {
        r.schedule.set(i, t);
        r.order.push_back(i);
        placed = true;
        break;
      }
      t = adjust_landing_time(inst, r.schedule, i, t);
    }
    if (!placed && !detail::recover(inst, r, i, priority, budget))
      throw InfeasibleInstance("no feasible landing slot for aircraft " + a.id + " after backtracking");
  }
  detail::require_consistent(inst, r.schedule);
  return r;
}

/// Convenience for a whole instance: every aircraft proposes a time.
inline Schedule assign_all(const Instance& inst, const std::vector<Seconds>& proposals,
                           const std::vector<double>& priority, const AssignmentConfig& cfg = {}) {
  if (proposals.size() != inst.size()) throw InvalidArgument("need one proposal per aircraft");
  std::map<std::size_t, Seconds> m;
  for (std::size_t i = 0; i < proposals.size(); ++i) m[i] = proposals[i];
  auto r = assign_all(inst, Schedule(inst.size()), {}, m, priority, cfg);
  if (!validate_schedule(inst, r.schedule).feasible())
    throw InfeasibleInstance("safety layer output failed validation");
  return std::move(r.schedule);
}

}  // namespace alp::safety
