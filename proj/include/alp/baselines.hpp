#pragma once

// Reference schedulers: first-come-first-served, tabu search over landing
// sequences and an exact permutation oracle (optionally restricted to
// constrained position shifting).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "alp/core.hpp"
#include "alp/random.hpp"

namespace alp::baselines {

using Sequence = std::vector<std::size_t>;

/// Arrival order (ata, ties by id) adjusted so every precedence pair holds.
inline Sequence fcfs_order(const Instance& inst) {
  const std::size_t n = inst.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [a, b] : inst.precedence()) {
    succ[a].push_back(b);
    ++pending[b];
  }
  auto later = [&](std::size_t a, std::size_t b) {
    if (inst[a].arrival != inst[b].arrival) return inst[a].arrival > inst[b].arrival;
    return inst[a].id > inst[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push(i);
  Sequence order;
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j : succ[i])
      if (--pending[j] == 0) ready.push(j);
  }
  return order;
}

inline bool respects_precedence(const Instance& inst, const Sequence& seq) {
  std::vector<std::size_t> pos(inst.size());
  for (std::size_t k = 0; k < seq.size(); ++k) pos[seq[k]] = k;
  for (const auto& [a, b] : inst.precedence())
    if (pos[a] > pos[b]) return false;
  return true;
}

namespace detail {

/// Earliest time for `follow` after every earlier entry of `seq[0..k)`,
/// starting from `floor`. Times along a sequence never decrease, so the scan
/// stops once no earlier landing can bind.
inline Seconds earliest_after(const Instance& inst, const Sequence& seq, const std::vector<Seconds>& x,
                              std::size_t k, Seconds floor, Seconds max_gap) {
  const std::size_t follow = seq[k];
  Seconds t = floor;
  for (std::size_t j = k; j-- > 0;) {
    const std::size_t lead = seq[j];
    if (x[j] + max_gap < t) break;
    t = std::max(t, separated_after(x[j], inst.required_gap(lead, follow)));
    if (inst.must_precede(lead, follow) && !(x[j] < t)) t = std::nextafter(x[j], INFINITY);
  }
  return t;
}

}  // namespace detail

/// Landing times of a sequence with every aircraft at its earliest feasible
/// time; entries may exceed the window end (callers check).
inline std::vector<Seconds> time_sequence_unclamped(const Instance& inst, const Sequence& seq) {
  const Seconds max_gap = inst.max_required_gap();
  std::vector<Seconds> x(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k)
    x[k] = detail::earliest_after(inst, seq, x, k, inst[seq[k]].earliest, max_gap);
  return x;
}

/// Earliest-feasible timing of a sequence, or nothing when some aircraft is
/// pushed past its window.
inline std::optional<Schedule> time_sequence(const Instance& inst, const Sequence& seq) {
  const auto x = time_sequence_unclamped(inst, seq);
  Schedule s(inst.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (x[k] > inst[seq[k]].latest) return std::nullopt;
    s.set(seq[k], x[k]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// FCFS

/// Arrival order; the first aircraft lands at max(E, T), each later one at
/// max(E, earliest separated time). Times forced past L are clamped to L, which
/// validate_schedule then reports.
inline Schedule fcfs(const Instance& inst) {
  const Sequence seq = fcfs_order(inst);
  const Seconds max_gap = inst.max_required_gap();
  std::vector<Seconds> x(seq.size());
  Schedule s(inst.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& a = inst[seq[k]];
    const Seconds floor = k == 0 ? std::max(a.earliest, a.target) : a.earliest;
    x[k] = std::min(detail::earliest_after(inst, seq, x, k, floor, max_gap), a.latest);
    s.set(seq[k], x[k]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Tabu search

struct TabuConfig {
  std::size_t tenure = 7;
  std::size_t max_iterations = 500;
  std::size_t max_shift = 5;  // reinsertion distance for the shift move
  std::uint64_t seed = 1;

  void check() const {
    if (tenure < 1) throw InvalidArgument("tabu tenure must be >= 1");
  }
};

struct TabuResult {
  Schedule schedule;
  double cost = 0;
  std::vector<double> incumbent_history;  // best cost after each iteration
};

namespace detail {

struct Move {
  enum class Kind : std::uint8_t { Swap, Shift } kind;
  std::size_t from, to;
};

inline Sequence apply(const Sequence& seq, const Move& m) {
  Sequence out = seq;
  if (m.kind == Move::Kind::Swap) {
    std::swap(out[m.from], out[m.to]);
  } else {
    const std::size_t v = out[m.from];
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(m.from));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(m.to), v);
  }
  return out;
}

/// Total cost plus a large penalty per second of window overrun.
inline double penalized_cost(const Instance& inst, const Sequence& seq, bool& feasible) {
  const auto x = time_sequence_unclamped(inst, seq);
  double cost = 0, overrun = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& a = inst[seq[k]];
    cost += deviation_cost(a.cost, deviation(x[k], a.target));
    overrun += std::max(0.0, x[k] - a.latest);
  }
  feasible = overrun == 0;
  return cost + 1e6 * overrun;
}

inline std::pair<std::size_t, std::size_t> key(std::size_t a, std::size_t b) {
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace detail

/// Starts from FCFS; moves are adjacent swaps and single-aircraft
/// reinsertions within max_shift positions. The pair of aircraft exchanged
/// by a move stays tabu for `tenure` iterations unless the move improves on
/// the best feasible cost.
inline TabuResult tabu_search(const Instance& inst, const TabuConfig& cfg = {}) {
  cfg.check();
  Rng rng(cfg.seed);
  const std::size_t n = inst.size();
  TabuResult best{fcfs(inst), std::numeric_limits<double>::infinity(), {}};
  if (validate_schedule(inst, best.schedule).feasible()) best.cost = total_cost(inst, best.schedule);

  Sequence current = fcfs_order(inst);
  bool feasible = false;
  double current_cost = detail::penalized_cost(inst, current, feasible);
  if (feasible && current_cost < best.cost) {
    best.schedule = *time_sequence(inst, current);
    best.cost = current_cost;
  }

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> tabu_until;
  std::vector<detail::Move> moves;
  for (std::size_t i = 0; i + 1 < n; ++i) moves.push_back({detail::Move::Kind::Swap, i, i + 1});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 2; d <= cfg.max_shift; ++d) {
      if (i + d < n) moves.push_back({detail::Move::Kind::Shift, i, i + d});
      if (i >= d) moves.push_back({detail::Move::Kind::Shift, i, i - d});
    }

  for (std::size_t it = 0; it < cfg.max_iterations && !moves.empty(); ++it) {
    double chosen_cost = std::numeric_limits<double>::infinity();
    std::optional<Sequence> chosen;
    std::pair<std::size_t, std::size_t> chosen_key;
    bool chosen_feasible = false;
    std::size_t ties = 0;
    for (const auto& m : moves) {
      Sequence cand = detail::apply(current, m);
      if (!respects_precedence(inst, cand)) continue;
      bool f = false;
      const double c = detail::penalized_cost(inst, cand, f);
      const auto k = detail::key(current[m.from], current[m.to]);
      const auto tabu = tabu_until.find(k);
      const bool is_tabu = tabu != tabu_until.end() && tabu->second > it;
      if (is_tabu && !(f && c < best.cost)) continue;
      if (c < chosen_cost) {
        chosen_cost = c;
        ties = 1;
      } else if (c == chosen_cost) {
        // Reservoir choice among equal-cost moves.
        if (rng.index(++ties) != 0) continue;
      } else {
        continue;
      }
      chosen = std::move(cand);
      chosen_key = k;
      chosen_feasible = f;
    }
    if (!chosen) break;
    current = std::move(*chosen);
    tabu_until[chosen_key] = it + 1 + cfg.tenure;
    if (chosen_feasible && chosen_cost < best.cost) {
      best.schedule = *time_sequence(inst, current);
      best.cost = chosen_cost;
    }
    best.incumbent_history.push_back(best.cost);
  }
  if (!std::isfinite(best.cost))
    throw InfeasibleInstance("tabu search found no feasible schedule for " + inst.name());
  return best;
}

// ---------------------------------------------------------------------------
// Exact oracle

struct OracleConfig {
  std::size_t max_n = 10;
  std::optional<std::size_t> cps_k;  // restrict to within k positions of FCFS order
  std::size_t max_cps_n = 30;
};

struct OracleResult {
  Schedule schedule;
  double cost = 0;
  Sequence sequence;
};

namespace detail {

inline void require_delay_monotone(const Instance& inst) {
  for (const auto& a : inst.aircraft())
    if (!a.cost.delay_monotone())
      throw InvalidArgument("oracle requires delay-monotone costs; aircraft " + a.id + " has an earliness penalty");
}

struct Enumerator {
  const Instance& inst;
  Seconds max_gap;
  std::vector<std::size_t> pending_preds;
  std::vector<std::vector<std::size_t>> succ;
  Sequence seq;
  std::vector<Seconds> x;
  std::vector<bool> used;
  double best = std::numeric_limits<double>::infinity();
  Sequence best_seq;

  explicit Enumerator(const Instance& in)
      : inst(in), max_gap(in.max_required_gap()), pending_preds(in.size(), 0), succ(in.size()),
        used(in.size(), false) {
    for (const auto& [a, b] : in.precedence()) {
      succ[a].push_back(b);
      ++pending_preds[b];
    }
  }

  void run(double cost) {
    const std::size_t k = seq.size();
    if (k == inst.size()) {
      // Ties resolve to the lexicographically smallest sequence.
      if (cost < best || (cost == best && seq < best_seq)) {
        best = cost;
        best_seq = seq;
      }
      return;
    }
    // Lower bound: every remaining aircraft lands after the last one placed.
    double bound = cost;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (used[i]) continue;
      Seconds t = inst[i].earliest;
      if (k > 0) t = std::max(t, separated_after(x[k - 1], inst.required_gap(seq[k - 1], i)));
      if (t > inst[i].latest) return;
      bound += deviation_cost(inst[i].cost, deviation(t, inst[i].target));
    }
    if (bound > best) return;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (used[i] || pending_preds[i] != 0) continue;
      seq.push_back(i);
      x.push_back(0);
      x[k] = earliest_after(inst, seq, x, k, inst[i].earliest, max_gap);
      if (x[k] <= inst[i].latest) {
        used[i] = true;
        for (std::size_t j : succ[i]) --pending_preds[j];
        run(cost + deviation_cost(inst[i].cost, deviation(x[k], inst[i].target)));
        for (std::size_t j : succ[i]) ++pending_preds[j];
        used[i] = false;
      }
      seq.pop_back();
      x.pop_back();
    }
  }
};

struct Label {
  Seconds time;
  double cost;
  Sequence seq;
};

/// Keeps labels not dominated in (time, cost).
inline void insert_label(std::vector<Label>& front, Label l) {
  for (const auto& o : front)
    if (o.time <= l.time && o.cost <= l.cost) return;
  std::erase_if(front, [&](const Label& o) { return l.time <= o.time && l.cost <= o.cost; });
  front.push_back(std::move(l));
}

inline OracleResult cps_dynamic_program(const Instance& inst, std::size_t k) {
  const std::size_t n = inst.size();
  const Sequence base = fcfs_order(inst);
  std::vector<std::size_t> pred_mask(n, 0);
  for (const auto& [a, b] : inst.precedence()) pred_mask[b] |= std::size_t{1} << a;

  // State after p placements: (set of placed aircraft, last aircraft).
  using Key = std::pair<std::uint64_t, std::size_t>;
  std::map<Key, std::vector<Label>> layer;
  layer[{0, n}] = {Label{0, 0, {}}};
  for (std::size_t p = 0; p < n; ++p) {
    std::map<Key, std::vector<Label>> next;
    const std::size_t lo = p > k ? p - k : 0;
    const std::size_t hi = std::min(n - 1, p + k);
    for (const auto& [key, front] : layer) {
      const auto [mask, last] = key;
      for (std::size_t pos = lo; pos <= hi; ++pos) {
        const std::size_t a = base[pos];
        if (mask >> a & 1U) continue;
        if ((pred_mask[a] & mask) != pred_mask[a]) continue;
        const std::uint64_t nmask = mask | (std::uint64_t{1} << a);
        // The aircraft at FCFS position p - k must be placed by now.
        if (p >= k && !(nmask >> base[p - k] & 1U)) continue;
        for (const auto& l : front) {
          Seconds t = inst[a].earliest;
          if (last != n) {
            t = std::max(t, separated_after(l.time, inst.required_gap(last, a)));
            if (inst.must_precede(last, a) && !(l.time < t)) t = std::nextafter(l.time, INFINITY);
          }
          if (t > inst[a].latest) continue;
          Label nl{t, l.cost + deviation_cost(inst[a].cost, deviation(t, inst[a].target)), l.seq};
          nl.seq.push_back(a);
          insert_label(next[{nmask, a}], std::move(nl));
        }
      }
    }
    layer = std::move(next);
  }
  const Label* best = nullptr;
  for (const auto& [key, front] : layer)
    for (const auto& l : front)
      if (!best || l.cost < best->cost || (l.cost == best->cost && l.seq < best->seq)) best = &l;
  if (!best) throw InfeasibleInstance("no feasible sequence within the position-shift limit for " + inst.name());
  // Re-time with all-pairs separation; the DP assumed consecutive spacing
  // dominates, which the check below confirms.
  auto s = time_sequence(inst, best->seq);
  if (!s || !validate_schedule(inst, *s).feasible() || total_cost(inst, *s) > best->cost + 1e-9)
    throw InfeasibleInstance("position-shift DP result failed all-pairs validation for " + inst.name());
  return {*s, total_cost(inst, *s), best->seq};
}

}  // namespace detail

/// Minimum-cost schedule over all sequences (or all CPS-k sequences), each
/// timed at earliest feasible landings. Valid when costs never decrease as a
/// landing moves later.
inline OracleResult exact_oracle(const Instance& inst, const OracleConfig& cfg = {}) {
  detail::require_delay_monotone(inst);
  if (cfg.cps_k) {
    if (inst.size() > cfg.max_cps_n || inst.size() > 64)
      throw InvalidArgument("instance too large for the position-shift oracle (n = " + std::to_string(inst.size()) +
                            ")");
    return detail::cps_dynamic_program(inst, *cfg.cps_k);
  }
  if (inst.size() > cfg.max_n)
    throw InvalidArgument("instance too large for the exact oracle (n = " + std::to_string(inst.size()) +
                          ", limit " + std::to_string(cfg.max_n) + ")");
  detail::Enumerator e(inst);
  if (auto s = time_sequence(inst, fcfs_order(inst))) {
    e.best = total_cost(inst, *s);
    e.best_seq = fcfs_order(inst);
  }
  e.run(0);
  if (e.best_seq.size() != inst.size()) throw InfeasibleInstance("no feasible sequence for " + inst.name());
  auto s = time_sequence(inst, e.best_seq);
  return {*s, total_cost(inst, *s), e.best_seq};
}

}  // namespace alp::baselines
