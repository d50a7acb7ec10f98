#pragma once

// Landing-assignment MDP: per-aircraft features, priority scoring, reward and
// the episode step function.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "alp/config.hpp"
#include "alp/core.hpp"

namespace alp::env {

struct PriorityWeights {
  std::array<double, 4> w{0.4, 0.2, 0.2, 0.2};  // urgency, criticality, category, cost factor

  void check() const {
    double sum = 0;
    for (double v : w) {
      if (!(v >= 0)) throw InvalidArgument("priority weights must be >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("priority weights must sum to 1");
  }
};

struct RewardWeights {
  std::array<double, 4> w{1.0, 2.0, 0.5, 0.3};  // delay, separation, throughput, smoothness
};

struct EnvConfig {
  PriorityWeights priority;
  RewardWeights reward;
  std::array<double, 4> urgency_tier_weights{0.1, 0.2, 0.3, 0.4};
  Seconds criticality_window = 1500;
  Seconds delay_normalizer_delay = 900;  // C_norm = cost of this delay under the fleet-max profile

  static EnvConfig from(const ConfigFile& f) {
    EnvConfig c;
    auto arr4 = [&](const char* key, std::array<double, 4> dflt) {
      auto v = f.get_list(key, {dflt.begin(), dflt.end()});
      if (v.size() != 4) throw ParseError(std::string(key) + " needs 4 values");
      return std::array<double, 4>{v[0], v[1], v[2], v[3]};
    };
    c.priority.w = arr4("priority_weights", c.priority.w);
    c.reward.w = arr4("reward_weights", c.reward.w);
    c.urgency_tier_weights = arr4("urgency_tier_weights", c.urgency_tier_weights);
    c.criticality_window = f.get("criticality_window", c.criticality_window);
    c.delay_normalizer_delay = f.get("delay_normalizer_delay", c.delay_normalizer_delay);
    c.priority.check();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Feature primitives

/// Affine map of [lo, hi] onto [0, 1]; a degenerate horizon maps to 0.5.
inline double normalize(Seconds t, Seconds lo, Seconds hi) {
  if (!(hi > lo)) return 0.5;
  return std::clamp((t - lo) / (hi - lo), 0.0, 1.0);
}

inline double time_criticality(Seconds earliest, Seconds latest, Seconds window = 1500) {
  return std::clamp(1.0 - (latest - earliest) / window, 0.0, 1.0);
}

inline double category_priority(WakeClass c) { return 1.0 - wake_code(c) / 2.0; }

/// Tier coefficients used for features. Linear profiles contribute their
/// lateness penalty to every tier.
inline std::array<double, 4> feature_tiers(const CostProfile& p) {
  if (p.kind == CostProfile::Kind::Linear) return {p.late, p.late, p.late, p.late};
  return p.tiers();
}

inline double raw_urgency(const CostProfile& p, const std::array<double, 4>& tier_weights) {
  const auto c = feature_tiers(p);
  double u = 0;
  for (std::size_t k = 0; k < 4; ++k) u += tier_weights[k] * c[k];
  return u;
}

/// Min-max normalized urgency over the fleet; an all-equal fleet maps to 0.5.
inline std::vector<double> urgency(const std::vector<CostProfile>& fleet,
                                   const std::array<double, 4>& tier_weights = {0.1, 0.2, 0.3,
                                                                                0.4}) {
  std::vector<double> raw;
  raw.reserve(fleet.size());
  for (const auto& p : fleet) raw.push_back(raw_urgency(p, tier_weights));
  std::vector<double> out(raw.size(), 0.5);
  if (raw.empty()) return out;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (!(*hi > *lo)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *lo) / (*hi - *lo);
  return out;
}

/// Mean over tiers of the coefficient relative to the fleet maximum for that
/// tier; tiers whose fleet maximum is zero contribute 0.
inline std::vector<double> cost_factor(const std::vector<CostProfile>& fleet) {
  std::array<double, 4> max{};
  for (const auto& p : fleet) {
    const auto c = feature_tiers(p);
    for (std::size_t k = 0; k < 4; ++k) max[k] = std::max(max[k], c[k]);
  }
  std::vector<double> out;
  out.reserve(fleet.size());
  for (const auto& p : fleet) {
    const auto c = feature_tiers(p);
    double s = 0;
    for (std::size_t k = 0; k < 4; ++k)
      if (max[k] > 0) s += c[k] / max[k];
    out.push_back(s / 4.0);
  }
  return out;
}

struct PriorityComponents {
  double urgency = 0, criticality = 0, category = 0, cost = 0;
};

inline double priority_score(const PriorityComponents& c, const PriorityWeights& w) {
  return w.w[0] * c.urgency + w.w[1] * c.criticality + w.w[2] * c.category + w.w[3] * c.cost;
}

/// Static per-aircraft features of an instance (everything except the
/// assigned-landing channel).
struct FleetFeatures {
  Seconds horizon_lo = 0, horizon_hi = 0;
  std::vector<double> target;    // normalized T
  std::vector<double> earliest;  // normalized E
  std::vector<double> latest;    // normalized L
  std::vector<PriorityComponents> components;
  std::vector<double> priority;
};

inline FleetFeatures fleet_features(const Instance& inst, const EnvConfig& cfg = {}) {
  FleetFeatures f;
  const std::size_t n = inst.size();
  f.horizon_lo = inst[0].earliest;
  f.horizon_hi = inst[0].latest;
  std::vector<CostProfile> profiles;
  for (const auto& a : inst.aircraft()) {
    f.horizon_lo = std::min(f.horizon_lo, a.earliest);
    f.horizon_hi = std::max(f.horizon_hi, a.latest);
    profiles.push_back(a.cost);
  }
  const auto u = urgency(profiles, cfg.urgency_tier_weights);
  const auto cf = cost_factor(profiles);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = inst[i];
    f.target.push_back(normalize(a.target, f.horizon_lo, f.horizon_hi));
    f.earliest.push_back(normalize(a.earliest, f.horizon_lo, f.horizon_hi));
    f.latest.push_back(normalize(a.latest, f.horizon_lo, f.horizon_hi));
    PriorityComponents c{u[i], time_criticality(a.earliest, a.latest, cfg.criticality_window),
                         category_priority(a.wake), cf[i]};
    f.components.push_back(c);
    f.priority.push_back(priority_score(c, cfg.priority));
  }
  return f;
}

/// Assignment order: highest priority first among aircraft whose precedence
/// predecessors are already placed; ties go to the smaller id.
inline std::vector<std::size_t> priority_order(const Instance& inst,
                                               const std::vector<double>& priority,
                                               const std::vector<bool>& already_placed = {}) {
  const std::size_t n = inst.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [a, b] : inst.precedence()) {
    succ[a].push_back(b);
    if (already_placed.empty() || !already_placed[a]) ++pending[b];
  }
  auto worse = [&](std::size_t a, std::size_t b) {
    if (priority[a] != priority[b]) return priority[a] < priority[b];
    return inst[a].id > inst[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> ready(worse);
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0 && (already_placed.empty() || !already_placed[i])) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j : succ[i])
      if (--pending[j] == 0 && (already_placed.empty() || !already_placed[j])) ready.push(j);
  }
  return order;
}

// ---------------------------------------------------------------------------
// State

struct EnvState {
  std::shared_ptr<const Instance> instance;
  Schedule schedule;
  std::vector<std::size_t> assignment_order;  // oldest first
  std::size_t step = 0;

  std::size_t size() const { return instance->size(); }
  bool assigned(std::size_t i) const { return schedule.assigned(i); }
  bool done() const { return schedule.is_complete(); }

  std::vector<std::size_t> unassigned() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (!schedule.assigned(i)) out.push_back(i);
    return out;
  }

  std::vector<bool> placed_mask() const {
    std::vector<bool> m(size());
    for (std::size_t i = 0; i < size(); ++i) m[i] = schedule.assigned(i);
    return m;
  }

  friend bool operator==(const EnvState& a, const EnvState& b) {
    return a.instance == b.instance && a.schedule == b.schedule &&
           a.assignment_order == b.assignment_order && a.step == b.step;
  }
};

/// Whether aircraft `i` landing at `t` is compatible with everything already
/// scheduled in `s`: window, separation plus buffer (earlier lander leads) and
/// precedence.
inline bool placement_valid(const Instance& inst, const Schedule& s, std::size_t i, Seconds t) {
  const auto& a = inst[i];
  if (t < a.earliest || t > a.latest) return false;
  for (std::size_t j = 0; j < inst.size(); ++j) {
    if (j == i || !s.assigned(j)) continue;
    const Seconds xj = *s[j];
    const bool i_first = t != xj ? t < xj : inst[i].id < inst[j].id;
    if (i_first) {
      if (xj - t < inst.required_gap(i, j)) return false;
    } else {
      if (t - xj < inst.required_gap(j, i)) return false;
    }
  }
  for (const auto& [before, after] : inst.precedence()) {
    if (before == i && s.assigned(after) && !(t < *s[after])) return false;
    if (after == i && s.assigned(before) && !(*s[before] < t)) return false;
  }
  return true;
}

struct StepResult {
  EnvState state;
  double reward = 0;
  bool done = false;
};

struct RewardTerms {
  double delay = 0, separation = 0, throughput = 0, smoothness = 0;
};

class Environment {
 public:
  explicit Environment(std::shared_ptr<const Instance> inst, EnvConfig cfg = {})
      : inst_(std::move(inst)), cfg_(cfg), features_(fleet_features(*inst_, cfg_)) {
    cfg_.priority.check();
    CostProfile fleet_max = CostProfile::tiered(0, 0, 0, 0);
    bool linear = false;
    double max_late = 0;
    for (const auto& a : inst_->aircraft()) {
      if (a.cost.kind == CostProfile::Kind::Linear) {
        linear = true;
        max_late = std::max(max_late, a.cost.late);
      } else {
        fleet_max.c300 = std::max(fleet_max.c300, a.cost.c300);
        fleet_max.c900 = std::max(fleet_max.c900, a.cost.c900);
        fleet_max.c1800 = std::max(fleet_max.c1800, a.cost.c1800);
        fleet_max.c3600 = std::max(fleet_max.c3600, a.cost.c3600);
      }
    }
    const Seconds d = cfg_.delay_normalizer_delay;
    cost_norm_ = std::max(tiered_delay_cost(d, fleet_max), linear ? d * max_late : 0.0);
  }

  const Instance& instance() const { return *inst_; }
  std::shared_ptr<const Instance> instance_ptr() const { return inst_; }
  const EnvConfig& config() const { return cfg_; }
  const FleetFeatures& features() const { return features_; }
  double cost_normalizer() const { return cost_norm_; }

  EnvState reset() const { return EnvState{inst_, Schedule(inst_->size()), {}, 0}; }

  /// Highest-priority unassigned aircraft whose predecessors are placed.
  std::size_t next_aircraft(const EnvState& s) const {
    auto order = priority_order(*inst_, features_.priority, s.placed_mask());
    if (order.empty()) throw InvalidArgument("no unassigned aircraft left");
    return order.front();
  }

  RewardTerms reward_terms(const EnvState& prev, std::size_t i, Seconds t) const {
    const Instance& inst = *inst_;
    RewardTerms r;
    if (cost_norm_ > 0) {
      const double c = deviation_cost(inst[i].cost, deviation(t, inst[i].target));
      r.delay = -std::min(c / cost_norm_, 1.0);
    }
    r.separation = placement_valid(inst, prev.schedule, i, t) ? 1.0 : -1.0;

    // Time-ordered neighbours among previously placed landings.
    std::vector<std::pair<Seconds, std::size_t>> before, after;
    for (std::size_t j = 0; j < inst.size(); ++j) {
      if (j == i || !prev.schedule.assigned(j)) continue;
      const Seconds xj = *prev.schedule[j];
      (xj <= t ? before : after).emplace_back(xj, j);
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());

    Seconds gap = 0;
    if (!before.empty()) {
      const auto [xp, p] = before.back();
      gap = std::max(0.0, t - (xp + inst.required_gap(p, i)));
    } else if (!after.empty()) {
      const auto [xs, s] = after.front();
      gap = std::max(0.0, xs - (t + inst.required_gap(i, s)));
    }
    r.throughput = std::clamp(1.0 - gap / 3600.0, -1.0, 1.0);

    double cur = 0, prv = 0;
    bool have = false;
    if (before.size() >= 2) {
      cur = t - before[before.size() - 1].first;
      prv = before[before.size() - 1].first - before[before.size() - 2].first;
      have = true;
    } else if (after.size() >= 2) {
      cur = after[0].first - t;
      prv = after[1].first - after[0].first;
      have = true;
    }
    if (have) r.smoothness = -std::min(std::abs(cur - prv) / 600.0, 1.0);
    return r;
  }

  double combine(const RewardTerms& r) const {
    const auto& w = cfg_.reward.w;
    return w[0] * r.delay + w[1] * r.separation + w[2] * r.throughput + w[3] * r.smoothness;
  }

  /// Reward for placing aircraft `i` at `t` on top of `prev`. `next` must be
  /// the state after the placement; only `prev` enters the formula.
  double reward(const EnvState& prev, std::size_t i, Seconds t, const EnvState& /*next*/) const {
    return combine(reward_terms(prev, i, t));
  }

  StepResult step(const EnvState& state, std::size_t i, Seconds t) const {
    if (i >= inst_->size()) throw InvalidArgument("aircraft index out of range");
    if (state.assigned(i)) throw InvalidArgument("aircraft " + (*inst_)[i].id + " already assigned");
    const auto& a = (*inst_)[i];
    if (t < a.earliest || t > a.latest)
      throw InvalidArgument("landing time outside window for aircraft " + a.id);
    StepResult out{state, 0, false};
    out.state.schedule.set(i, t);
    out.state.assignment_order.push_back(i);
    ++out.state.step;
    out.reward = reward(state, i, t, out.state);
    out.done = out.state.done();
    return out;
  }

 private:
  std::shared_ptr<const Instance> inst_;
  EnvConfig cfg_;
  FleetFeatures features_;
  double cost_norm_ = 0;
};

}  // namespace alp::env
