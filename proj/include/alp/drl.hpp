#pragma once

// Sequential policy rollout: one aircraft per step, highest priority first,
// each proposal passed through the safety layer.

#include <map>
#include <memory>

#include "alp/env.hpp"
#include "alp/graph.hpp"
#include "alp/policy.hpp"
#include "alp/safety.hpp"

namespace alp::drl {

struct StepOutcome {
  env::EnvState next;
  Seconds placed_at = 0;
  double reward = 0;
  env::RewardTerms terms;
  std::size_t backtracks = 0;
};

/// Places aircraft `i` near `proposal` via the safety layer and scores it.
/// Delay, throughput and smoothness use the placed time; the separation term
/// judges the raw proposal, so unsafe proposals are penalized even though the
/// safety layer repairs them.
inline StepOutcome apply_action(const env::Environment& env, const env::EnvState& state, std::size_t i,
                                Seconds proposal, const safety::AssignmentConfig& cfg = {}) {
  const Instance& inst = env.instance();
  const auto placed = safety::assign_all(inst, state.schedule, state.assignment_order, {{i, proposal}},
                                         env.features().priority, cfg);
  StepOutcome out;
  out.placed_at = *placed.schedule[i];
  out.backtracks = placed.backtracks;
  out.terms = env.reward_terms(state, i, out.placed_at);
  const auto& a = inst[i];
  out.terms.separation =
      env::placement_valid(inst, state.schedule, i, std::clamp(proposal, a.earliest, a.latest)) ? 1.0 : -1.0;
  out.reward = env.combine(out.terms);
  out.next = state;
  out.next.schedule = placed.schedule;
  out.next.assignment_order = placed.order;
  ++out.next.step;
  return out;
}

struct RolloutResult {
  Schedule schedule;
  double reward = 0;
  std::size_t backtracks = 0;
};

/// Deterministic policy schedule: each step lands the chosen aircraft at the
/// actor's mean time, then repairs it through the safety layer.
inline RolloutResult drl_schedule(const env::Environment& env, const nn::ParameterStore& store,
                                  const policy::PolicyConfig& pcfg = {}, const safety::AssignmentConfig& scfg = {}) {
  env::EnvState state = env.reset();
  RolloutResult r;
  while (!state.done()) {
    const StateGraph g = build_graph(state, env.features());
    const auto ev = policy::evaluate(store, g, pcfg, false);
    const std::size_t i = env.next_aircraft(state);
    const auto& a = env.instance()[i];
    const Seconds t = policy::act(ev.mu[i], ev.log_sigma[i], a.earliest, a.latest).t;
    auto step = apply_action(env, state, i, t, scfg);
    r.reward += step.reward;
    r.backtracks += step.backtracks;
    state = std::move(step.next);
  }
  r.schedule = state.schedule;
  if (!validate_schedule(env.instance(), r.schedule).feasible())
    throw InfeasibleInstance("policy schedule failed validation for " + env.instance().name());
  return r;
}

inline RolloutResult drl_schedule(const Instance& inst, const nn::ParameterStore& store,
                                  const env::EnvConfig& ecfg = {}, const policy::PolicyConfig& pcfg = {},
                                  const safety::AssignmentConfig& scfg = {}) {
  env::Environment env(std::make_shared<Instance>(inst), ecfg);
  return drl_schedule(env, store, pcfg, scfg);
}

}  // namespace alp::drl
