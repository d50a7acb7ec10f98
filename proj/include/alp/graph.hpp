#pragma once

// State graph: node features, adjacency and edge features for the encoder.

#include <cmath>

#include "alp/env.hpp"
#include "alp/nn/tensor.hpp"

namespace alp {

inline constexpr std::size_t kNodeFeatures = 9;
inline constexpr std::size_t kEdgeFeatures = 5;
inline constexpr Seconds kSeparationScale = 240;
inline constexpr Seconds kTimeScale = 1500;

struct StateGraph {
  nn::Tensor x;      // n x 9: [T, onehot(H,M,L), urgency, E, L, priority, landing or -1]
  nn::Tensor adj;    // n x n, 1 off the diagonal
  nn::Tensor edges;  // n x n x 5: [sep, |dt|, p_lead, p_follow, weight]

  std::size_t size() const { return x.rows(); }
};

/// w = min(|dt|/s, 1) * exp(-|dt|/1500) * (1 + p_follow)/2. A zero
/// separation imposes no spacing, so its factor is 1.
inline double edge_weight(Seconds separation, Seconds dt, double p_follow) {
  const double adt = std::abs(dt);
  const double g_sep = separation > 0 ? std::min(adt / separation, 1.0) : 1.0;
  return g_sep * std::exp(-adt / kTimeScale) * (1.0 + p_follow) / 2.0;
}

inline StateGraph build_graph(const env::EnvState& state, const env::FleetFeatures& f) {
  const Instance& inst = *state.instance;
  const std::size_t n = inst.size();
  StateGraph g;
  g.x = nn::Tensor({n, kNodeFeatures});
  g.adj = nn::Tensor({n, n});
  g.edges = nn::Tensor({n, n, kEdgeFeatures});
  for (std::size_t i = 0; i < n; ++i) {
    double* row = g.x.data() + i * kNodeFeatures;
    row[0] = f.target[i];
    row[1 + wake_code(inst[i].wake)] = 1.0;
    row[4] = f.components[i].urgency;
    row[5] = f.earliest[i];
    row[6] = f.latest[i];
    row[7] = f.priority[i];
    row[8] = state.schedule.assigned(i) ? env::normalize(*state.schedule[i], f.horizon_lo, f.horizon_hi)
                                        : -1.0;
  }
  auto time_of = [&](std::size_t i) { return inst[i].target; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      g.adj.at(i, j) = 1.0;
      const Seconds s = inst.separation(i, j);
      const bool both = state.schedule.assigned(i) && state.schedule.assigned(j);
      const Seconds dt = both ? *state.schedule[j] - *state.schedule[i] : time_of(j) - time_of(i);
      g.edges.at(i, j, 0) = std::min(s / kSeparationScale, 1.0);
      g.edges.at(i, j, 1) = std::min(std::abs(dt) / kTimeScale, 1.0);
      g.edges.at(i, j, 2) = f.priority[i];
      g.edges.at(i, j, 3) = f.priority[j];
      g.edges.at(i, j, 4) = edge_weight(s, dt, f.priority[j]);
    }
  return g;
}

inline StateGraph build_graph(const env::EnvState& state, const env::EnvConfig& cfg = {}) {
  return build_graph(state, env::fleet_features(*state.instance, cfg));
}

}  // namespace alp
