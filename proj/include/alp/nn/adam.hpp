#pragma once

#include <algorithm>
#include <cmath>

#include "alp/nn/parameters.hpp"

namespace alp::nn {

struct AdamConfig {
  enum class Clip { Elementwise, GlobalNorm };

  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 10.0;
  Clip clip_mode = Clip::Elementwise;

  void check() const {
    if (!(lr > 0)) throw InvalidArgument("adam: learning rate must be positive");
    if (!(clip > 0)) throw InvalidArgument("adam: clip threshold must be positive");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
      throw InvalidArgument("adam: betas must lie in [0, 1)");
  }
};

/// Clips `g` in place: each element to [-c, c], or the whole set rescaled to
/// global L2 norm c.
inline void clip_gradients(Gradients& g, const AdamConfig& cfg) {
  if (cfg.clip_mode == AdamConfig::Clip::Elementwise) {
    for (std::size_t i = 0; i < g.size(); ++i)
      for (auto& x : g[i].values()) x = std::clamp(x, -cfg.clip, cfg.clip);
    return;
  }
  double sq = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (double x : g[i].values()) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > cfg.clip) g.scale(cfg.clip / norm);
}

/// One bias-corrected Adam update of every parameter in `store`.
inline void adam_step(ParameterStore& store, Gradients grads, const AdamConfig& cfg) {
  cfg.check();
  if (grads.size() != store.size()) throw ShapeError("adam: gradient count does not match store");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != store[i].value.shape())
      throw ShapeError("adam: gradient shape mismatch for " + store[i].name);
    if (!grads[i].all_finite()) throw NumericError("adam: non-finite gradient for " + store[i].name);
  }
  clip_gradients(grads, cfg);
  const std::uint64_t step = store.adam_step() + 1;
  store.set_adam_step(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < g.size(); ++k) {
      p.m[k] = cfg.beta1 * p.m[k] + (1.0 - cfg.beta1) * g[k];
      p.v[k] = cfg.beta2 * p.v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      p.value[k] -= cfg.lr * (p.m[k] / c1) / (std::sqrt(p.v[k] / c2) + cfg.eps);
    }
    if (!p.value.all_finite()) throw NumericError("adam: update produced non-finite " + p.name);
  }
}

}  // namespace alp::nn
