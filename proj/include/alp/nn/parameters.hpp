#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alp/nn/tensor.hpp"
#include "alp/random.hpp"

namespace alp::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Named network weights with their Adam moment buffers, in insertion order.
class ParameterStore {
 public:
  /// Weight matrices are drawn uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); rank-1
  /// shapes (biases) start at zero. `fan_in` overrides shape[0] for blocks of
  /// a larger layer.
  Parameter& add(const std::string& name, std::vector<std::size_t> shape, Rng& rng,
                 std::size_t fan_in = 0) {
    Tensor t(shape, 0.0);
    if (shape.size() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in ? fan_in : shape[0]));
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    }
    return add(name, std::move(t));
  }

  Parameter& add(const std::string& name, Tensor value) {
    if (index_.count(name)) throw InvalidArgument("duplicate parameter name: " + name);
    index_.emplace(name, params_.size());
    Tensor zeros = Tensor::zeros_like(value);
    params_.push_back({name, std::move(value), zeros, zeros});
    return params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InvalidArgument("unknown parameter: " + name);
    return it->second;
  }

  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }
  Parameter& get(const std::string& name) { return params_[index(name)]; }
  const Parameter& get(const std::string& name) const { return params_[index(name)]; }

  std::size_t size() const noexcept { return params_.size(); }
  std::vector<Parameter>::iterator begin() { return params_.begin(); }
  std::vector<Parameter>::iterator end() { return params_.end(); }
  std::vector<Parameter>::const_iterator begin() const { return params_.begin(); }
  std::vector<Parameter>::const_iterator end() const { return params_.end(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  /// Same parameter names and shapes in the same order.
  bool same_layout(const ParameterStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name != other.params_[i].name || params_[i].value.shape() != other.params_[i].value.shape())
        return false;
    return true;
  }

  std::uint64_t adam_step() const noexcept { return adam_step_; }
  void set_adam_step(std::uint64_t t) noexcept { adam_step_ = t; }

  friend bool operator==(const ParameterStore& a, const ParameterStore& b) {
    return a.params_ == b.params_ && a.adam_step_ == b.adam_step_;
  }

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
  std::uint64_t adam_step_ = 0;
};

/// Gradients aligned with a ParameterStore's parameter order.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store) {
    grads_.reserve(store.size());
    for (const auto& p : store) grads_.push_back(Tensor::zeros_like(p.value));
  }

  Tensor& operator[](std::size_t i) { return grads_.at(i); }
  const Tensor& operator[](std::size_t i) const { return grads_.at(i); }
  std::size_t size() const noexcept { return grads_.size(); }

  void scale(double c) {
    for (auto& g : grads_)
      for (auto& x : g.values()) x *= c;
  }

 private:
  std::vector<Tensor> grads_;
};

}  // namespace alp::nn
