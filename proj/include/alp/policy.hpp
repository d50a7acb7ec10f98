#pragma once

// Graph encoder with actor and critic heads.
//
// Encoder: h0 = tanh(X W_in + b_in); `rounds` message-passing steps
//   m_i = sum_{j != i} MLP([h_i, h_j, e_ij]),  h_i <- GRU(h_i, m_i)
// then multi-head attention over the other nodes, then two graph
// convolutions H1 = relu(A' X' W1), Z = relu(A' H1 W2), where A' is the
// adjacency, row-normalized by default.
//
// The message MLP FC(2k+5 -> k) -> relu -> FC(k -> k) is evaluated in split
// form: its first layer is h_i Ws + h_j Wn + e_ij We + b1, and the second
// layer commutes with the sum over j.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "alp/config.hpp"
#include "alp/graph.hpp"
#include "alp/nn/layers.hpp"
#include "alp/random.hpp"

namespace alp::policy {

enum class AdjacencyNorm { Mean, Sum };
enum class EncoderOrder { MessageAttentionConv, ConvMessageAttention };

struct PolicyConfig {
  std::size_t hidden = 128;
  std::size_t heads = 4;
  std::size_t rounds = 2;
  std::size_t head_hidden1 = 256;
  std::size_t head_hidden2 = 128;
  AdjacencyNorm adjacency = AdjacencyNorm::Mean;
  EncoderOrder order = EncoderOrder::MessageAttentionConv;

  static PolicyConfig from(const ConfigFile& f) {
    PolicyConfig c;
    auto count = [&](const char* key, std::size_t dflt) {
      const double v = f.get(key, static_cast<double>(dflt));
      if (!(v >= 1) || v != std::floor(v)) throw ParseError(std::string(key) + " must be a positive integer");
      return static_cast<std::size_t>(v);
    };
    c.hidden = count("hidden", c.hidden);
    c.heads = count("attention_heads", c.heads);
    c.rounds = count("message_rounds", c.rounds);
    const std::string adj = f.get("adjacency_norm", std::string("mean"));
    if (adj == "mean") c.adjacency = AdjacencyNorm::Mean;
    else if (adj == "sum") c.adjacency = AdjacencyNorm::Sum;
    else throw ParseError("adjacency_norm must be mean or sum");
    const std::string order = f.get("encoder_order", std::string("message_attention_conv"));
    if (order == "message_attention_conv") c.order = EncoderOrder::MessageAttentionConv;
    else if (order == "conv_message_attention") c.order = EncoderOrder::ConvMessageAttention;
    else throw ParseError("encoder_order must be message_attention_conv or conv_message_attention");
    if (c.hidden % c.heads != 0) throw ParseError("hidden width must be divisible by attention_heads");
    return c;
  }
};

inline nn::ParameterStore init_parameters(const PolicyConfig& cfg, Rng& rng) {
  const std::size_t k = cfg.hidden, h1 = cfg.head_hidden1, h2 = cfg.head_hidden2;
  nn::ParameterStore s;
  s.add("enc.in.W", {kNodeFeatures, k}, rng);
  s.add("enc.in.b", {k}, rng);
  const std::size_t msg_fan_in = 2 * k + kEdgeFeatures;
  s.add("msg.W1_self", {k, k}, rng, msg_fan_in);
  s.add("msg.W1_nbr", {k, k}, rng, msg_fan_in);
  s.add("msg.W1_edge", {kEdgeFeatures, k}, rng, msg_fan_in);
  s.add("msg.b1", {k}, rng);
  s.add("msg.W2", {k, k}, rng);
  s.add("msg.b2", {k}, rng);
  for (const char* gate : {"z", "r", "h"}) {
    s.add(std::string("gru.W") + gate, {2 * k, k}, rng);
    s.add(std::string("gru.b") + gate, {k}, rng);
  }
  s.add("att.Wq", {k, k}, rng);
  s.add("att.Wk", {k, k}, rng);
  s.add("att.Wv", {k, k}, rng);
  s.add("conv.W1", {k, k}, rng);
  s.add("conv.W2", {k, k}, rng);
  for (const std::string head : {"actor", "critic"}) {
    s.add(head + ".W1", {k, h1}, rng);
    s.add(head + ".b1", {h1}, rng);
    s.add(head + ".W2", {h1, h2}, rng);
    s.add(head + ".b2", {h2}, rng);
    s.add(head + ".W3", {h2, head == "actor" ? std::size_t{2} : std::size_t{1}}, rng);
    s.add(head + ".b3", {head == "actor" ? std::size_t{2} : std::size_t{1}}, rng);
  }
  return s;
}

inline bool is_actor_parameter(const std::string& name) { return name.rfind("actor.", 0) == 0; }

/// Binds store parameters to tape leaves on first use. Entries of
/// `overrides` (by store index) replace the stored values, e.g. perturbed
/// actor weights.
class Bound {
 public:
  Bound(nn::Tape& tape, const nn::ParameterStore& store,
        const std::map<std::size_t, nn::Tensor>* overrides = nullptr)
      : tape_(tape), store_(store), overrides_(overrides), cache_(store.size()) {}

  nn::Var operator()(const std::string& name) {
    const std::size_t i = store_.index(name);
    if (!cache_[i]) {
      if (overrides_ && overrides_->count(i)) cache_[i] = tape_.parameter(overrides_->at(i), i);
      else cache_[i] = tape_.parameter(store_, i);
    }
    return *cache_[i];
  }

  nn::Tape& tape() { return tape_; }

 private:
  nn::Tape& tape_;
  const nn::ParameterStore& store_;
  const std::map<std::size_t, nn::Tensor>* overrides_;
  std::vector<std::optional<nn::Var>> cache_;
};

namespace detail {

inline bool complete_adjacency(const nn::Tensor& adj) {
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t j = 0; j < adj.cols(); ++j)
      if (adj.at(i, j) != (i == j ? 0.0 : 1.0)) return false;
  return true;
}

/// A h, or D^-1 A h with row normalization.
inline nn::Var adjacency_apply(const nn::Var& h, const nn::Tensor& adj, AdjacencyNorm norm) {
  // The usual graph is complete, where A h is a neighbour sum.
  if (complete_adjacency(adj)) return nn::neighbor_sum(h, norm == AdjacencyNorm::Mean);
  nn::Tensor a = adj;
  if (norm == AdjacencyNorm::Mean)
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double deg = 0;
      for (std::size_t c = 0; c < a.cols(); ++c) deg += a.at(r, c);
      if (deg > 0)
        for (std::size_t c = 0; c < a.cols(); ++c) a.at(r, c) /= deg;
    }
  return nn::matmul(h.tape().constant(std::move(a)), h);
}

inline nn::Var message_rounds(Bound& p, nn::Var h, const StateGraph& g, const PolicyConfig& cfg) {
  const double others = static_cast<double>(g.size() - 1);
  const nn::GruWeights gru{p("gru.Wz"), p("gru.bz"), p("gru.Wr"), p("gru.br"), p("gru.Wh"), p("gru.bh")};
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const nn::Var s = nn::pairwise_message(nn::matmul(h, p("msg.W1_self")), nn::matmul(h, p("msg.W1_nbr")),
                                           g.edges, p("msg.W1_edge"), p("msg.b1"));
    const nn::Var m = nn::add_rowvec(nn::matmul(s, p("msg.W2")), nn::scale(p("msg.b2"), others));
    h = nn::gru_cell(h, m, gru);
  }
  return h;
}

inline nn::Var attention_mix(Bound& p, const nn::Var& h, const PolicyConfig& cfg) {
  return nn::multi_head_attention(h, p("att.Wq"), p("att.Wk"), p("att.Wv"), cfg.heads, true);
}

inline nn::Var convolutions(Bound& p, const nn::Var& x, const StateGraph& g, const PolicyConfig& cfg) {
  const nn::Var h1 = nn::relu(nn::matmul(adjacency_apply(x, g.adj, cfg.adjacency), p("conv.W1")));
  return nn::relu(nn::matmul(adjacency_apply(h1, g.adj, cfg.adjacency), p("conv.W2")));
}

inline nn::Var mlp_head(Bound& p, const std::string& head, const nn::Var& x) {
  const nn::Var a = nn::relu(nn::linear(x, p(head + ".W1"), p(head + ".b1")));
  const nn::Var b = nn::relu(nn::linear(a, p(head + ".W2"), p(head + ".b2")));
  return nn::linear(b, p(head + ".W3"), p(head + ".b3"));
}

}  // namespace detail

/// Node embeddings Z (n x hidden).
inline nn::Var encode(Bound& p, const StateGraph& g, const PolicyConfig& cfg = {}) {
  if (g.size() == 0) throw nn::ShapeError("encode: empty graph");
  if (g.x.cols() != kNodeFeatures) throw nn::ShapeError("encode: node features must have 9 columns");
  const nn::Var x = p.tape().constant(g.x);
  nn::Var h = nn::tanh(nn::linear(x, p("enc.in.W"), p("enc.in.b")));
  if (cfg.order == EncoderOrder::ConvMessageAttention) {
    h = detail::convolutions(p, h, g, cfg);
    h = detail::message_rounds(p, h, g, cfg);
    return detail::attention_mix(p, h, cfg);
  }
  h = detail::message_rounds(p, h, g, cfg);
  h = detail::attention_mix(p, h, cfg);
  return detail::convolutions(p, h, g, cfg);
}

/// Per-node [mu, log_sigma] (n x 2).
inline nn::Var actor_head(Bound& p, const nn::Var& z) { return detail::mlp_head(p, "actor", z); }

/// State value (1 x 1) from the mean-pooled embeddings.
inline nn::Var critic_head(Bound& p, const nn::Var& z) {
  return detail::mlp_head(p, "critic", nn::mean_rows(z));
}

inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 2.0;
inline constexpr double kSigmaFloor = 1e-5;

inline double sigma_of(double log_sigma) {
  return std::exp(std::clamp(log_sigma, kLogSigmaMin, kLogSigmaMax)) + kSigmaFloor;
}

/// Maps a pre-squash value u to a landing time in [E, L].
inline Seconds map_to_window(double u, Seconds earliest, Seconds latest) {
  return std::clamp(earliest + nn::sigmoid(u) * (latest - earliest), earliest, latest);
}

/// Inverse of map_to_window, with the window fraction kept off 0 and 1.
inline double unmap_from_window(Seconds t, Seconds earliest, Seconds latest) {
  if (!(latest > earliest)) return 0.0;
  const double f = std::clamp((t - earliest) / (latest - earliest), 1e-6, 1.0 - 1e-6);
  return std::log(f / (1.0 - f));
}

struct ActionDistribution {
  double mu = 0;
  double log_sigma = 0;  // before clamping
  double sigma = 1;
  Seconds t = 0;         // deterministic landing time from mu
};

inline ActionDistribution act(double mu, double log_sigma, Seconds earliest, Seconds latest) {
  if (latest < earliest) throw InvalidArgument("act: window end precedes start");
  return {mu, log_sigma, sigma_of(log_sigma), map_to_window(mu, earliest, latest)};
}

struct SampledAction {
  double u = 0;  // pre-mapping Gaussian draw
  Seconds t = 0;
};

inline SampledAction sample_action(const ActionDistribution& d, Seconds earliest, Seconds latest, Rng& rng) {
  const double u = rng.normal(d.mu, d.sigma);
  return {u, map_to_window(u, earliest, latest)};
}

/// Gaussian log-density of u under N(mu, sigma) with sigma from log_sigma,
/// all on the tape (mu, log_sigma are 1 x 1).
inline nn::Var log_prob(const nn::Var& mu, const nn::Var& log_sigma, double u) {
  nn::Tape& t = mu.tape();
  const nn::Var sigma = nn::add_scalar(nn::exp(nn::clamp(log_sigma, kLogSigmaMin, kLogSigmaMax)), kSigmaFloor);
  const nn::Var z = nn::div(nn::sub(t.constant(nn::Tensor::scalar(u)), mu), sigma);
  const nn::Var lp = nn::add(nn::scale(nn::square(z), -0.5), nn::scale(nn::log(sigma), -1.0));
  return nn::add_scalar(lp, -0.5 * std::log(2.0 * std::numbers::pi));
}

/// Entropy 0.5 log(2 pi e sigma^2) of the clamped Gaussian.
inline nn::Var entropy(const nn::Var& log_sigma) {
  const nn::Var sigma = nn::add_scalar(nn::exp(nn::clamp(log_sigma, kLogSigmaMin, kLogSigmaMax)), kSigmaFloor);
  return nn::add_scalar(nn::log(sigma), 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e));
}

/// Inference-only outputs for a graph.
struct Evaluation {
  std::vector<double> mu, log_sigma;
  double value = 0;
};

inline Evaluation evaluate(const nn::ParameterStore& store, const StateGraph& g, const PolicyConfig& cfg = {},
                           bool with_value = true, const std::map<std::size_t, nn::Tensor>* overrides = nullptr) {
  nn::Tape tape(false);
  Bound p(tape, store, overrides);
  const nn::Var z = encode(p, g, cfg);
  const nn::Var a = actor_head(p, z);
  Evaluation e;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e.mu.push_back(a.value().at(i, 0));
    e.log_sigma.push_back(a.value().at(i, 1));
  }
  if (with_value) e.value = critic_head(p, z).value().item();
  return e;
}

inline double state_value(const nn::ParameterStore& store, const StateGraph& g, const PolicyConfig& cfg = {}) {
  nn::Tape tape(false);
  Bound p(tape, store);
  return critic_head(p, encode(p, g, cfg)).value().item();
}

}  // namespace alp::policy
