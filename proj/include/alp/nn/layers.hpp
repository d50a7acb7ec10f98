#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "alp/nn/tape.hpp"

namespace alp::nn {

/// x W + b, with b broadcast over rows.
inline Var linear(const Var& x, const Var& w, const Var& b) { return add_rowvec(matmul(x, w), b); }

/// Parameters of a GRU cell over width k: each gate weight is 2k x k and
/// acts on the concatenation [h, m].
struct GruWeights {
  Var wz, bz, wr, br, wh, bh;
};

inline Var gru_cell(const Var& h_prev, const Var& m, const GruWeights& w) {
  detail::require(h_prev.value().shape() == m.value().shape(), "gru_cell",
                  h_prev.value().shape_string() + " vs " + m.value().shape_string());
  const Var hm = concat_cols({h_prev, m});
  const Var z = sigmoid(linear(hm, w.wz, w.bz));
  const Var r = sigmoid(linear(hm, w.wr, w.br));
  const Var cand = tanh(linear(concat_cols({mul(r, h_prev), m}), w.wh, w.bh));
  // (1 - z) h + z h~ = h + z (h~ - h)
  return add(h_prev, mul(z, sub(cand, h_prev)));
}

/// Scaled dot-product attention. Row i mixes the value rows with weights
/// softmax_j(q_i . k_j / sqrt(d_k)); `exclude_self` drops j = i.
inline Var attention(const Var& q, const Var& k, const Var& v, double d_k, bool exclude_self) {
  detail::require(q.value().cols() == k.value().cols(), "attention", "query/key width mismatch");
  detail::require(k.value().rows() == v.value().rows(), "attention", "key/value count mismatch");
  if (d_k <= 0) throw ShapeError("attention: d_k must be positive");
  const Var scores = matmul(q, transpose(k));
  const Var alpha = softmax_rows(scores, 1.0 / std::sqrt(d_k), exclude_self);
  return matmul(alpha, v);
}

/// Multi-head attention: x is projected by wq, wk, wv (width x width), split
/// into `heads` column blocks, attended per block and concatenated.
inline Var multi_head_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv,
                                std::size_t heads, bool exclude_self) {
  const Var q = matmul(x, wq);
  const Var k = matmul(x, wk);
  const Var v = matmul(x, wv);
  const std::size_t width = q.value().cols();
  if (heads == 0 || width % heads != 0)
    throw ShapeError("multi_head_attention: width " + std::to_string(width) +
                     " not divisible into " + std::to_string(heads) + " heads");
  const std::size_t dk = width / heads;
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h)
    outs.push_back(attention(slice_cols(q, h * dk, dk), slice_cols(k, h * dk, dk),
                             slice_cols(v, h * dk, dk), static_cast<double>(dk), exclude_self));
  return concat_cols(outs);
}

}  // namespace alp::nn
