#include <gtest/gtest.h>

#include <filesystem>

#include "alp/nn/adam.hpp"
#include "alp/nn/checkpoint.hpp"
#include "alp/nn/layers.hpp"
#include "alp/nn/tape.hpp"
#include "support/gradcheck.hpp"

namespace alp::nn {
namespace {

using alp::testing::gradcheck;
using alp::testing::kGradTolerance;
using alp::testing::random_tensor;

Var sum_weighted(Tape& t, const Var& y, Rng& rng) {
  // A fixed random projection keeps the loss sensitive to every output entry.
  return sum_all(mul(y, t.constant(random_tensor(y.value().shape(), rng))));
}

using UnaryOp = Var (*)(const Var&);

TEST(Ops, ForwardExamples) {
  Tape t(false);
  const Var x = t.constant(Tensor::matrix(1, 3, {-1, 0, 2}));
  EXPECT_EQ(relu(x).value().values(), (std::vector<double>{0, 0, 2}));
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_DOUBLE_EQ(sigmoid(t.constant(Tensor::scalar(0))).value().item(), 0.5);
  const Var s = softmax_rows(t.constant(Tensor::matrix(2, 4, {3, 3, 3, 3, -1, -1, -1, -1})), 0.7);
  for (double v : s.value().values()) EXPECT_DOUBLE_EQ(v, 0.25);
  const Var m = matmul(t.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), t.constant(Tensor::matrix(2, 1, {5, 6})));
  EXPECT_EQ(m.value().values(), (std::vector<double>{17, 39}));
  const Var c = concat_cols({t.constant(Tensor::matrix(2, 1, {1, 2})), t.constant(Tensor::matrix(2, 2, {3, 4, 5, 6}))});
  EXPECT_EQ(c.value().values(), (std::vector<double>{1, 3, 4, 2, 5, 6}));
}

TEST(Ops, ShapeErrors) {
  Tape t;
  const Var a = t.constant(Tensor({2, 3}));
  const Var b = t.constant(Tensor({2, 2}));
  EXPECT_THROW(matmul(a, a), ShapeError);
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(slice_cols(a, 2, 2), ShapeError);
  EXPECT_THROW(t.backward(a), ShapeError);
}

TEST(Ops, NonFiniteTrips) {
  Tape t;
  const Var x = t.parameter(Tensor::matrix(1, 1, {-1}), 0);
  EXPECT_THROW(log(x), NumericError);
  EXPECT_THROW(div(x, t.constant(Tensor::matrix(1, 1, {0}))), NumericError);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Rng rng(1);
  Tape t(false);
  const Var s = softmax_rows(t.constant(random_tensor({5, 5}, rng, -30, 30)), 1.3, true);
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < 5; ++j) sum += s.value().at(i, j);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(s.value().at(i, i), 0.0);
  }
}

TEST(Gradients, ElementwiseOps) {
  Rng rng(2);
  auto proj = [](Tape& t, const Var& y) {
    Rng r(3);
    return sum_weighted(t, y, r);
  };
  const std::vector<std::pair<const char*, UnaryOp>> ops{
      {"relu", relu}, {"sigmoid", static_cast<UnaryOp>(sigmoid)}, {"tanh", tanh}, {"exp", exp}, {"square", square}};
  for (const auto& [name, op] : ops) {
    const double err =
        gradcheck([&, op = op](Tape& t, const std::vector<Var>& v) { return proj(t, op(v[0])); }, {random_tensor({3, 4}, rng)});
    EXPECT_LT(err, kGradTolerance) << name;
  }
  EXPECT_LT(gradcheck([&](Tape& t, const std::vector<Var>& v) { return proj(t, log(v[0])); },
                      {random_tensor({2, 3}, rng, 0.5, 2)}),
            kGradTolerance);
  EXPECT_LT(gradcheck([&](Tape& t, const std::vector<Var>& v) { return proj(t, clamp(v[0], -0.5, 0.5)); },
                      {random_tensor({2, 3}, rng)}),
            kGradTolerance);
}

TEST(Gradients, BinaryAndStructuralOps) {
  Rng rng(5);
  struct Case {
    const char* name;
    alp::testing::TensorFn f;
    std::vector<Tensor> inputs;
  };
  auto proj = [](Tape& t, const Var& y) {
    Rng r(77);
    return sum_weighted(t, y, r);
  };
  const std::vector<Case> cases{
      {"matmul", [&](Tape& t, const std::vector<Var>& v) { return proj(t, matmul(v[0], v[1])); },
       {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}},
      {"transpose", [&](Tape& t, const std::vector<Var>& v) { return proj(t, transpose(v[0])); }, {random_tensor({3, 4}, rng)}},
      {"add", [&](Tape& t, const std::vector<Var>& v) { return proj(t, add(v[0], v[1])); },
       {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}},
      {"sub", [&](Tape& t, const std::vector<Var>& v) { return proj(t, sub(v[0], v[1])); },
       {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}},
      {"mul", [&](Tape& t, const std::vector<Var>& v) { return proj(t, mul(v[0], v[1])); },
       {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}},
      {"div", [&](Tape& t, const std::vector<Var>& v) { return proj(t, div(v[0], v[1])); },
       {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng, 0.5, 2)}},
      {"add_rowvec", [&](Tape& t, const std::vector<Var>& v) { return proj(t, add_rowvec(v[0], v[1])); },
       {random_tensor({3, 4}, rng), random_tensor({4}, rng)}},
      {"scale", [&](Tape& t, const std::vector<Var>& v) { return proj(t, add_scalar(scale(v[0], -2.5), 3)); },
       {random_tensor({2, 2}, rng)}},
      {"concat_cols", [&](Tape& t, const std::vector<Var>& v) { return proj(t, concat_cols({v[0], v[1], v[0]})); },
       {random_tensor({2, 3}, rng), random_tensor({2, 1}, rng)}},
      {"slice_cols", [&](Tape& t, const std::vector<Var>& v) { return proj(t, slice_cols(v[0], 1, 2)); },
       {random_tensor({3, 4}, rng)}},
      {"row", [&](Tape& t, const std::vector<Var>& v) { return proj(t, row(v[0], 2)); }, {random_tensor({3, 4}, rng)}},
      {"mean_rows", [&](Tape& t, const std::vector<Var>& v) { return proj(t, mean_rows(v[0])); }, {random_tensor({3, 4}, rng)}},
      {"softmax_rows", [&](Tape& t, const std::vector<Var>& v) { return proj(t, softmax_rows(v[0], 0.8)); },
       {random_tensor({3, 4}, rng)}},
      {"softmax_rows_masked", [&](Tape& t, const std::vector<Var>& v) { return proj(t, softmax_rows(v[0], 1.7, true)); },
       {random_tensor({4, 4}, rng)}},
      {"neighbor_sum", [&](Tape& t, const std::vector<Var>& v) { return proj(t, neighbor_sum(v[0], false)); },
       {random_tensor({3, 4}, rng)}},
      {"neighbor_mean", [&](Tape& t, const std::vector<Var>& v) { return proj(t, neighbor_sum(v[0], true)); },
       {random_tensor({3, 4}, rng)}},
  };
  for (const auto& c : cases) EXPECT_LT(gradcheck(c.f, c.inputs), kGradTolerance) << c.name;
}

TEST(Gradients, PairwiseMessage) {
  Rng rng(6);
  const Tensor edges = random_tensor({3, 3, 5}, rng, 0, 1);
  const double err = gradcheck(
      [&](Tape& t, const std::vector<Var>& v) {
        Rng r(8);
        return sum_weighted(t, pairwise_message(v[0], v[1], edges, v[2], v[3]), r);
      },
      {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng), random_tensor({5, 4}, rng), random_tensor({4}, rng)});
  EXPECT_LT(err, kGradTolerance);
}

TEST(PairwiseMessage, MatchesExplicitSum) {
  Rng rng(9);
  Tape t(false);
  const Tensor P = random_tensor({3, 2}, rng), Q = random_tensor({3, 2}, rng), E = random_tensor({3, 3, 2}, rng),
               W = random_tensor({2, 2}, rng), B = random_tensor({2}, rng);
  const Var y = pairwise_message(t.constant(P), t.constant(Q), E, t.constant(W), t.constant(B));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == j) continue;
        double z = P.at(i, c) + Q.at(j, c) + B[c];
        for (std::size_t f = 0; f < 2; ++f) z += E.at(i, j, f) * W.at(f, c);
        s += std::max(0.0, z);
      }
      EXPECT_NEAR(y.value().at(i, c), s, 1e-12);
    }
}

GruWeights gru_weights(const std::vector<Var>& v) { return {v[2], v[3], v[4], v[5], v[6], v[7]}; }

TEST(Gru, ZeroWeightsHalveState) {
  Tape t(false);
  const Tensor h = Tensor::matrix(2, 3, {0.2, -0.4, 0.9, 1.0, -1.0, 0.0});
  std::vector<Var> v{t.constant(h), t.constant(Tensor({2, 3}, 0.7))};
  for (auto shape : {std::vector<std::size_t>{6, 3}, {3}, {6, 3}, {3}, {6, 3}, {3}}) v.push_back(t.constant(Tensor(shape)));
  const Var out = gru_cell(v[0], v[1], gru_weights(v));
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_DOUBLE_EQ(out.value()[k], 0.5 * h[k]);
}

TEST(Gru, StaysInUnitBoxAndGradchecks) {
  Rng rng(10);
  std::vector<Tensor> in{random_tensor({3, 4}, rng, -0.99, 0.99), random_tensor({3, 4}, rng, -3, 3)};
  for (int k = 0; k < 3; ++k) {
    in.push_back(random_tensor({8, 4}, rng, -2, 2));
    in.push_back(random_tensor({4}, rng));
  }
  Tape t(false);
  std::vector<Var> v;
  for (std::size_t k = 0; k < in.size(); ++k) v.push_back(t.constant(in[k]));
  for (double x : gru_cell(v[0], v[1], gru_weights(v)).value().values()) {
    EXPECT_GT(x, -1.0);
    EXPECT_LT(x, 1.0);
  }
  const double err = gradcheck(
      [](Tape& tp, const std::vector<Var>& vs) {
        Rng r(11);
        return sum_weighted(tp, gru_cell(vs[0], vs[1], gru_weights(vs)), r);
      },
      in);
  EXPECT_LT(err, kGradTolerance);
}

TEST(Attention, Examples) {
  Tape t(false);
  Rng rng(12);
  const Var q = t.constant(random_tensor({3, 2}, rng));
  const Var same_k = t.constant(Tensor({3, 2}, 0.5));
  const Var v = t.constant(Tensor::matrix(3, 1, {1, 2, 6}));
  const Var out = attention(q, same_k, v, 2, false);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out.value().at(i, 0), 3.0, 1e-12);

  const Var one = attention(t.constant(random_tensor({1, 2}, rng)), t.constant(random_tensor({1, 2}, rng)),
                            t.constant(Tensor::matrix(1, 2, {4, -5})), 2, false);
  EXPECT_EQ(one.value().values(), (std::vector<double>{4, -5}));

  const Var masked = attention(q, same_k, v, 2, true);
  EXPECT_NEAR(masked.value().at(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(masked.value().at(2, 0), 1.5, 1e-12);
}

TEST(Attention, MultiHeadGradcheck) {
  Rng rng(13);
  const double err = gradcheck(
      [](Tape& t, const std::vector<Var>& v) {
        Rng r(14);
        return sum_weighted(t, multi_head_attention(v[0], v[1], v[2], v[3], 2, true), r);
      },
      {random_tensor({3, 4}, rng), random_tensor({4, 4}, rng), random_tensor({4, 4}, rng), random_tensor({4, 4}, rng)});
  EXPECT_LT(err, kGradTolerance);
  Tape t;
  EXPECT_THROW(multi_head_attention(t.constant(Tensor({3, 4})), t.constant(Tensor({4, 4})), t.constant(Tensor({4, 4})),
                                    t.constant(Tensor({4, 4})), 3, true),
               ShapeError);
}

TEST(Linear, Gradcheck) {
  Rng rng(15);
  const double err = gradcheck(
      [](Tape& t, const std::vector<Var>& v) {
        Rng r(16);
        return sum_weighted(t, relu(linear(v[0], v[1], v[2])), r);
      },
      {random_tensor({3, 5}, rng), random_tensor({5, 4}, rng), random_tensor({4}, rng)});
  EXPECT_LT(err, kGradTolerance);
}

TEST(Backward, SumOfSquares) {
  ParameterStore store;
  store.add("theta", Tensor::matrix(1, 1, {3}));
  Tape t;
  const Var th = t.parameter(store, "theta");
  t.backward(sum_all(square(th)));
  Gradients g(store);
  t.accumulate_gradients(g);
  EXPECT_DOUBLE_EQ(g[0][0], 6.0);
}

TEST(Backward, SharedLeafAccumulates) {
  Tape t;
  const Var x = t.parameter(Tensor::matrix(1, 1, {2}), 0);
  const Var y = add(mul(x, x), scale(x, 3));
  t.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
  Tape inference(false);
  EXPECT_THROW(inference.backward(inference.constant(Tensor::scalar(1))), InvalidArgument);
}

TEST(Adam, ClipAndZeroGradient) {
  ParameterStore store;
  store.add("w", Tensor::matrix(1, 2, {1.0, -1.0}));
  const ParameterStore before = store;
  Gradients zero(store);
  adam_step(store, zero, {});
  EXPECT_EQ(store.get("w").value, before.get("w").value);
  EXPECT_EQ(store.adam_step(), 1u);

  AdamConfig cfg;
  Gradients g(store);
  g[0][0] = 50;
  g[0][1] = 6;
  Gradients clipped = g;
  clip_gradients(clipped, cfg);
  EXPECT_EQ(clipped[0][0], 10);
  EXPECT_EQ(clipped[0][1], 6);

  ParameterStore s2;
  s2.add("w", Tensor::matrix(1, 2, {0, 0}));
  adam_step(s2, g, cfg);
  // First moment sees the clipped value: m = (1 - beta1) * 10.
  EXPECT_NEAR(s2.get("w").m[0], 0.1 * 10, 1e-12);
  EXPECT_NEAR(s2.get("w").v[0], 0.001 * 100, 1e-12);
  // The first bias-corrected step moves each weight by lr against the gradient sign.
  EXPECT_NEAR(s2.get("w").value[0], -cfg.lr, 1e-12);

  AdamConfig global;
  global.clip_mode = AdamConfig::Clip::GlobalNorm;
  Gradients gn = g;
  clip_gradients(gn, global);
  EXPECT_NEAR(std::hypot(gn[0][0], gn[0][1]), 10.0, 1e-12);
}

TEST(Adam, RejectsNaN) {
  ParameterStore store;
  store.add("w", Tensor::matrix(1, 1, {1}));
  Gradients g(store);
  g[0][0] = std::nan("");
  EXPECT_THROW(adam_step(store, g, {}), NumericError);
}

TEST(Adam, MinimizesQuadratic) {
  ParameterStore store;
  store.add("w", Tensor::matrix(1, 1, {3}));
  AdamConfig cfg;
  cfg.lr = 0.05;
  for (int k = 0; k < 2000; ++k) {
    Tape t;
    const Var w = t.parameter(store, "w");
    t.backward(sum_all(square(add_scalar(w, -1.0))));
    Gradients g(store);
    t.accumulate_gradients(g);
    adam_step(store, g, cfg);
  }
  EXPECT_NEAR(store.get("w").value[0], 1.0, 1e-3);
}

ParameterStore sample_store() {
  Rng rng(17);
  ParameterStore s;
  s.add("a.W", {3, 4}, rng);
  s.add("a.b", {4}, rng);
  s.add("edges", Tensor({2, 2, 2}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, -0.0}));
  s[0].m = random_tensor({3, 4}, rng);
  s[0].v = random_tensor({3, 4}, rng, 0, 1);
  s.set_adam_step(42);
  return s;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto s = sample_store();
  const auto bytes = serialize_checkpoint(s);
  EXPECT_EQ(deserialize_checkpoint(bytes), s);
  EXPECT_EQ(serialize_checkpoint(deserialize_checkpoint(bytes)), bytes);

  const auto path = std::filesystem::temp_directory_path() / "alp_nn_checkpoint_test.ckpt";
  save_checkpoint(s, path);
  EXPECT_EQ(load_checkpoint(path), s);
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptionDetected) {
  const auto bytes = serialize_checkpoint(sample_store());
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, cut)), CheckpointError) << cut;
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(flipped), CheckpointError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), CheckpointError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(deserialize_checkpoint(bad_version), CheckpointError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), CheckpointError);
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/file.ckpt"), Error);
}

}  // namespace
}  // namespace alp::nn
