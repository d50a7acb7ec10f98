#pragma once

// Reverse-mode differentiation tape and the differentiable op set.
//
// Every op evaluates eagerly, checks its output for NaN/Inf and, when any
// input requires a gradient, records a closure that pushes the output
// gradient back to its inputs. Nodes are created in topological order, so
// backward() is a single reverse sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alp/nn/parameters.hpp"
#include "alp/nn/tensor.hpp"

namespace alp::nn {

class Tape;

class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Tensor& grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  /// With `record_gradients` false the tape only evaluates (inference mode).
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) { return push(std::move(value), false, nullptr); }

  /// Leaf bound to a store parameter; its gradient is collected by
  /// accumulate_gradients().
  Var parameter(const ParameterStore& store, std::size_t index) {
    return parameter(store[index].value, index);
  }
  Var parameter(const ParameterStore& store, const std::string& name) {
    return parameter(store, store.index(name));
  }
  /// Leaf with an explicit value standing in for store parameter `index`
  /// (used for perturbed copies of the weights).
  Var parameter(Tensor value, std::size_t index) {
    Var v = push(std::move(value), record_, nullptr);
    if (record_) params_.emplace_back(v.id(), index);
    return v;
  }

  /// Appends an op node. The id of the new node is size() at call time.
  Var record(Tensor value, const std::vector<Var>& parents, const char* op, Backward fn) {
    if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
    bool rg = false;
    if (record_)
      for (const Var& p : parents) rg = rg || requires_grad(p);
    return push(std::move(value), rg, rg ? std::move(fn) : nullptr);
  }

  bool recording() const noexcept { return record_; }
  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }

  /// Gradient buffer of a node, allocated on first use.
  Tensor& grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor::zeros_like(n.value);
    return n.grad;
  }
  const Tensor& grad_or_empty(std::size_t id) const { return nodes_[id].grad; }
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  void backward(const Var& loss) {
    if (!record_) throw InvalidArgument("backward on a tape that does not record gradients");
    if (loss.value().size() != 1) throw ShapeError("backward needs a scalar loss");
    grad(loss.id())[0] += 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (n.backward && has_grad(id)) n.backward(*this);
    }
    for (const auto& entry : params_)
      if (has_grad(entry.first) && !nodes_[entry.first].grad.all_finite())
        throw NumericError("non-finite gradient in backward pass");
  }

  /// Adds this tape's parameter gradients into `g`.
  void accumulate_gradients(Gradients& g) const {
    for (const auto& [node, index] : params_) {
      const Tensor& src = nodes_[node].grad;
      if (src.empty()) continue;
      Tensor& dst = g[index];
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Tensor value, bool rg, Backward fn) {
    nodes_.push_back(Node{std::move(value), {}, rg, std::move(fn)});
    return Var(this, nodes_.size() - 1);
  }

  std::deque<Node> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> params_;
  bool record_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline const Tensor& Var::grad() const { return tape_->grad_or_empty(id_); }

namespace detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using MapM = Eigen::Map<RowMat>;

inline MapC view(const double* p, std::size_t r, std::size_t c) {
  return MapC(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
inline MapC view(const Tensor& t) { return view(t.data(), t.rows(), t.cols()); }
inline MapM view(Tensor& t) {
  return MapM(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

inline void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ShapeError(std::string(op) + ": " + what);
}

inline void same_shape(const Var& a, const Var& b, const char* op) {
  require(a.value().shape() == b.value().shape(), op,
          a.value().shape_string() + " vs " + b.value().shape_string());
}

/// Records `value` with a backward closure built from the output id.
template <class Make>
Var emit(Tape& t, Tensor value, const std::vector<Var>& parents, const char* op, Make make) {
  const std::size_t out = t.size();
  return t.record(std::move(value), parents, op, make(out));
}

inline void add_into(Tensor& g, const Tensor& d, double s = 1.0) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * d[i];
}

/// Element-wise op with derivative written in terms of input x and output y.
template <class F, class D>
Var pointwise(const Var& a, const char* op, F f, D dfdx) {
  Tensor y = a.value();
  for (auto& v : y.values()) v = f(v);
  return emit(a.tape(), std::move(y), {a}, op, [a, dfdx](std::size_t o) {
    return [a, o, dfdx](Tape& t) {
      const Tensor& dy = t.grad(o);
      const Tensor& x = a.value();
      const Tensor& y = t.value(o);
      Tensor& g = t.grad(a.id());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * dfdx(x[i], y[i]);
    };
  });
}

}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  detail::require(A.cols() == B.rows(), "matmul", A.shape_string() + " x " + B.shape_string());
  Tensor y({A.rows(), B.cols()});
  detail::view(y).noalias() = detail::view(A) * detail::view(B);
  return detail::emit(a.tape(), std::move(y), {a, b}, "matmul", [a, b](std::size_t o) {
    return [a, b, o](Tape& t) {
      const Tensor& dy = t.grad(o);
      if (t.requires_grad(a))
        detail::view(t.grad(a.id())).noalias() += detail::view(dy) * detail::view(b.value()).transpose();
      if (t.requires_grad(b))
        detail::view(t.grad(b.id())).noalias() += detail::view(a.value()).transpose() * detail::view(dy);
    };
  });
}

inline Var transpose(const Var& a) {
  const Tensor& A = a.value();
  Tensor y({A.cols(), A.rows()});
  detail::view(y) = detail::view(A).transpose();
  return detail::emit(a.tape(), std::move(y), {a}, "transpose", [a](std::size_t o) {
    return [a, o](Tape& t) {
      Tensor& g = t.grad(a.id());
      detail::view(g) += detail::view(t.grad(o)).transpose();
    };
  });
}

inline Var add(const Var& a, const Var& b) {
  detail::same_shape(a, b, "add");
  Tensor y = a.value();
  detail::add_into(y, b.value());
  return detail::emit(a.tape(), std::move(y), {a, b}, "add", [a, b](std::size_t o) {
    return [a, b, o](Tape& t) {
      if (t.requires_grad(a)) detail::add_into(t.grad(a.id()), t.grad(o));
      if (t.requires_grad(b)) detail::add_into(t.grad(b.id()), t.grad(o));
    };
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::same_shape(a, b, "sub");
  Tensor y = a.value();
  detail::add_into(y, b.value(), -1.0);
  return detail::emit(a.tape(), std::move(y), {a, b}, "sub", [a, b](std::size_t o) {
    return [a, b, o](Tape& t) {
      if (t.requires_grad(a)) detail::add_into(t.grad(a.id()), t.grad(o));
      if (t.requires_grad(b)) detail::add_into(t.grad(b.id()), t.grad(o), -1.0);
    };
  });
}

/// Element-wise product.
inline Var mul(const Var& a, const Var& b) {
  detail::same_shape(a, b, "mul");
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  return detail::emit(a.tape(), std::move(y), {a, b}, "mul", [a, b](std::size_t o) {
    return [a, b, o](Tape& t) {
      const Tensor& dy = t.grad(o);
      if (t.requires_grad(a)) {
        Tensor& g = t.grad(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * b.value()[i];
      }
      if (t.requires_grad(b)) {
        Tensor& g = t.grad(b.id());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * a.value()[i];
      }
    };
  });
}

/// Element-wise quotient.
inline Var div(const Var& a, const Var& b) {
  detail::same_shape(a, b, "div");
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= b.value()[i];
  return detail::emit(a.tape(), std::move(y), {a, b}, "div", [a, b](std::size_t o) {
    return [a, b, o](Tape& t) {
      const Tensor& dy = t.grad(o);
      const Tensor& B = b.value();
      if (t.requires_grad(a)) {
        Tensor& g = t.grad(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] / B[i];
      }
      if (t.requires_grad(b)) {
        Tensor& g = t.grad(b.id());
        const Tensor& A = a.value();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= dy[i] * A[i] / (B[i] * B[i]);
      }
    };
  });
}

/// Adds vector `b` (length = cols of `a`) to every row of `a`.
inline Var add_rowvec(const Var& a, const Var& b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  detail::require(B.size() == A.cols(), "add_rowvec", A.shape_string() + " + " + B.shape_string());
  const std::size_t r = A.rows(), c = A.cols();
  Tensor y = A;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] += B[j];
  return detail::emit(a.tape(), std::move(y), {a, b}, "add_rowvec", [a, b, r, c](std::size_t o) {
    return [a, b, o, r, c](Tape& t) {
      const Tensor& dy = t.grad(o);
      if (t.requires_grad(a)) detail::add_into(t.grad(a.id()), dy);
      if (t.requires_grad(b)) {
        Tensor& g = t.grad(b.id());
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) g[j] += dy[i * c + j];
      }
    };
  });
}

inline Var scale(const Var& a, double s) {
  Tensor y = a.value();
  for (auto& v : y.values()) v *= s;
  return detail::emit(a.tape(), std::move(y), {a}, "scale", [a, s](std::size_t o) {
    return [a, s, o](Tape& t) { detail::add_into(t.grad(a.id()), t.grad(o), s); };
  });
}

inline Var add_scalar(const Var& a, double s) {
  Tensor y = a.value();
  for (auto& v : y.values()) v += s;
  return detail::emit(a.tape(), std::move(y), {a}, "add_scalar", [a](std::size_t o) {
    return [a, o](Tape& t) { detail::add_into(t.grad(a.id()), t.grad(o)); };
  });
}

inline Var relu(const Var& a) {
  return detail::pointwise(
      a, "relu", [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline Var sigmoid(const Var& a) {
  return detail::pointwise(
      a, "sigmoid", [](double x) { return sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& a) {
  return detail::pointwise(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

inline Var exp(const Var& a) {
  return detail::pointwise(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Var log(const Var& a) {
  return detail::pointwise(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Var square(const Var& a) {
  return detail::pointwise(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

/// The gradient passes where lo <= x <= hi.
inline Var clamp(const Var& a, double lo, double hi) {
  return detail::pointwise(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  detail::require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t r = parts.front().value().rows();
  std::size_t c = 0;
  for (const Var& p : parts) {
    detail::require(p.value().rows() == r, "concat_cols", "row count mismatch");
    c += p.value().cols();
  }
  Tensor y({r, c});
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    const std::size_t pc = P.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < pc; ++j) y[i * c + off + j] = P[i * pc + j];
    offsets.push_back(off);
    off += pc;
  }
  return detail::emit(parts.front().tape(), std::move(y), parts, "concat_cols",
                      [parts, offsets, r, c](std::size_t o) {
                        return [parts, offsets, r, c, o](Tape& t) {
                          const Tensor& dy = t.grad(o);
                          for (std::size_t k = 0; k < parts.size(); ++k) {
                            if (!t.requires_grad(parts[k])) continue;
                            Tensor& g = t.grad(parts[k].id());
                            const std::size_t pc = g.cols();
                            for (std::size_t i = 0; i < r; ++i)
                              for (std::size_t j = 0; j < pc; ++j)
                                g[i * pc + j] += dy[i * c + offsets[k] + j];
                          }
                        };
                      });
}

/// Columns [start, start + count) as a rows x count matrix.
inline Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
  const Tensor& A = a.value();
  const std::size_t r = A.rows(), c = A.cols();
  detail::require(start + count <= c, "slice_cols", "range outside " + A.shape_string());
  Tensor y({r, count});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) y[i * count + j] = A[i * c + start + j];
  return detail::emit(a.tape(), std::move(y), {a}, "slice_cols", [a, start, count, r, c](std::size_t o) {
    return [a, o, start, count, r, c](Tape& t) {
      const Tensor& dy = t.grad(o);
      Tensor& g = t.grad(a.id());
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) g[i * c + start + j] += dy[i * count + j];
    };
  });
}

/// Row `i` as a 1 x cols matrix.
inline Var row(const Var& a, std::size_t i) {
  const Tensor& A = a.value();
  const std::size_t c = A.cols();
  detail::require(i < A.rows(), "row", "index outside " + A.shape_string());
  Tensor y({1, c});
  std::copy(A.data() + i * c, A.data() + (i + 1) * c, y.data());
  return detail::emit(a.tape(), std::move(y), {a}, "row", [a, i, c](std::size_t o) {
    return [a, o, i, c](Tape& t) {
      const Tensor& dy = t.grad(o);
      Tensor& g = t.grad(a.id());
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += dy[j];
    };
  });
}

/// Column-wise mean over rows, as a 1 x cols matrix.
inline Var mean_rows(const Var& a) {
  const Tensor& A = a.value();
  const std::size_t r = A.rows(), c = A.cols();
  Tensor y({1, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[j] += A[i * c + j];
  for (auto& v : y.values()) v /= static_cast<double>(r);
  return detail::emit(a.tape(), std::move(y), {a}, "mean_rows", [a, r, c](std::size_t o) {
    return [a, o, r, c](Tape& t) {
      const Tensor& dy = t.grad(o);
      Tensor& g = t.grad(a.id());
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += dy[j] / static_cast<double>(r);
    };
  });
}

inline Var sum_all(const Var& a) {
  double s = 0;
  for (double v : a.value().values()) s += v;
  return detail::emit(a.tape(), Tensor::scalar(s), {a}, "sum_all", [a](std::size_t o) {
    return [a, o](Tape& t) {
      const double d = t.grad(o)[0];
      for (auto& v : t.grad(a.id()).values()) v += d;
    };
  });
}

/// Row-wise softmax of `scale * a`. With `exclude_diagonal` entry (i, i) is
/// masked out; a row with nothing left is all zero.
inline Var softmax_rows(const Var& a, double scale = 1.0, bool exclude_diagonal = false) {
  const Tensor& A = a.value();
  const std::size_t r = A.rows(), c = A.cols();
  Tensor y({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < c; ++j)
      if (!(exclude_diagonal && i == j)) mx = std::max(mx, scale * A[i * c + j]);
    if (mx == -INFINITY) continue;
    double z = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (exclude_diagonal && i == j) continue;
      y[i * c + j] = std::exp(scale * A[i * c + j] - mx);
      z += y[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] /= z;
  }
  return detail::emit(a.tape(), std::move(y), {a}, "softmax_rows", [a, r, c, scale](std::size_t o) {
    return [a, o, r, c, scale](Tape& t) {
      const Tensor& dy = t.grad(o);
      const Tensor& y = t.value(o);
      Tensor& g = t.grad(a.id());
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0;
        for (std::size_t j = 0; j < c; ++j) dot += dy[i * c + j] * y[i * c + j];
        for (std::size_t j = 0; j < c; ++j)
          g[i * c + j] += scale * y[i * c + j] * (dy[i * c + j] - dot);
      }
    };
  });
}

/// y_i = k * sum_{j != i} a_j over rows, with k = 1/(n-1) when `mean` is set.
/// A single row yields zeros.
inline Var neighbor_sum(const Var& a, bool mean) {
  const Tensor& A = a.value();
  const std::size_t n = A.rows(), c = A.cols();
  const double k = (n < 2) ? 0.0 : (mean ? 1.0 / static_cast<double>(n - 1) : 1.0);
  std::vector<double> total(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) total[j] += A[i * c + j];
  Tensor y({n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] = k * (total[j] - A[i * c + j]);
  return detail::emit(a.tape(), std::move(y), {a}, "neighbor_sum", [a, n, c, k](std::size_t o) {
    return [a, o, n, c, k](Tape& t) {
      const Tensor& dy = t.grad(o);
      std::vector<double> total(c, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) total[j] += dy[i * c + j];
      Tensor& g = t.grad(a.id());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += k * (total[j] - dy[i * c + j]);
    };
  });
}

/// Summed edge messages of a one-hidden-layer MLP over [h_i, h_j, e_ij]:
///   S_i = sum_{j != i} relu(p_i + q_j + e_ij . We + b)
/// where p = h W_self and q = h W_nbr come from the caller. `edges` is
/// n x n x f, `we` is f x k and `b` has k entries.
inline Var pairwise_message(const Var& p, const Var& q, const Tensor& edges, const Var& we,
                            const Var& b) {
  const Tensor& P = p.value();
  const Tensor& Q = q.value();
  const Tensor& W = we.value();
  const std::size_t n = P.rows(), k = P.cols();
  detail::require(Q.rows() == n && Q.cols() == k, "pairwise_message", "p/q shape mismatch");
  detail::require(edges.rank() == 3 && edges.dim(0) == n && edges.dim(1) == n, "pairwise_message",
                  "edge tensor must be n x n x f, got " + edges.shape_string());
  const std::size_t f = edges.dim(2);
  detail::require(W.rows() == f && W.cols() == k && b.value().size() == k, "pairwise_message",
                  "edge weight shape mismatch");

  Tensor proj({n * n, k});
  detail::view(proj).noalias() = detail::view(edges.data(), n * n, f) * detail::view(W);
  const Tensor& B = b.value();
  std::vector<std::uint8_t> active(n * n * k, 0);
  Tensor y({n, k});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t e = (i * n + j) * k;
      for (std::size_t c = 0; c < k; ++c) {
        const double z = P[i * k + c] + Q[j * k + c] + proj[e + c] + B[c];
        if (z > 0) {
          y[i * k + c] += z;
          active[e + c] = 1;
        }
      }
    }
  return detail::emit(
      p.tape(), std::move(y), {p, q, we, b}, "pairwise_message",
      [p, q, we, b, &edges, &active, n, k, f](std::size_t o) {
        return [p, q, we, b, edges, active = std::move(active), n, k, f, o](Tape& t) {
          // G is the gradient at each edge pre-activation.
          const Tensor& dy = t.grad(o);
          Tensor G({n * n, k});
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const std::size_t e = (i * n + j) * k;
              for (std::size_t c = 0; c < k; ++c)
                if (active[e + c]) G[e + c] = dy[i * k + c];
            }
          if (t.requires_grad(p)) {
            Tensor& g = t.grad(p.id());
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < n; ++j)
                for (std::size_t c = 0; c < k; ++c) g[i * k + c] += G[(i * n + j) * k + c];
          }
          if (t.requires_grad(q)) {
            Tensor& g = t.grad(q.id());
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < n; ++j)
                for (std::size_t c = 0; c < k; ++c) g[j * k + c] += G[(i * n + j) * k + c];
          }
          if (t.requires_grad(we))
            detail::view(t.grad(we.id())).noalias() +=
                detail::view(edges.data(), n * n, f).transpose() * detail::view(G);
          if (t.requires_grad(b)) {
            Tensor& g = t.grad(b.id());
            for (std::size_t e = 0; e < n * n; ++e)
              for (std::size_t c = 0; c < k; ++c) g[c] += G[e * k + c];
          }
        };
      });
}

}  // namespace alp::nn
