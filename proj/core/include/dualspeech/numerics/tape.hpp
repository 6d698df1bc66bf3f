#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dualspeech/common/rng.hpp"
#include "dualspeech/numerics/tensor.hpp"

namespace dualspeech::num {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

enum class GradMode { kEnabled, kDisabled };

/// Reverse-mode autodiff record. Every op appends one node after its inputs,
/// so node order is a topological order and backward is a single reverse
/// sweep. A tape belongs to one thread; independent tapes may run in
/// parallel against the same borrowed parameters.
template <typename T>
class Tape {
 public:
  explicit Tape(GradMode mode = GradMode::kEnabled) : grad_enabled_(mode == GradMode::kEnabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Value that never receives a gradient.
  Var constant(Tensor<T> value);
  /// Owned trainable leaf.
  Var leaf(Tensor<T> value);
  /// Borrowed trainable leaf; `value` must outlive the tape. When `sink` is
  /// given, backward accumulates straight into it.
  Var param(const Tensor<T>& value, Tensor<T>* sink = nullptr);

  const Tensor<T>& value(Var v) const;
  /// Gradient after backward. Zero-filled for nodes the loss does not reach.
  const Tensor<T>& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1. Throws a contract error if loss is not a scalar.
  void backward(Var loss);
  /// Vector-Jacobian product with an explicit upstream gradient.
  void backward(Var output, const Tensor<T>& upstream);

  // Linear algebra.
  Var matmul(Var a, Var b);
  /// a * b^T; attention scores and similarity matrices.
  Var matmul_nt(Var a, Var b);
  Var transpose(Var a);

  // Elementwise.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_row(Var a, Var row);
  Var scale(Var a, T factor);
  Var add_scalar(Var a, T offset);
  Var relu(Var a);
  Var gelu(Var a);
  Var dropout(Var a, T rate, Rng& rng);

  // Row-wise.
  Var softmax_rows(Var a, bool causal = false);
  Var log_softmax_rows(Var a);
  Var layer_norm(Var x, Var gain, Var bias, T eps);
  Var l2_normalize_rows(Var x);

  // Indexing.
  Var embedding_gather(Var table, std::span<const int> ids);
  Var slice_cols(Var a, std::size_t begin, std::size_t width);
  Var concat_cols(std::span<const Var> parts);
  Var select_row(Var a, std::size_t row);
  Var stack_rows(std::span<const Var> rows);
  Var diagonal(Var a);

  // Reductions.
  Var mean_pool(Var x);
  Var sum(Var a);
  Var mean(Var a);
  Var offdiag_mean(Var a);

 private:
  using BackwardFn = std::function<void(Tape&, std::uint32_t)>;

  struct Node {
    Tensor<T> owned;
    const Tensor<T>* borrowed = nullptr;
    Tensor<T> grad;
    Tensor<T>* sink = nullptr;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Tensor<T>& val(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.borrowed ? *n.borrowed : n.owned;
  }
  bool needs(std::uint32_t id) const { return nodes_[id].requires_grad; }
  Tensor<T>& grad_acc(std::uint32_t id);
  const Tensor<T>& out_grad(std::uint32_t id) const { return nodes_[id].grad; }

  Var push(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op);
  Var push_many(Tensor<T> value, bool requires_grad, BackwardFn fn, const char* op);
  void run_backward();

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  bool backward_done_ = false;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace dualspeech::num
