#pragma once

#include "dualspeech/numerics/tape.hpp"

namespace dualspeech::objectives {

/// S = X * Y^T; S(i, j) = <x_i, y_j>. Row i column i is the positive pair.
template <typename T>
num::Var similarity_matrix(num::Tape<T>& tape, num::Var x, num::Var y);

/// -(1/N) sum_i log softmax(S_i)_i, via a max-shifted log-sum-exp. N = 1 gives 0.
template <typename T>
num::Var contrastive_one_direction(num::Tape<T>& tape, num::Var similarity);

/// Speech-to-text plus text-to-speech: c(S) + c(S^T).
template <typename T>
num::Var bidirectional_contrastive(num::Tape<T>& tape, num::Var x, num::Var y);

/// Global orthogonal regularizer on row-normalized embeddings:
///   M1 = mean_{i != j} <z_i, z_j>,  M2 = mean_{i != j} <z_i, z_j>^2,
///   loss = M1^2 + max(0, M2 - 1/p).
/// Defined as 0 (with a warning) when N < 2.
template <typename T>
num::Var spreadout(num::Tape<T>& tape, num::Var z);

struct LossVars {
  num::Var total;
  num::Var contrastive;
  num::Var spreadout;  ///< spreadout(X) + spreadout(Y), before weighting
};

/// bidirectional_contrastive(X, Y) + lambda * (spreadout(X) + spreadout(Y)).
template <typename T>
LossVars total_loss(num::Tape<T>& tape, num::Var x, num::Var y, T lambda);

// Value-level conveniences (no gradients).

template <typename T>
num::Tensor<T> similarity_matrix(const num::Tensor<T>& x, const num::Tensor<T>& y);
template <typename T>
T contrastive_loss_one_direction(const num::Tensor<T>& similarity);
template <typename T>
T bidirectional_contrastive(const num::Tensor<T>& x, const num::Tensor<T>& y);
template <typename T>
T spreadout_loss(const num::Tensor<T>& z);
template <typename T>
T total_loss(const num::Tensor<T>& x, const num::Tensor<T>& y, T lambda);

}  // namespace dualspeech::objectives
