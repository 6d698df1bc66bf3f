#include "dualspeech/objectives/objectives.hpp"

#include <spdlog/spdlog.h>

#include "dualspeech/common/error.hpp"

namespace dualspeech::objectives {

template <typename T>
num::Var similarity_matrix(num::Tape<T>& tape, num::Var x, num::Var y) {
  const auto& X = tape.value(x);
  const auto& Y = tape.value(y);
  if (X.rows() != Y.rows()) {
    fail(ErrorKind::kBatch, "similarity_matrix: batch sizes differ (" + std::to_string(X.rows()) + " vs " +
                                std::to_string(Y.rows()) + ")");
  }
  if (X.rows() == 0) fail(ErrorKind::kBatch, "similarity_matrix: empty batch");
  return tape.matmul_nt(x, y);
}

template <typename T>
num::Var contrastive_one_direction(num::Tape<T>& tape, num::Var similarity) {
  return tape.scale(tape.mean(tape.diagonal(tape.log_softmax_rows(similarity))), T{-1});
}

template <typename T>
num::Var bidirectional_contrastive(num::Tape<T>& tape, num::Var x, num::Var y) {
  const num::Var s = similarity_matrix(tape, x, y);
  return tape.add(contrastive_one_direction(tape, s), contrastive_one_direction(tape, tape.transpose(s)));
}

template <typename T>
num::Var spreadout(num::Tape<T>& tape, num::Var z) {
  const auto& Z = tape.value(z);
  if (Z.rows() < 2) {
    spdlog::warn("spreadout: batch of {} row(s) has no pairs; contributing 0", Z.rows());
    return tape.constant(num::Tensor<T>::scalar(T{0}));
  }
  const T bound = T{1} / static_cast<T>(Z.cols());
  const num::Var unit = tape.l2_normalize_rows(z);
  const num::Var gram = tape.matmul_nt(unit, unit);
  const num::Var m1 = tape.offdiag_mean(gram);
  const num::Var m2 = tape.offdiag_mean(tape.mul(gram, gram));
  return tape.add(tape.mul(m1, m1), tape.relu(tape.add_scalar(m2, -bound)));
}

template <typename T>
LossVars total_loss(num::Tape<T>& tape, num::Var x, num::Var y, T lambda) {
  LossVars out;
  out.contrastive = bidirectional_contrastive(tape, x, y);
  out.spreadout = tape.add(spreadout(tape, x), spreadout(tape, y));
  out.total = tape.add(out.contrastive, tape.scale(out.spreadout, lambda));
  return out;
}

template <typename T>
num::Tensor<T> similarity_matrix(const num::Tensor<T>& x, const num::Tensor<T>& y) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  return tape.value(similarity_matrix(tape, tape.constant(x), tape.constant(y)));
}

template <typename T>
T contrastive_loss_one_direction(const num::Tensor<T>& similarity) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  return tape.value(contrastive_one_direction(tape, tape.constant(similarity))).item();
}

template <typename T>
T bidirectional_contrastive(const num::Tensor<T>& x, const num::Tensor<T>& y) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  return tape.value(bidirectional_contrastive(tape, tape.constant(x), tape.constant(y))).item();
}

template <typename T>
T spreadout_loss(const num::Tensor<T>& z) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  return tape.value(spreadout(tape, tape.constant(z))).item();
}

template <typename T>
T total_loss(const num::Tensor<T>& x, const num::Tensor<T>& y, T lambda) {
  num::Tape<T> tape(num::GradMode::kDisabled);
  return tape.value(total_loss(tape, tape.constant(x), tape.constant(y), lambda).total).item();
}

#define DUALSPEECH_INSTANTIATE(T)                                                             \
  template num::Var similarity_matrix<T>(num::Tape<T>&, num::Var, num::Var);                  \
  template num::Var contrastive_one_direction<T>(num::Tape<T>&, num::Var);                    \
  template num::Var bidirectional_contrastive<T>(num::Tape<T>&, num::Var, num::Var);          \
  template num::Var spreadout<T>(num::Tape<T>&, num::Var);                                    \
  template LossVars total_loss<T>(num::Tape<T>&, num::Var, num::Var, T);                      \
  template num::Tensor<T> similarity_matrix<T>(const num::Tensor<T>&, const num::Tensor<T>&); \
  template T contrastive_loss_one_direction<T>(const num::Tensor<T>&);                        \
  template T bidirectional_contrastive<T>(const num::Tensor<T>&, const num::Tensor<T>&);      \
  template T spreadout_loss<T>(const num::Tensor<T>&);                                        \
  template T total_loss<T>(const num::Tensor<T>&, const num::Tensor<T>&, T);

DUALSPEECH_INSTANTIATE(float)
DUALSPEECH_INSTANTIATE(double)
#undef DUALSPEECH_INSTANTIATE

}  // namespace dualspeech::objectives
