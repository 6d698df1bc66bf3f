#include "dualspeech/numerics/tape.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dualspeech/common/error.hpp"

namespace dualspeech::num {

std::string shape_string(const Shape& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << ',';
    ss << shape[i];
  }
  ss << ']';
  return ss.str();
}

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

template <typename T>
Tensor<T>::Tensor(Shape s, Storage<T> values) : shape(std::move(s)), data(std::move(values)) {
  if (shape_product(shape) != data.size()) {
    fail(ErrorKind::kDimension, "tensor shape " + shape_string(shape) + " does not match " +
                                    std::to_string(data.size()) + " values");
  }
}

template <typename T>
Tensor<T> Tensor<T>::matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values) {
  return Tensor({rows, cols}, std::vector<T>(values));
}

template <typename T>
std::size_t Tensor<T>::rows() const {
  return shape.size() == 2 ? shape[0] : 1;
}

template <typename T>
std::size_t Tensor<T>::cols() const {
  if (shape.empty()) return 1;
  return shape.back();
}

template <typename T>
T Tensor<T>::item() const {
  if (data.size() != 1) fail(ErrorKind::kContract, "item() on tensor of shape " + shape_string(shape));
  return data[0];
}

template <typename T>
bool Tensor<T>::all_finite() const {
  // x - x is 0 for finite x and NaN otherwise, so the sum is exactly 0 iff
  // every entry is finite.
  const Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> a(data.data(), static_cast<Eigen::Index>(data.size()));
  return (a - a).sum() == T{0};
}

template struct Tensor<float>;
template struct Tensor<double>;

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<const RowMat<T>> cmap(const Tensor<T>& t) {
  return {t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

template <typename T>
Eigen::Map<RowMat<T>> map(Tensor<T>& t) {
  return {t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

void require_rank_le2(const Shape& s, const char* op) {
  if (s.size() > 2) fail(ErrorKind::kDimension, std::string(op) + ": expected rank <= 2, got " + shape_string(s));
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    fail(ErrorKind::kDimension, std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

template <typename T>
Tensor<T>& Tape<T>::grad_acc(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.sink) return *n.sink;
  if (!n.has_grad) {
    n.grad = Tensor<T>::zeros(val(id).shape);
    n.has_grad = true;
  }
  return n.grad;
}

template <typename T>
Var Tape<T>::push(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op) {
  bool rg = false;
  if (grad_enabled_) {
    for (Var v : inputs) rg = rg || nodes_[v.id].requires_grad;
  }
  return push_many(std::move(value), rg, std::move(fn), op);
}

template <typename T>
Var Tape<T>::push_many(Tensor<T> value, bool requires_grad, BackwardFn fn, const char* op) {
  if (!value.all_finite()) {
    fail(ErrorKind::kNumeric, std::string("non-finite value produced by ") + op);
  }
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  return push_many(std::move(value), false, nullptr, "constant");
}

template <typename T>
Var Tape<T>::leaf(Tensor<T> value) {
  return push_many(std::move(value), true, nullptr, "leaf");
}

template <typename T>
Var Tape<T>::param(const Tensor<T>& value, Tensor<T>* sink) {
  if (sink && sink->shape != value.shape) {
    fail(ErrorKind::kDimension, "param: grad sink shape " + shape_string(sink->shape) +
                                    " does not match " + shape_string(value.shape));
  }
  Node n;
  n.borrowed = &value;
  n.requires_grad = grad_enabled_;
  n.sink = grad_enabled_ ? sink : nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  return val(v.id);
}

template <typename T>
const Tensor<T>& Tape<T>::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.sink) return *n.sink;
  if (!n.has_grad) {
    n.grad = Tensor<T>::zeros(val(v.id).shape);
    n.has_grad = true;
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  const auto& v = val(loss.id);
  if (v.data.size() != 1 || v.rank() > 1) {
    fail(ErrorKind::kContract, "backward: loss must be a scalar, got shape " + shape_string(v.shape));
  }
  backward(loss, Tensor<T>::filled(v.shape, T{1}));
}

template <typename T>
void Tape<T>::backward(Var output, const Tensor<T>& upstream) {
  if (backward_done_) fail(ErrorKind::kContract, "backward: tape already differentiated");
  require_same_shape(val(output.id).shape, upstream.shape, "backward");
  backward_done_ = true;
  if (!nodes_[output.id].requires_grad) return;
  add_into(grad_acc(output.id), upstream);
  for (std::uint32_t id = output.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backward && n.has_grad) n.backward(*this, id);
  }
}

// ---------------------------------------------------------------------------
// Linear algebra

template <typename T>
Var Tape<T>::matmul(Var a, Var b) {
  const auto& A = val(a.id);
  const auto& B = val(b.id);
  require_rank_le2(A.shape, "matmul");
  require_rank_le2(B.shape, "matmul");
  if (A.cols() != B.rows()) {
    fail(ErrorKind::kDimension,
         "matmul: inner dimensions differ, " + shape_string(A.shape) + " x " + shape_string(B.shape));
  }
  auto out = Tensor<T>::zeros({A.rows(), B.cols()});
  map(out).noalias() = cmap(A) * cmap(B);
  return push(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) map(t.grad_acc(a.id)).noalias() += cmap(G) * cmap(t.val(b.id)).transpose();
    if (t.needs(b.id)) map(t.grad_acc(b.id)).noalias() += cmap(t.val(a.id)).transpose() * cmap(G);
  }, "matmul");
}

template <typename T>
Var Tape<T>::matmul_nt(Var a, Var b) {
  const auto& A = val(a.id);
  const auto& B = val(b.id);
  require_rank_le2(A.shape, "matmul_nt");
  require_rank_le2(B.shape, "matmul_nt");
  if (A.cols() != B.cols()) {
    fail(ErrorKind::kDimension,
         "matmul_nt: inner dimensions differ, " + shape_string(A.shape) + " x " + shape_string(B.shape) + "^T");
  }
  auto out = Tensor<T>::zeros({A.rows(), B.rows()});
  map(out).noalias() = cmap(A) * cmap(B).transpose();
  return push(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) map(t.grad_acc(a.id)).noalias() += cmap(G) * cmap(t.val(b.id));
    if (t.needs(b.id)) map(t.grad_acc(b.id)).noalias() += cmap(G).transpose() * cmap(t.val(a.id));
  }, "matmul_nt");
}

template <typename T>
Var Tape<T>::transpose(Var a) {
  const auto& A = val(a.id);
  require_rank_le2(A.shape, "transpose");
  auto out = Tensor<T>::zeros({A.cols(), A.rows()});
  map(out) = cmap(A).transpose();
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    map(t.grad_acc(a.id)) += cmap(t.out_grad(self)).transpose();
  }, "transpose");
}

// ---------------------------------------------------------------------------
// Elementwise

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const auto& A = val(a.id);
  const auto& B = val(b.id);
  require_same_shape(A.shape, B.shape, "add");
  Tensor<T> out = A;
  add_into(out, B);
  return push(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) add_into(t.grad_acc(a.id), G);
    if (t.needs(b.id)) add_into(t.grad_acc(b.id), G);
  }, "add");
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  const auto& A = val(a.id);
  const auto& B = val(b.id);
  require_same_shape(A.shape, B.shape, "sub");
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= B.data[i];
  return push(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) add_into(t.grad_acc(a.id), G);
    if (t.needs(b.id)) {
      auto& gb = t.grad_acc(b.id);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] -= G.data[i];
    }
  }, "sub");
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  const auto& A = val(a.id);
  const auto& B = val(b.id);
  require_same_shape(A.shape, B.shape, "mul");
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
  return push(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) {
      auto& ga = t.grad_acc(a.id);
      const auto& vb = t.val(b.id);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += G.data[i] * vb.data[i];
    }
    if (t.needs(b.id)) {
      auto& gb = t.grad_acc(b.id);
      const auto& va = t.val(a.id);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += G.data[i] * va.data[i];
    }
  }, "mul");
}

template <typename T>
Var Tape<T>::add_row(Var a, Var row) {
  const auto& A = val(a.id);
  const auto& R = val(row.id);
  require_rank_le2(A.shape, "add_row");
  if (R.size() != A.cols()) {
    fail(ErrorKind::kDimension, "add_row: row " + shape_string(R.shape) + " does not broadcast over " +
                                    shape_string(A.shape));
  }
  Tensor<T> out = A;
  const std::size_t cols = A.cols();
  for (std::size_t r = 0; r < A.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] += R.data[c];
  }
  return push(std::move(out), {a, row}, [a, row](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    if (t.needs(a.id)) add_into(t.grad_acc(a.id), G);
    if (t.needs(row.id)) {
      auto& gr = t.grad_acc(row.id);
      map(gr) += cmap(G).colwise().sum();
    }
  }, "add_row");
}

template <typename T>
Var Tape<T>::scale(Var a, T factor) {
  Tensor<T> out = val(a.id);
  for (auto& x : out.data) x *= factor;
  return push(std::move(out), {a}, [a, factor](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ga = t.grad_acc(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += factor * G.data[i];
  }, "scale");
}

template <typename T>
Var Tape<T>::add_scalar(Var a, T offset) {
  Tensor<T> out = val(a.id);
  for (auto& x : out.data) x += offset;
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    add_into(t.grad_acc(a.id), t.out_grad(self));
  }, "add_scalar");
}

template <typename T>
Var Tape<T>::relu(Var a) {
  Tensor<T> out = val(a.id);
  for (auto& x : out.data) x = x > T{0} ? x : T{0};
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& X = t.val(a.id);
    auto& ga = t.grad_acc(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (X.data[i] > T{0}) ga.data[i] += G.data[i];
    }
  }, "relu");
}

template <typename T>
Var Tape<T>::gelu(Var a) {
  // tanh approximation; tanh(u) is kept for the backward pass.
  constexpr T kC = T(0.7978845608028654);  // sqrt(2/pi)
  constexpr T kA = T(0.044715);
  using Flat = Eigen::Array<T, Eigen::Dynamic, 1>;
  const auto& X = val(a.id);
  const auto n = static_cast<Eigen::Index>(X.size());
  const Eigen::Map<const Flat> x(X.data.data(), n);
  std::vector<T> th(X.size());
  Eigen::Map<Flat> th_map(th.data(), n);
  th_map = (kC * (x + kA * x * x * x)).tanh();
  Tensor<T> out = Tensor<T>::zeros(X.shape);
  Eigen::Map<Flat>(out.data.data(), n) = T(0.5) * x * (T(1) + th_map);
  return push(std::move(out), {a}, [a, th = std::move(th)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& Xv = t.val(a.id);
    auto& ga = t.grad_acc(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const T xi = Xv.data[i];
      const T du = kC * (T(1) + T(3) * kA * xi * xi);
      const T d = T(0.5) * (T(1) + th[i]) + T(0.5) * xi * (T(1) - th[i] * th[i]) * du;
      ga.data[i] += G.data[i] * d;
    }
  }, "gelu");
}

template <typename T>
Var Tape<T>::dropout(Var a, T rate, Rng& rng) {
  if (rate < T{0} || rate >= T{1}) fail(ErrorKind::kContract, "dropout: rate must be in [0,1)");
  if (rate == T{0}) return a;
  const T keep_scale = T{1} / (T{1} - rate);
  const auto& X = val(a.id);
  // Each 64-bit draw yields four 16-bit uniforms; an element is kept when its
  // lane is >= round(rate * 2^16).
  const auto threshold = static_cast<std::uint64_t>(std::llround(static_cast<double>(rate) * 65536.0));
  std::vector<T> mask(X.size());
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (i % 4 == 0) bits = rng.next();
    mask[i] = ((bits >> (16 * (i % 4))) & 0xffffU) >= threshold ? keep_scale : T{0};
  }
  Tensor<T> out = X;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask[i];
  return push(std::move(out), {a}, [a, mask = std::move(mask)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ga = t.grad_acc(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += G.data[i] * mask[i];
  }, "dropout");
}

// ---------------------------------------------------------------------------
// Row-wise

template <typename T>
Var Tape<T>::softmax_rows(Var a, bool causal) {
  const auto& X = val(a.id);
  require_rank_le2(X.shape, "softmax_rows");
  if (!X.all_finite()) fail(ErrorKind::kNumeric, "softmax_rows: non-finite input");
  const std::size_t rows = X.rows();
  const std::size_t cols = X.cols();
  if (causal && rows != cols) {
    fail(ErrorKind::kDimension, "softmax_rows: causal mask needs a square input, got " + shape_string(X.shape));
  }
  Tensor<T> out = Tensor<T>::zeros(X.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t width = causal ? r + 1 : cols;
    const T* x = X.data.data() + r * cols;
    T* y = out.data.data() + r * cols;
    T mx = x[0];
    for (std::size_t c = 1; c < width; ++c) mx = std::max(mx, x[c]);
    T total = 0;
    for (std::size_t c = 0; c < width; ++c) {
      y[c] = std::exp(x[c] - mx);
      total += y[c];
    }
    for (std::size_t c = 0; c < width; ++c) y[c] /= total;
  }
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& Y = t.val(self);
    auto& ga = t.grad_acc(a.id);
    const std::size_t cols = Y.cols();
    for (std::size_t r = 0; r < Y.rows(); ++r) {
      const T* y = Y.data.data() + r * cols;
      const T* g = G.data.data() + r * cols;
      T dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += y[c] * g[c];
      T* dx = ga.data.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dx[c] += y[c] * (g[c] - dot);
    }
  }, "softmax_rows");
}

template <typename T>
Var Tape<T>::log_softmax_rows(Var a) {
  const auto& X = val(a.id);
  require_rank_le2(X.shape, "log_softmax_rows");
  const std::size_t rows = X.rows();
  const std::size_t cols = X.cols();
  Tensor<T> out = Tensor<T>::zeros(X.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = X.data.data() + r * cols;
    T mx = x[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(x[c] - mx);
    const T lse = mx + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] = x[c] - lse;
  }
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& Y = t.val(self);
    auto& ga = t.grad_acc(a.id);
    const std::size_t cols = Y.cols();
    for (std::size_t r = 0; r < Y.rows(); ++r) {
      T gsum = 0;
      for (std::size_t c = 0; c < cols; ++c) gsum += G.data[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        ga.data[i] += G.data[i] - std::exp(Y.data[i]) * gsum;
      }
    }
  }, "log_softmax_rows");
}

template <typename T>
Var Tape<T>::layer_norm(Var x, Var gain, Var bias, T eps) {
  const auto& X = val(x.id);
  const auto& Gn = val(gain.id);
  const auto& B = val(bias.id);
  require_rank_le2(X.shape, "layer_norm");
  const std::size_t rows = X.rows();
  const std::size_t cols = X.cols();
  if (Gn.size() != cols || B.size() != cols) {
    fail(ErrorKind::kDimension, "layer_norm: gain/bias " + shape_string(Gn.shape) + "/" + shape_string(B.shape) +
                                    " do not match normalized axis of " + shape_string(X.shape));
  }
  Tensor<T> out = Tensor<T>::zeros(X.shape);
  std::vector<T> xhat(X.size());
  std::vector<T> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = X.data.data() + r * cols;
    T mean = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<T>(cols);
    T var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<T>(cols);
    rstd[r] = T{1} / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      xhat[i] = (xr[c] - mean) * rstd[r];
      out.data[i] = xhat[i] * Gn.data[c] + B.data[c];
    }
  }
  return push(std::move(out), {x, gain, bias},
              [x, gain, bias, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& Gn = t.val(gain.id);
    const std::size_t cols = Gn.size();
    const std::size_t rows = G.size() / cols;
    if (t.needs(gain.id) || t.needs(bias.id)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          if (t.needs(gain.id)) t.grad_acc(gain.id).data[c] += G.data[i] * xhat[i];
          if (t.needs(bias.id)) t.grad_acc(bias.id).data[c] += G.data[i];
        }
      }
    }
    if (t.needs(x.id)) {
      auto& gx = t.grad_acc(x.id);
      const T n = static_cast<T>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        T sum_d = 0;
        T sum_dx = 0;
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          const T d = G.data[i] * Gn.data[c];
          sum_d += d;
          sum_dx += d * xhat[i];
        }
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          const T d = G.data[i] * Gn.data[c];
          gx.data[i] += rstd[r] * (d - sum_d / n - xhat[i] * sum_dx / n);
        }
      }
    }
  }, "layer_norm");
}

template <typename T>
Var Tape<T>::l2_normalize_rows(Var x) {
  const auto& X = val(x.id);
  require_rank_le2(X.shape, "l2_normalize_rows");
  const std::size_t rows = X.rows();
  const std::size_t cols = X.cols();
  Tensor<T> out = X;
  std::vector<T> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T ss = 0;
    for (std::size_t c = 0; c < cols; ++c) ss += X.data[r * cols + c] * X.data[r * cols + c];
    norms[r] = std::max(std::sqrt(ss), T(1e-12));
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] /= norms[r];
  }
  return push(std::move(out), {x}, [x, norms = std::move(norms)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const auto& Y = t.val(self);
    auto& gx = t.grad_acc(x.id);
    const std::size_t cols = Y.cols();
    for (std::size_t r = 0; r < Y.rows(); ++r) {
      T dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += Y.data[r * cols + c] * G.data[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        gx.data[i] += (G.data[i] - Y.data[i] * dot) / norms[r];
      }
    }
  }, "l2_normalize_rows");
}

// ---------------------------------------------------------------------------
// Indexing

template <typename T>
Var Tape<T>::embedding_gather(Var table, std::span<const int> ids) {
  const auto& E = val(table.id);
  if (E.rank() != 2) fail(ErrorKind::kDimension, "embedding_gather: table must be rank 2, got " + shape_string(E.shape));
  const std::size_t vocab = E.shape[0];
  const std::size_t width = E.shape[1];
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      fail(ErrorKind::kVocabulary,
           "embedding_gather: id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(vocab));
    }
  }
  auto out = Tensor<T>::zeros({ids.size(), width});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(E.data.data() + static_cast<std::size_t>(ids[i]) * width, width, out.data.data() + i * width);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return push(std::move(out), {table}, [table, saved = std::move(saved)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ge = t.grad_acc(table.id);
    const std::size_t width = ge.shape[1];
    for (std::size_t i = 0; i < saved.size(); ++i) {
      T* dst = ge.data.data() + static_cast<std::size_t>(saved[i]) * width;
      const T* src = G.data.data() + i * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
  }, "embedding_gather");
}

template <typename T>
Var Tape<T>::slice_cols(Var a, std::size_t begin, std::size_t width) {
  const auto& A = val(a.id);
  require_rank_le2(A.shape, "slice_cols");
  const std::size_t cols = A.cols();
  if (begin + width > cols) {
    fail(ErrorKind::kDimension, "slice_cols: [" + std::to_string(begin) + "," + std::to_string(begin + width) +
                                    ") exceeds " + shape_string(A.shape));
  }
  const std::size_t rows = A.rows();
  auto out = Tensor<T>::zeros({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(A.data.data() + r * cols + begin, width, out.data.data() + r * width);
  }
  return push(std::move(out), {a}, [a, begin, width](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ga = t.grad_acc(a.id);
    const std::size_t cols = ga.cols();
    for (std::size_t r = 0; r < G.rows(); ++r) {
      for (std::size_t c = 0; c < width; ++c) ga.data[r * cols + begin + c] += G.data[r * width + c];
    }
  }, "slice_cols");
}

template <typename T>
Var Tape<T>::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::kContract, "concat_cols: no inputs");
  const std::size_t rows = val(parts[0].id).rows();
  std::size_t total = 0;
  bool rg = false;
  for (Var p : parts) {
    const auto& P = val(p.id);
    require_rank_le2(P.shape, "concat_cols");
    if (P.rows() != rows) fail(ErrorKind::kDimension, "concat_cols: row counts differ");
    total += P.cols();
    rg = rg || needs(p.id);
  }
  auto out = Tensor<T>::zeros({rows, total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto& P = val(p.id);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(P.data.data() + r * P.cols(), P.cols(), out.data.data() + r * total + offset);
    }
    offset += P.cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return push_many(std::move(out), rg, [saved = std::move(saved)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const std::size_t total = G.cols();
    std::size_t offset = 0;
    for (Var p : saved) {
      const std::size_t w = t.val(p.id).cols();
      if (t.needs(p.id)) {
        auto& gp = t.grad_acc(p.id);
        for (std::size_t r = 0; r < G.rows(); ++r) {
          for (std::size_t c = 0; c < w; ++c) gp.data[r * w + c] += G.data[r * total + offset + c];
        }
      }
      offset += w;
    }
  }, "concat_cols");
}

template <typename T>
Var Tape<T>::select_row(Var a, std::size_t row) {
  const auto& A = val(a.id);
  require_rank_le2(A.shape, "select_row");
  if (row >= A.rows()) fail(ErrorKind::kDimension, "select_row: row " + std::to_string(row) + " of " + shape_string(A.shape));
  const std::size_t cols = A.cols();
  Tensor<T> out({cols}, std::vector<T>(A.data.begin() + static_cast<std::ptrdiff_t>(row * cols),
                                       A.data.begin() + static_cast<std::ptrdiff_t>((row + 1) * cols)));
  return push(std::move(out), {a}, [a, row](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ga = t.grad_acc(a.id);
    const std::size_t cols = G.size();
    for (std::size_t c = 0; c < cols; ++c) ga.data[row * cols + c] += G.data[c];
  }, "select_row");
}

template <typename T>
Var Tape<T>::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) fail(ErrorKind::kContract, "stack_rows: no inputs");
  const std::size_t cols = val(rows[0].id).size();
  bool rg = false;
  auto out = Tensor<T>::zeros({rows.size(), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& R = val(rows[r].id);
    if (R.size() != cols) fail(ErrorKind::kDimension, "stack_rows: row widths differ");
    std::copy(R.data.begin(), R.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
    rg = rg || needs(rows[r].id);
  }
  std::vector<Var> saved(rows.begin(), rows.end());
  return push_many(std::move(out), rg, [saved = std::move(saved)](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    const std::size_t cols = G.cols();
    for (std::size_t r = 0; r < saved.size(); ++r) {
      if (!t.needs(saved[r].id)) continue;
      auto& gr = t.grad_acc(saved[r].id);
      for (std::size_t c = 0; c < cols; ++c) gr.data[c] += G.data[r * cols + c];
    }
  }, "stack_rows");
}

template <typename T>
Var Tape<T>::diagonal(Var a) {
  const auto& A = val(a.id);
  if (A.rank() != 2 || A.rows() != A.cols()) fail(ErrorKind::kDimension, "diagonal: expected square, got " + shape_string(A.shape));
  const std::size_t n = A.rows();
  auto out = Tensor<T>::zeros({n});
  for (std::size_t i = 0; i < n; ++i) out.data[i] = A.data[i * n + i];
  return push(std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& ga = t.grad_acc(a.id);
    const std::size_t n = G.size();
    for (std::size_t i = 0; i < n; ++i) ga.data[i * n + i] += G.data[i];
  }, "diagonal");
}

// ---------------------------------------------------------------------------
// Reductions

template <typename T>
Var Tape<T>::mean_pool(Var x) {
  const auto& X = val(x.id);
  require_rank_le2(X.shape, "mean_pool");
  const std::size_t rows = X.rank() == 2 ? X.shape[0] : 1;
  const std::size_t cols = X.cols();
  if (rows == 0 || X.size() == 0) fail(ErrorKind::kEmptySequence, "mean_pool: empty sequence");
  auto out = Tensor<T>::zeros({cols});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.data[c] += X.data[r * cols + c];
  }
  const T inv = T{1} / static_cast<T>(rows);
  for (auto& v : out.data) v *= inv;
  return push(std::move(out), {x}, [x, inv](Tape& t, std::uint32_t self) {
    const auto& G = t.out_grad(self);
    auto& gx = t.grad_acc(x.id);
    const std::size_t cols = G.size();
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += G.data[i % cols] * inv;
  }, "mean_pool");
}

template <typename T>
Var Tape<T>::sum(Var a) {
  const auto& A = val(a.id);
  T total = 0;
  for (T v : A.data) total += v;
  return push(Tensor<T>::scalar(total), {a}, [a](Tape& t, std::uint32_t self) {
    const T g = t.out_grad(self).data[0];
    for (auto& v : t.grad_acc(a.id).data) v += g;
  }, "sum");
}

template <typename T>
Var Tape<T>::mean(Var a) {
  const auto& A = val(a.id);
  if (A.size() == 0) fail(ErrorKind::kEmptySequence, "mean: empty tensor");
  T total = 0;
  for (T v : A.data) total += v;
  const T inv = T{1} / static_cast<T>(A.size());
  return push(Tensor<T>::scalar(total * inv), {a}, [a, inv](Tape& t, std::uint32_t self) {
    const T g = t.out_grad(self).data[0] * inv;
    for (auto& v : t.grad_acc(a.id).data) v += g;
  }, "mean");
}

template <typename T>
Var Tape<T>::offdiag_mean(Var a) {
  const auto& A = val(a.id);
  if (A.rank() != 2 || A.rows() != A.cols()) {
    fail(ErrorKind::kDimension, "offdiag_mean: expected square, got " + shape_string(A.shape));
  }
  const std::size_t n = A.rows();
  if (n < 2) fail(ErrorKind::kContract, "offdiag_mean: needs at least 2 rows");
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) total += A.data[i * n + j];
    }
  }
  const T inv = T{1} / static_cast<T>(n * (n - 1));
  return push(Tensor<T>::scalar(total * inv), {a}, [a, inv](Tape& t, std::uint32_t self) {
    const T g = t.out_grad(self).data[0] * inv;
    auto& ga = t.grad_acc(a.id);
    const std::size_t n = ga.rows();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) ga.data[i * n + j] += g;
      }
    }
  }, "offdiag_mean");
}

template class Tape<float>;
template class Tape<double>;

}  // namespace dualspeech::num
