#pragma once

#include <cstddef>
#include <concepts>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace dualspeech::num {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_product(const Shape& shape);

/// Cache-line aligned storage. Vectorized kernels choose their peeling from
/// the base address, so a fixed alignment keeps results reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using Storage = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major array. Rank 0 is a scalar, rank 1 is treated as a single
/// row by matrix operations, rank 2 is rows x cols.
template <typename T>
struct Tensor {
  Shape shape;
  Storage<T> data;

  Tensor() = default;
  Tensor(Shape s, Storage<T> values);
  template <typename Alloc>
    requires(!std::same_as<Alloc, AlignedAllocator<T>>)
  Tensor(Shape s, const std::vector<T, Alloc>& values) : Tensor(std::move(s), Storage<T>(values.begin(), values.end())) {}

  static Tensor zeros(Shape s) { return Tensor(s, Storage<T>(shape_product(s), T{0})); }
  static Tensor filled(Shape s, T value) { return Tensor(s, Storage<T>(shape_product(s), value)); }
  static Tensor scalar(T value) { return Tensor({}, {value}); }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  T& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  T at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  std::span<T> row(std::size_t r) { return {data.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }

  T item() const;
  bool all_finite() const;
};

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t) {
  Tensor<To> out;
  out.shape = t.shape;
  out.data.assign(t.data.begin(), t.data.end());
  return out;
}

extern template struct Tensor<float>;
extern template struct Tensor<double>;

}  // namespace dualspeech::num
