#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eogscrub/errors.hpp"

namespace eogscrub {

// Dense NCHW tensor, row-major innermost. T is float for training and double
// for the verification suites.
template <typename T>
struct Tensor4 {
  uint32_t n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(uint32_t n_, uint32_t c_, uint32_t h_, uint32_t w_)
      : n(n_), c(c_), h(h_), w(w_), data(size_t(n_) * c_ * h_ * w_, T(0)) {}

  size_t size() const { return data.size(); }

  T& at(uint32_t b, uint32_t ch, uint32_t y, uint32_t x) {
    return data[((size_t(b) * c + ch) * h + y) * w + x];
  }
  T at(uint32_t b, uint32_t ch, uint32_t y, uint32_t x) const {
    return data[((size_t(b) * c + ch) * h + y) * w + x];
  }

  std::span<T> plane(uint32_t b, uint32_t ch) {
    return std::span<T>(data).subspan((size_t(b) * c + ch) * h * w, size_t(h) * w);
  }
  std::span<const T> plane(uint32_t b, uint32_t ch) const {
    return std::span<const T>(data).subspan((size_t(b) * c + ch) * h * w, size_t(h) * w);
  }

  bool same_shape(const Tensor4& other) const {
    return n == other.n && c == other.c && h == other.h && w == other.w;
  }

  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }

  void fill(T value) { std::fill(data.begin(), data.end(), value); }
};

}  // namespace eogscrub
