#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eogscrub/rng.hpp"
#include "eogscrub/tensor.hpp"

// Layer kernels for the U-Net: same-padding convolution (im2col + GEMM),
// ELU, 2x2 max pooling, stride-2 2x2 transposed convolution and its adjoint,
// skip concatenation, and inverted dropout. Everything is deterministic for
// a fixed RNG stream and single-threaded execution.

namespace eogscrub {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Scratch buffers reused across layer calls (one per model instance).
template <typename T>
struct Workspace {
  MatRM<T> cols;   // im2col buffer, (Cin*k*k) x (H*W)
  MatRM<T> tmp_a;  // misc GEMM staging
  MatRM<T> tmp_b;
};

namespace detail {

// Unfolds x[b] into columns: row (c*k + ky)*k + kx holds, for every output
// pixel, the padded input value at that kernel offset.
template <typename T>
void im2col(const Tensor4<T>& x, uint32_t b, uint32_t k, MatRM<T>& cols) {
  const uint32_t h = x.h, w = x.w;
  const int64_t pad = int64_t(k) / 2;
  cols.resize(Eigen::Index(x.c) * k * k, Eigen::Index(h) * w);
  for (uint32_t c = 0; c < x.c; ++c) {
    const T* src_plane = x.data.data() + (size_t(b) * x.c + c) * h * w;
    for (uint32_t ky = 0; ky < k; ++ky) {
      for (uint32_t kx = 0; kx < k; ++kx) {
        T* dst = cols.data() + size_t((c * k + ky) * k + kx) * h * w;
        const int64_t shift = int64_t(kx) - pad;
        const int64_t x0 = std::max<int64_t>(0, -shift);
        const int64_t x1 = std::min<int64_t>(w, int64_t(w) - shift);
        for (uint32_t y = 0; y < h; ++y) {
          T* row = dst + size_t(y) * w;
          const int64_t iy = int64_t(y) + int64_t(ky) - pad;
          if (iy < 0 || iy >= int64_t(h)) {
            std::fill(row, row + w, T(0));
            continue;
          }
          const T* src = src_plane + size_t(iy) * w;
          for (int64_t p = 0; p < x0; ++p) row[p] = T(0);
          for (int64_t p = x0; p < x1; ++p) row[p] = src[p + shift];
          for (int64_t p = x1; p < int64_t(w); ++p) row[p] = T(0);
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds column gradients back onto the image grid.
template <typename T>
void col2im_add(const MatRM<T>& cols, uint32_t k, Tensor4<T>& gx, uint32_t b) {
  const uint32_t h = gx.h, w = gx.w;
  const int64_t pad = int64_t(k) / 2;
  for (uint32_t c = 0; c < gx.c; ++c) {
    T* dst_plane = gx.data.data() + (size_t(b) * gx.c + c) * h * w;
    for (uint32_t ky = 0; ky < k; ++ky) {
      for (uint32_t kx = 0; kx < k; ++kx) {
        const T* src = cols.data() + size_t((c * k + ky) * k + kx) * h * w;
        const int64_t shift = int64_t(kx) - pad;
        const int64_t x0 = std::max<int64_t>(0, -shift);
        const int64_t x1 = std::min<int64_t>(w, int64_t(w) - shift);
        for (uint32_t y = 0; y < h; ++y) {
          const int64_t iy = int64_t(y) + int64_t(ky) - pad;
          if (iy < 0 || iy >= int64_t(h)) continue;
          const T* row = src + size_t(y) * w;
          T* dst = dst_plane + size_t(iy) * w;
          for (int64_t p = x0; p < x1; ++p) dst[p + shift] += row[p];
        }
      }
    }
  }
}

}  // namespace detail

// Cross-correlation with same padding; weights (Cout, Cin, k, k), k odd.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& weights,
                          const std::vector<T>& bias, Workspace<T>& ws) {
  const uint32_t k = weights.h;
  if (weights.w != k || (k != 1 && k != 3))
    throw ShapeMismatch("conv2d: kernel must be 1x1 or 3x3");
  if (weights.c != x.c)
    throw ShapeMismatch("conv2d: input channels " + std::to_string(x.c) + " vs weight " +
                        std::to_string(weights.c));
  if (bias.size() != weights.n) throw ShapeMismatch("conv2d: bias size mismatch");
  const uint32_t cout = weights.n;
  const Eigen::Index hw = Eigen::Index(x.h) * x.w;
  Tensor4<T> out(x.n, cout, x.h, x.w);
  Eigen::Map<const MatRM<T>> wmat(weights.data.data(), cout, Eigen::Index(x.c) * k * k);
  for (uint32_t b = 0; b < x.n; ++b) {
    detail::im2col(x, b, k, ws.cols);
    Eigen::Map<MatRM<T>> omat(out.data.data() + size_t(b) * cout * hw, cout, hw);
    omat.noalias() = wmat * ws.cols;
    for (uint32_t o = 0; o < cout; ++o) omat.row(o).array() += bias[o];
  }
  return out;
}

// Gradients of conv2d. grad_x may be null for the first layer.
template <typename T>
void conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& weights, const Tensor4<T>& grad_out,
                     Tensor4<T>* grad_x, Tensor4<T>& grad_w, std::vector<T>& grad_b,
                     Workspace<T>& ws) {
  const uint32_t k = weights.h;
  const uint32_t cout = weights.n;
  if (!grad_out.same_shape(Tensor4<T>(x.n, cout, x.h, x.w)))
    throw ShapeMismatch("conv2d_backward: grad shape " + grad_out.shape_str());
  const Eigen::Index hw = Eigen::Index(x.h) * x.w;
  Eigen::Map<const MatRM<T>> wmat(weights.data.data(), cout, Eigen::Index(x.c) * k * k);
  Eigen::Map<MatRM<T>> gw(grad_w.data.data(), cout, Eigen::Index(x.c) * k * k);
  if (grad_x) grad_x->fill(T(0));
  for (uint32_t b = 0; b < x.n; ++b) {
    Eigen::Map<const MatRM<T>> gmat(grad_out.data.data() + size_t(b) * cout * hw, cout, hw);
    detail::im2col(x, b, k, ws.cols);
    gw.noalias() += gmat * ws.cols.transpose();
    for (uint32_t o = 0; o < cout; ++o) grad_b[o] += gmat.row(o).sum();
    if (grad_x) {
      ws.tmp_a.resize(Eigen::Index(x.c) * k * k, hw);
      ws.tmp_a.noalias() = wmat.transpose() * gmat;
      detail::col2im_add(ws.tmp_a, k, *grad_x, b);
    }
  }
}

template <typename T>
Tensor4<T> elu_forward(const Tensor4<T>& x, T alpha) {
  Tensor4<T> y(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < x.data.size(); ++i) {
    const T v = x.data[i];
    y.data[i] = v > T(0) ? v : alpha * (std::exp(v) - T(1));
  }
  return y;
}

// Uses the saved activation output: for y <= 0, dy/dx = y + alpha.
template <typename T>
Tensor4<T> elu_backward(const Tensor4<T>& y, const Tensor4<T>& grad_out, T alpha) {
  if (!y.same_shape(grad_out)) throw ShapeMismatch("elu_backward: shape mismatch");
  Tensor4<T> gx(y.n, y.c, y.h, y.w);
  for (size_t i = 0; i < y.data.size(); ++i) {
    const T v = y.data[i];
    gx.data[i] = grad_out.data[i] * (v > T(0) ? T(1) : v + alpha);
  }
  return gx;
}

// 2x2 max pooling; the mask stores the winner's index in the row-major scan
// of each window (ties go to the first scanned).
template <typename T>
Tensor4<T> maxpool2_forward(const Tensor4<T>& x, std::vector<uint8_t>& mask) {
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw OddDims("maxpool2: spatial dims must be even, got " + x.shape_str());
  Tensor4<T> y(x.n, x.c, x.h / 2, x.w / 2);
  mask.assign(y.size(), 0);
  size_t oi = 0;
  for (uint32_t b = 0; b < x.n; ++b)
    for (uint32_t c = 0; c < x.c; ++c) {
      const T* plane = x.data.data() + (size_t(b) * x.c + c) * x.h * x.w;
      for (uint32_t y0 = 0; y0 < x.h; y0 += 2)
        for (uint32_t x0 = 0; x0 < x.w; x0 += 2) {
          const T v00 = plane[size_t(y0) * x.w + x0];
          const T v01 = plane[size_t(y0) * x.w + x0 + 1];
          const T v10 = plane[size_t(y0 + 1) * x.w + x0];
          const T v11 = plane[size_t(y0 + 1) * x.w + x0 + 1];
          T best = v00;
          uint8_t idx = 0;
          if (v01 > best) { best = v01; idx = 1; }
          if (v10 > best) { best = v10; idx = 2; }
          if (v11 > best) { best = v11; idx = 3; }
          y.data[oi] = best;
          mask[oi] = idx;
          ++oi;
        }
    }
  return y;
}

template <typename T>
Tensor4<T> maxpool2_backward(const Tensor4<T>& grad_out, const std::vector<uint8_t>& mask,
                             uint32_t in_h, uint32_t in_w) {
  if (mask.size() != grad_out.size()) throw StaleCache("maxpool2_backward: mask size mismatch");
  Tensor4<T> gx(grad_out.n, grad_out.c, in_h, in_w);
  size_t oi = 0;
  for (uint32_t b = 0; b < grad_out.n; ++b)
    for (uint32_t c = 0; c < grad_out.c; ++c) {
      T* plane = gx.data.data() + (size_t(b) * gx.c + c) * in_h * in_w;
      for (uint32_t y0 = 0; y0 < in_h; y0 += 2)
        for (uint32_t x0 = 0; x0 < in_w; x0 += 2) {
          const uint8_t idx = mask[oi];
          const uint32_t dy = idx >> 1, dx = idx & 1;
          plane[size_t(y0 + dy) * in_w + x0 + dx] = grad_out.data[oi];
          ++oi;
        }
    }
  return gx;
}

// Transposed convolution, kernel 2x2, stride 2: doubles the spatial dims.
// Weights (Cin, Cout, 2, 2); with stride == kernel there is no overlap, so
// output pixel (2i+dy, 2j+dx) sees exactly one kernel tap per input channel.
template <typename T>
Tensor4<T> convt2_forward(const Tensor4<T>& x, const Tensor4<T>& weights,
                          const std::vector<T>& bias, Workspace<T>& ws) {
  if (weights.h != 2 || weights.w != 2 || weights.n != x.c)
    throw ShapeMismatch("convt2: weights must be (Cin, Cout, 2, 2) with Cin = input channels");
  if (bias.size() != weights.c) throw ShapeMismatch("convt2: bias size mismatch");
  const uint32_t cin = x.c, cout = weights.c;
  const Eigen::Index hw = Eigen::Index(x.h) * x.w;
  Tensor4<T> out(x.n, cout, x.h * 2, x.w * 2);
  ws.tmp_b.resize(cin, cout);  // gathered weight slice for one (dy, dx)
  for (uint32_t dy = 0; dy < 2; ++dy)
    for (uint32_t dx = 0; dx < 2; ++dx) {
      for (uint32_t ci = 0; ci < cin; ++ci)
        for (uint32_t o = 0; o < cout; ++o) ws.tmp_b(ci, o) = weights.at(ci, o, dy, dx);
      for (uint32_t b = 0; b < x.n; ++b) {
        Eigen::Map<const MatRM<T>> xmat(x.data.data() + size_t(b) * cin * hw, cin, hw);
        ws.tmp_a.resize(cout, hw);
        ws.tmp_a.noalias() = ws.tmp_b.transpose() * xmat;
        for (uint32_t o = 0; o < cout; ++o) {
          const T* src = ws.tmp_a.data() + size_t(o) * hw;
          T* dst_plane = out.data.data() + (size_t(b) * cout + o) * out.h * out.w;
          for (uint32_t y = 0; y < x.h; ++y) {
            T* dst = dst_plane + size_t(2 * y + dy) * out.w + dx;
            const T* s = src + size_t(y) * x.w;
            for (uint32_t j = 0; j < x.w; ++j) dst[2 * j] = s[j] + bias[o];
          }
        }
      }
    }
  return out;
}

// Linear adjoint of convt2_forward (a stride-2 2x2 convolution, no bias):
// maps (B, Cout, 2H, 2W) back to (B, Cin, H, W) with the same weights.
template <typename T>
Tensor4<T> conv2_stride2_forward(const Tensor4<T>& z, const Tensor4<T>& weights,
                                 Workspace<T>& ws) {
  if (weights.h != 2 || weights.w != 2 || weights.c != z.c)
    throw ShapeMismatch("conv2_stride2: weights must be (Cin, Cout, 2, 2) with Cout = z channels");
  if (z.h % 2 != 0 || z.w % 2 != 0) throw OddDims("conv2_stride2: input dims must be even");
  const uint32_t cin = weights.n, cout = z.c;
  const uint32_t h = z.h / 2, w = z.w / 2;
  const Eigen::Index hw = Eigen::Index(h) * w;
  Tensor4<T> out(z.n, cin, h, w);
  ws.tmp_b.resize(cin, cout);
  MatRM<T> zsub;
  for (uint32_t dy = 0; dy < 2; ++dy)
    for (uint32_t dx = 0; dx < 2; ++dx) {
      for (uint32_t ci = 0; ci < cin; ++ci)
        for (uint32_t o = 0; o < cout; ++o) ws.tmp_b(ci, o) = weights.at(ci, o, dy, dx);
      for (uint32_t b = 0; b < z.n; ++b) {
        zsub.resize(cout, hw);
        for (uint32_t o = 0; o < cout; ++o) {
          const T* src_plane = z.data.data() + (size_t(b) * cout + o) * z.h * z.w;
          T* dst = zsub.data() + size_t(o) * hw;
          for (uint32_t y = 0; y < h; ++y) {
            const T* s = src_plane + size_t(2 * y + dy) * z.w + dx;
            for (uint32_t j = 0; j < w; ++j) dst[size_t(y) * w + j] = s[2 * j];
          }
        }
        Eigen::Map<MatRM<T>> omat(out.data.data() + size_t(b) * cin * hw, cin, hw);
        omat.noalias() += ws.tmp_b * zsub;
      }
    }
  return out;
}

template <typename T>
void convt2_backward(const Tensor4<T>& x, const Tensor4<T>& weights, const Tensor4<T>& grad_out,
                     Tensor4<T>& grad_x, Tensor4<T>& grad_w, std::vector<T>& grad_b,
                     Workspace<T>& ws) {
  const uint32_t cin = x.c, cout = weights.c;
  if (grad_out.c != cout || grad_out.h != x.h * 2 || grad_out.w != x.w * 2)
    throw ShapeMismatch("convt2_backward: grad shape " + grad_out.shape_str());
  // d/dx: the adjoint operator applied to the output gradient.
  grad_x = conv2_stride2_forward(grad_out, weights, ws);
  // d/dw and d/db.
  const Eigen::Index hw = Eigen::Index(x.h) * x.w;
  MatRM<T> gsub;
  for (uint32_t dy = 0; dy < 2; ++dy)
    for (uint32_t dx = 0; dx < 2; ++dx) {
      for (uint32_t b = 0; b < x.n; ++b) {
        gsub.resize(cout, hw);
        for (uint32_t o = 0; o < cout; ++o) {
          const T* src_plane = grad_out.data.data() + (size_t(b) * cout + o) * grad_out.h * grad_out.w;
          T* dst = gsub.data() + size_t(o) * hw;
          for (uint32_t y = 0; y < x.h; ++y) {
            const T* s = src_plane + size_t(2 * y + dy) * grad_out.w + dx;
            for (uint32_t j = 0; j < x.w; ++j) dst[size_t(y) * x.w + j] = s[2 * j];
          }
        }
        Eigen::Map<const MatRM<T>> xmat(x.data.data() + size_t(b) * cin * hw, cin, hw);
        ws.tmp_a.resize(cin, cout);
        ws.tmp_a.noalias() = xmat * gsub.transpose();
        for (uint32_t ci = 0; ci < cin; ++ci)
          for (uint32_t o = 0; o < cout; ++o) grad_w.at(ci, o, dy, dx) += ws.tmp_a(ci, o);
      }
    }
  for (uint32_t b = 0; b < grad_out.n; ++b)
    for (uint32_t o = 0; o < cout; ++o) {
      const auto plane = grad_out.plane(b, o);
      T acc = T(0);
      for (const T v : plane) acc += v;
      grad_b[o] += acc;
    }
}

// Channel-wise concatenation, skip channels first.
template <typename T>
Tensor4<T> concat_forward(const Tensor4<T>& skip, const Tensor4<T>& up) {
  if (skip.n != up.n) throw ShapeMismatch("concat: batch mismatch");
  if (skip.h != up.h || skip.w != up.w)
    throw SpatialMismatch("concat: spatial dims " + skip.shape_str() + " vs " + up.shape_str());
  Tensor4<T> out(skip.n, skip.c + up.c, skip.h, skip.w);
  const size_t plane = size_t(skip.h) * skip.w;
  for (uint32_t b = 0; b < skip.n; ++b) {
    std::copy_n(skip.data.data() + size_t(b) * skip.c * plane, size_t(skip.c) * plane,
                out.data.data() + size_t(b) * out.c * plane);
    std::copy_n(up.data.data() + size_t(b) * up.c * plane, size_t(up.c) * plane,
                out.data.data() + size_t(b) * out.c * plane + size_t(skip.c) * plane);
  }
  return out;
}

template <typename T>
void concat_backward(const Tensor4<T>& grad_out, uint32_t skip_channels, Tensor4<T>& grad_skip,
                     Tensor4<T>& grad_up) {
  const uint32_t up_channels = grad_out.c - skip_channels;
  grad_skip = Tensor4<T>(grad_out.n, skip_channels, grad_out.h, grad_out.w);
  grad_up = Tensor4<T>(grad_out.n, up_channels, grad_out.h, grad_out.w);
  const size_t plane = size_t(grad_out.h) * grad_out.w;
  for (uint32_t b = 0; b < grad_out.n; ++b) {
    std::copy_n(grad_out.data.data() + size_t(b) * grad_out.c * plane,
                size_t(skip_channels) * plane,
                grad_skip.data.data() + size_t(b) * skip_channels * plane);
    std::copy_n(grad_out.data.data() + size_t(b) * grad_out.c * plane +
                    size_t(skip_channels) * plane,
                size_t(up_channels) * plane, grad_up.data.data() + size_t(b) * up_channels * plane);
  }
}

// Inverted dropout: zero with probability `rate`, survivors scaled by
// 1/(1-rate). Identity outside training.
template <typename T>
Tensor4<T> dropout_forward(const Tensor4<T>& x, double rate, Rng& rng, bool training,
                           std::vector<uint8_t>& mask) {
  if (!(rate >= 0.0 && rate < 1.0)) throw BadRate("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) {
    mask.clear();
    return x;
  }
  const T scale = T(1.0 / (1.0 - rate));
  Tensor4<T> y(x.n, x.c, x.h, x.w);
  mask.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const bool keep = rng.uniform() >= rate;
    mask[i] = keep ? 1 : 0;
    y.data[i] = keep ? x.data[i] * scale : T(0);
  }
  return y;
}

template <typename T>
Tensor4<T> dropout_backward(const Tensor4<T>& grad_out, const std::vector<uint8_t>& mask,
                            double rate) {
  if (mask.empty()) return grad_out;  // dropout was a no-op
  if (mask.size() != grad_out.size()) throw StaleCache("dropout_backward: mask size mismatch");
  const T scale = T(1.0 / (1.0 - rate));
  Tensor4<T> gx(grad_out.n, grad_out.c, grad_out.h, grad_out.w);
  for (size_t i = 0; i < grad_out.size(); ++i)
    gx.data[i] = mask[i] ? grad_out.data[i] * scale : T(0);
  return gx;
}

}  // namespace eogscrub
