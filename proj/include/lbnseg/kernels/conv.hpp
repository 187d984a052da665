/* Copyright 2026 The lbnseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LBNSEG_KERNELS_CONV_HPP_
#define LBNSEG_KERNELS_CONV_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/kernels/gemm.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {

enum class ConvPath { kNaive, kOptimized };

// Square k x k convolution with atrous rate, stride, symmetric zero padding
// and channel groups.
struct ConvSpec {
  int kernel = 1;
  int rate = 1;
  int stride = 1;
  int pad = 0;
  int groups = 1;
  int in_channels = 1;
  int out_channels = 1;

  // Padding that keeps stride-1 output at input resolution (k odd).
  static ConvSpec same(int in_channels, int out_channels, int kernel,
                       int rate = 1, int stride = 1, int groups = 1) {
    return ConvSpec{kernel, rate,   stride,      rate * (kernel - 1) / 2,
                    groups, in_channels, out_channels};
  }

  int extent() const { return kernel + (kernel - 1) * (rate - 1); }

  int output_size(int in) const {
    const int span = in + 2 * pad - extent();
    return span < 0 ? 0 : span / stride + 1;
  }

  void validate() const {
    if (kernel < 1 || rate < 1 || stride < 1 || pad < 0 || groups < 1 ||
        in_channels < 1 || out_channels < 1) {
      throw ShapeError("conv spec has non-positive field");
    }
    if (in_channels % groups != 0 || out_channels % groups != 0) {
      throw ShapeError("conv channels " + std::to_string(in_channels) + "->" +
                       std::to_string(out_channels) +
                       " not divisible by groups " + std::to_string(groups));
    }
  }

  Shape weight_shape() const {
    return {out_channels, in_channels / groups, kernel, kernel};
  }

  Shape output_shape(const Shape& in) const {
    validate();
    if (in.c != in_channels) {
      throw ShapeError("conv expects " + std::to_string(in_channels) +
                       " input channels, got " + std::to_string(in.c));
    }
    const int oh = output_size(in.h);
    const int ow = output_size(in.w);
    if (oh < 1 || ow < 1) {
      throw ShapeError("conv output size non-positive for input " +
                       to_string(in));
    }
    return {in.n, out_channels, oh, ow};
  }

  bool depthwise() const {
    return groups == in_channels && groups == out_channels && groups > 1;
  }
  bool pointwise() const { return kernel == 1 && stride == 1 && pad == 0; }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

namespace detail {

inline void check_conv_args(const Tensor& x, const Tensor& weights,
                            std::span<const float> bias,
                            const ConvSpec& spec) {
  spec.output_shape(x.shape());
  if (weights.shape() != spec.weight_shape()) {
    throw ShapeError("conv weight shape " + to_string(weights.shape()) +
                     ", expected " + to_string(spec.weight_shape()));
  }
  if (!bias.empty() &&
      bias.size() != static_cast<std::size_t>(spec.out_channels)) {
    throw ShapeError("conv bias length " + std::to_string(bias.size()) +
                     ", expected " + std::to_string(spec.out_channels));
  }
}

// Output index range [lo, hi) whose sample x = j*stride + offset lies in
// [0, in).
inline std::pair<int, int> valid_range(int out, int in, int stride,
                                       int offset) {
  int lo = 0;
  if (offset < 0) lo = std::min(out, (-offset + stride - 1) / stride);
  int hi = out;
  if (in - 1 - offset < 0) {
    hi = 0;
  } else {
    hi = std::min(out, (in - 1 - offset) / stride + 1);
  }
  return {lo, std::max(lo, hi)};
}

// Expands channels [c0, c0 + cin) of batch item n into a
// (cin*k*k) x (rows*ow) column matrix for output rows [r0, r0 + rows).
inline void im2col(const Tensor& x, int n, int c0, int cin,
                   const ConvSpec& spec, int ow, int r0, int rows,
                   float* cols) {
  const int k = spec.kernel;
  const int h = x.height();
  const int w = x.width();
  const std::size_t ncols = static_cast<std::size_t>(rows) * ow;
  for (int c = 0; c < cin; ++c) {
    const float* src = x.plane(n, c0 + c);
    for (int m = 0; m < k; ++m) {
      for (int q = 0; q < k; ++q) {
        float* dst = cols + (static_cast<std::size_t>(c) * k * k + m * k + q) * ncols;
        const int xoff = q * spec.rate - spec.pad;
        const auto [jlo, jhi] = valid_range(ow, w, spec.stride, xoff);
        for (int i = 0; i < rows; ++i) {
          float* row = dst + static_cast<std::size_t>(i) * ow;
          const int y = (r0 + i) * spec.stride + m * spec.rate - spec.pad;
          if (y < 0 || y >= h) {
            std::fill(row, row + ow, 0.0f);
            continue;
          }
          const float* line = src + static_cast<std::size_t>(y) * w;
          std::fill(row, row + jlo, 0.0f);
          if (spec.stride == 1) {
            std::copy(line + jlo + xoff, line + jhi + xoff, row + jlo);
          } else {
            for (int j = jlo; j < jhi; ++j) row[j] = line[j * spec.stride + xoff];
          }
          std::fill(row + jhi, row + ow, 0.0f);
        }
      }
    }
  }
}

inline void conv_depthwise(const Tensor& x, const Tensor& weights,
                           std::span<const float> bias, const ConvSpec& spec,
                           Tensor& out) {
  const int k = spec.kernel;
  const int h = x.height();
  const int w = x.width();
  const int oh = out.height();
  const int ow = out.width();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      float* dst = out.plane(n, c);
      std::fill(dst, dst + out.shape().plane(), bias.empty() ? 0.0f : bias[c]);
      const float* wc = weights.plane(c, 0);
      for (int m = 0; m < k; ++m) {
        for (int q = 0; q < k; ++q) {
          const float wt = wc[m * k + q];
          const int xoff = q * spec.rate - spec.pad;
          const auto [jlo, jhi] = valid_range(ow, w, spec.stride, xoff);
          for (int i = 0; i < oh; ++i) {
            const int y = i * spec.stride + m * spec.rate - spec.pad;
            if (y < 0 || y >= h) continue;
            const float* line = src + static_cast<std::size_t>(y) * w;
            float* orow = dst + static_cast<std::size_t>(i) * ow;
            if (spec.stride == 1) {
              for (int j = jlo; j < jhi; ++j) orow[j] += wt * line[j + xoff];
            } else {
              for (int j = jlo; j < jhi; ++j) {
                orow[j] += wt * line[j * spec.stride + xoff];
              }
            }
          }
        }
      }
    }
  }
}

// Column tile budget for im2col buffers, in floats.
inline constexpr std::size_t kIm2colBudget = std::size_t{1} << 22;

inline void conv_gemm(const Tensor& x, const Tensor& weights,
                      std::span<const float> bias, const ConvSpec& spec,
                      Tensor& out) {
  const int oh = out.height();
  const int ow = out.width();
  const int cin_g = spec.in_channels / spec.groups;
  const int cout_g = spec.out_channels / spec.groups;
  const int kdim = cin_g * spec.kernel * spec.kernel;
  const int npix = oh * ow;
  std::vector<float> cols;
  for (int n = 0; n < x.batch(); ++n) {
    for (int g = 0; g < spec.groups; ++g) {
      const float* a = weights.plane(g * cout_g, 0);
      float* c = out.plane(n, g * cout_g);
      if (spec.pointwise()) {
        sgemm(cout_g, npix, kdim, a, kdim, x.plane(n, g * cin_g), npix, c,
              npix);
        continue;
      }
      const int rows_per_tile = static_cast<int>(std::clamp<std::size_t>(
          kIm2colBudget / (static_cast<std::size_t>(kdim) * ow), 1, oh));
      cols.resize(static_cast<std::size_t>(kdim) * rows_per_tile * ow);
      for (int r0 = 0; r0 < oh; r0 += rows_per_tile) {
        const int rows = std::min(rows_per_tile, oh - r0);
        const int tile = rows * ow;
        im2col(x, n, g * cin_g, cin_g, spec, ow, r0, rows, cols.data());
        sgemm(cout_g, tile, kdim, a, kdim, cols.data(), tile,
              c + static_cast<std::size_t>(r0) * ow, npix);
      }
    }
    if (!bias.empty()) {
      for (int o = 0; o < spec.out_channels; ++o) {
        float* p = out.plane(n, o);
        for (int i = 0; i < npix; ++i) p[i] += bias[o];
      }
    }
  }
}

}  // namespace detail

// Definitional atrous convolution:
//   out[n,o,i,j] = bias[o] + sum_c sum_m sum_q
//                  x[n, c, i*s + d*m - pad, j*s + d*q - pad] * W[o, c, m, q]
// with zero padding. Sequential, 64-bit accumulation; this is the oracle the
// optimized path is checked against.
inline Tensor conv2d_naive(const Tensor& x, const Tensor& weights,
                           std::span<const float> bias, const ConvSpec& spec) {
  detail::check_conv_args(x, weights, bias, spec);
  Tensor out(spec.output_shape(x.shape()));
  const int cin_g = spec.in_channels / spec.groups;
  const int cout_g = spec.out_channels / spec.groups;
  const int k = spec.kernel;
  for (int n = 0; n < out.batch(); ++n) {
    for (int o = 0; o < out.channels(); ++o) {
      const int g = o / cout_g;
      for (int i = 0; i < out.height(); ++i) {
        for (int j = 0; j < out.width(); ++j) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (int c = 0; c < cin_g; ++c) {
            for (int m = 0; m < k; ++m) {
              const int y = i * spec.stride + spec.rate * m - spec.pad;
              if (y < 0 || y >= x.height()) continue;
              for (int q = 0; q < k; ++q) {
                const int xx = j * spec.stride + spec.rate * q - spec.pad;
                if (xx < 0 || xx >= x.width()) continue;
                acc += static_cast<double>(x.at(n, g * cin_g + c, y, xx)) *
                       weights.at(o, c, m, q);
              }
            }
          }
          out.at(n, o, i, j) = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

// im2col + blocked GEMM, with direct kernels for depthwise layers.
inline Tensor conv2d_optimized(const Tensor& x, const Tensor& weights,
                               std::span<const float> bias,
                               const ConvSpec& spec) {
  detail::check_conv_args(x, weights, bias, spec);
  Tensor out(spec.output_shape(x.shape()));
  if (spec.depthwise()) {
    detail::conv_depthwise(x, weights, bias, spec, out);
  } else {
    detail::conv_gemm(x, weights, bias, spec, out);
  }
  return out;
}

inline Tensor conv2d(const Tensor& x, const Tensor& weights,
                     std::span<const float> bias, const ConvSpec& spec,
                     ConvPath path = ConvPath::kOptimized) {
  return path == ConvPath::kNaive ? conv2d_naive(x, weights, bias, spec)
                                  : conv2d_optimized(x, weights, bias, spec);
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_CONV_HPP_
