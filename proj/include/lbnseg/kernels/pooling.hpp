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

#ifndef LBNSEG_KERNELS_POOLING_HPP_
#define LBNSEG_KERNELS_POOLING_HPP_

#include <algorithm>
#include <limits>
#include <string>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {

enum class PoolKind { kAvg, kMax };

struct PoolSpec {
  PoolKind kind = PoolKind::kAvg;
  int kernel = 1;
  int stride = 1;
  int pad = 0;

  // Stride-1 pooling that preserves resolution (odd kernel).
  static PoolSpec same(PoolKind kind, int kernel) {
    return {kind, kernel, 1, (kernel - 1) / 2};
  }

  int output_size(int in) const {
    const int span = in + 2 * pad - kernel;
    return span < 0 ? 0 : span / stride + 1;
  }

  Shape output_shape(const Shape& in) const {
    if (kernel < 1 || stride < 1 || pad < 0) {
      throw ShapeError("pool spec has invalid field");
    }
    const Shape out{in.n, in.c, output_size(in.h), output_size(in.w)};
    if (out.h < 1 || out.w < 1) {
      throw ShapeError("pool output size non-positive for input " +
                       to_string(in));
    }
    return out;
  }

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

// Window reduction. Padded positions never contribute: max ignores them and
// avg divides by the number of in-bounds elements.
inline Tensor pool2d(const Tensor& x, const PoolSpec& spec) {
  Tensor out(spec.output_shape(x.shape()));
  const int h = x.height();
  const int w = x.width();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      float* dst = out.plane(n, c);
      for (int i = 0; i < out.height(); ++i) {
        const int y0 = std::max(0, i * spec.stride - spec.pad);
        const int y1 = std::min(h, i * spec.stride - spec.pad + spec.kernel);
        for (int j = 0; j < out.width(); ++j) {
          const int x0 = std::max(0, j * spec.stride - spec.pad);
          const int x1 = std::min(w, j * spec.stride - spec.pad + spec.kernel);
          float result = 0.0f;
          if (spec.kind == PoolKind::kMax) {
            float best = -std::numeric_limits<float>::infinity();
            for (int y = y0; y < y1; ++y) {
              for (int xx = x0; xx < x1; ++xx) {
                best = std::max(best, src[y * w + xx]);
              }
            }
            result = best;
          } else {
            double sum = 0.0;
            for (int y = y0; y < y1; ++y) {
              for (int xx = x0; xx < x1; ++xx) sum += src[y * w + xx];
            }
            const int count = (y1 - y0) * (x1 - x0);
            result = static_cast<float>(sum / count);
          }
          dst[i * out.width() + j] = result;
        }
      }
    }
  }
  return out;
}

inline Tensor global_avg_pool(const Tensor& x) {
  Tensor out({x.batch(), x.channels(), 1, 1});
  const std::size_t plane = x.shape().plane();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      double sum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) sum += src[i];
      out.at(n, c, 0, 0) = static_cast<float>(sum / static_cast<double>(plane));
    }
  }
  return out;
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_POOLING_HPP_
