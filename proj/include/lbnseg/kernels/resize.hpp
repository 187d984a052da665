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

#ifndef LBNSEG_KERNELS_RESIZE_HPP_
#define LBNSEG_KERNELS_RESIZE_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {
namespace detail {

struct LerpTap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

// Half-pixel centers: src = (dst + 0.5) * in / out - 0.5, clamped.
inline std::vector<LerpTap> lerp_taps(int in, int out) {
  std::vector<LerpTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, in - 1), src - lo};
  }
  return taps;
}

}  // namespace detail

inline Tensor bilinear_resize(const Tensor& x, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("bilinear_resize: non-positive target size");
  }
  if (out_h == x.height() && out_w == x.width()) return x;
  const auto ty = detail::lerp_taps(x.height(), out_h);
  const auto tx = detail::lerp_taps(x.width(), out_w);
  Tensor out({x.batch(), x.channels(), out_h, out_w});
  const int w = x.width();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      float* dst = out.plane(n, c);
      for (int i = 0; i < out_h; ++i) {
        const float* r0 = src + ty[i].lo * w;
        const float* r1 = src + ty[i].hi * w;
        const double fy = ty[i].frac;
        for (int j = 0; j < out_w; ++j) {
          const double fx = tx[j].frac;
          const double top = r0[tx[j].lo] + fx * (r0[tx[j].hi] - r0[tx[j].lo]);
          const double bot = r1[tx[j].lo] + fx * (r1[tx[j].hi] - r1[tx[j].lo]);
          dst[i * out_w + j] = static_cast<float>(top + fy * (bot - top));
        }
      }
    }
  }
  return out;
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_RESIZE_HPP_
