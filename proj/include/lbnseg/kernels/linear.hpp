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

#ifndef LBNSEG_KERNELS_LINEAR_HPP_
#define LBNSEG_KERNELS_LINEAR_HPP_

#include <span>
#include <string>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {

// Fully connected layer: out = W x + b. W is stored as (out, in, 1, 1).
inline std::vector<float> linear(std::span<const float> x, const Tensor& weights,
                                 std::span<const float> bias) {
  const Shape s = weights.shape();
  if (s.h != 1 || s.w != 1 || static_cast<std::size_t>(s.c) != x.size()) {
    throw ShapeError("linear: weight shape " + to_string(s) + " for input of " +
                     std::to_string(x.size()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(s.n)) {
    throw ShapeError("linear: bias length " + std::to_string(bias.size()) +
                     ", expected " + std::to_string(s.n));
  }
  std::vector<float> out(s.n);
  for (int o = 0; o < s.n; ++o) {
    const float* row = weights.plane(o, 0);
    double acc = bias.empty() ? 0.0 : bias[o];
    for (int i = 0; i < s.c; ++i) acc += static_cast<double>(row[i]) * x[i];
    out[o] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_LINEAR_HPP_
