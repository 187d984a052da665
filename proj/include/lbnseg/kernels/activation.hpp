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

#ifndef LBNSEG_KERNELS_ACTIVATION_HPP_
#define LBNSEG_KERNELS_ACTIVATION_HPP_

#include <algorithm>
#include <cmath>

#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {

inline constexpr float kLeakySlope = 0.01f;

enum class ActivationKind { kRelu, kRelu6, kLeakyRelu, kSigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::kRelu;
  float slope = kLeakySlope;  // leaky_relu only

  friend bool operator==(const Activation&, const Activation&) = default;
};

inline float activate(float v, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::kRelu: return v > 0.0f ? v : 0.0f;
    case ActivationKind::kRelu6: return std::min(std::max(v, 0.0f), 6.0f);
    case ActivationKind::kLeakyRelu: return v > 0.0f ? v : act.slope * v;
    case ActivationKind::kSigmoid: return 1.0f / (1.0f + std::exp(-v));
  }
  return v;
}

inline Tensor activation(const Tensor& x, const Activation& act) {
  Tensor out(x.shape());
  auto src = x.data();
  auto dst = out.data();
  switch (act.kind) {
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
      }
      break;
    case ActivationKind::kRelu6:
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = std::min(std::max(src[i], 0.0f), 6.0f);
      }
      break;
    default:
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = activate(src[i], act);
      }
  }
  return out;
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_ACTIVATION_HPP_
