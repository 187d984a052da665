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

#ifndef LBNSEG_KERNELS_BATCHNORM_HPP_
#define LBNSEG_KERNELS_BATCHNORM_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::kernels {

inline constexpr float kBatchNormEpsilon = 1e-5f;

// Inference-time batch normalization statistics, one entry per channel.
struct BatchNormParams {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> mean;
  std::vector<float> var;
  float epsilon = kBatchNormEpsilon;

  static BatchNormParams identity(int channels) {
    const auto c = static_cast<std::size_t>(channels);
    return {std::vector<float>(c, 1.0f), std::vector<float>(c, 0.0f),
            std::vector<float>(c, 0.0f), std::vector<float>(c, 1.0f),
            kBatchNormEpsilon};
  }

  std::size_t channels() const { return gamma.size(); }

  void validate(std::size_t expected_channels) const {
    if (gamma.size() != expected_channels || beta.size() != expected_channels ||
        mean.size() != expected_channels || var.size() != expected_channels) {
      throw ShapeError("batchnorm parameters sized for " +
                       std::to_string(gamma.size()) + " channels, expected " +
                       std::to_string(expected_channels));
    }
    if (!(epsilon >= 0.0f)) throw ShapeError("batchnorm epsilon negative");
    for (std::size_t c = 0; c < var.size(); ++c) {
      if (!(var[c] >= 0.0f) || !(var[c] + epsilon > 0.0f)) {
        throw ShapeError("batchnorm variance invalid at channel " +
                         std::to_string(c));
      }
    }
  }

  // Per-channel (scale, shift) so that bn(x) = scale * x + shift.
  std::pair<std::vector<double>, std::vector<double>> affine() const {
    std::vector<double> scale(channels());
    std::vector<double> shift(channels());
    for (std::size_t c = 0; c < channels(); ++c) {
      scale[c] = static_cast<double>(gamma[c]) /
                 std::sqrt(static_cast<double>(var[c]) + epsilon);
      shift[c] = static_cast<double>(beta[c]) - scale[c] * mean[c];
    }
    return {std::move(scale), std::move(shift)};
  }
};

inline Tensor batchnorm_inference(const Tensor& x, const BatchNormParams& p) {
  p.validate(static_cast<std::size_t>(x.channels()));
  const auto scale = p.affine().first;
  Tensor out(x.shape());
  const std::size_t plane = x.shape().plane();
  // gamma * (x - mean) / sqrt(var + eps) + beta; x == mean yields beta exactly
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      float* dst = out.plane(n, c);
      const double a = scale[c];
      const double m = p.mean[c];
      const double b = p.beta[c];
      for (std::size_t i = 0; i < plane; ++i) {
        dst[i] = static_cast<float>(a * (src[i] - m) + b);
      }
    }
  }
  return out;
}

struct FoldedConv {
  Tensor weights;
  std::vector<float> bias;
};

// Absorbs a batch norm that directly follows a convolution into the
// convolution's weights and bias. Empty conv_bias means no bias.
inline FoldedConv fold_batchnorm(const Tensor& conv_weights,
                                 std::span<const float> conv_bias,
                                 const BatchNormParams& p) {
  const int out_channels = conv_weights.shape().n;
  p.validate(static_cast<std::size_t>(out_channels));
  if (!conv_bias.empty() &&
      conv_bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ShapeError("fold_batchnorm: bias length " +
                     std::to_string(conv_bias.size()) + " for " +
                     std::to_string(out_channels) + " output channels");
  }
  const auto [scale, shift] = p.affine();
  FoldedConv folded{conv_weights, std::vector<float>(out_channels)};
  const std::size_t per_out = conv_weights.size() / out_channels;
  auto w = folded.weights.data();
  for (int o = 0; o < out_channels; ++o) {
    for (std::size_t i = 0; i < per_out; ++i) {
      w[o * per_out + i] = static_cast<float>(w[o * per_out + i] * scale[o]);
    }
    const double b = conv_bias.empty() ? 0.0 : conv_bias[o];
    folded.bias[o] = static_cast<float>(scale[o] * b + shift[o]);
  }
  return folded;
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_BATCHNORM_HPP_
