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

// Dense NCHW float tensor and the structural operations built on it.

#ifndef LBNSEG_TENSOR_HPP_
#define LBNSEG_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lbnseg/error.hpp"

namespace lbnseg {

struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool valid() const { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << "(" << s.n << "," << s.c << "," << s.h << "," << s.w << ")";
  return os.str();
}

class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(shape) {
    check_shape(shape);
    data_.assign(shape.count(), 0.0f);
  }

  Tensor(Shape shape, std::vector<float> data)
      : shape_(shape), data_(std::move(data)) {
    check_shape(shape);
    if (data_.size() != shape.count()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape));
    }
  }

  Tensor(Shape shape, float fill) : shape_(shape) {
    check_shape(shape);
    data_.assign(shape.count(), fill);
  }

  const Shape& shape() const { return shape_; }
  int batch() const { return shape_.n; }
  int channels() const { return shape_.c; }
  int height() const { return shape_.h; }
  int width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) *
               shape_.w +
           w;
  }
  float& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  float at(int n, int c, int h, int w) const {
    return data_[offset(n, c, h, w)];
  }

  // Contiguous h*w plane of channel c in batch item n.
  float* plane(int n, int c) { return data_.data() + offset(n, c, 0, 0); }
  const float* plane(int n, int c) const {
    return data_.data() + offset(n, c, 0, 0);
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static void check_shape(const Shape& s) {
    if (!s.valid()) {
      throw ShapeError("invalid tensor shape " + to_string(s));
    }
  }

  Shape shape_{};
  std::vector<float> data_;
};

// Concatenates along the channel axis in list order.
inline Tensor concat_channels(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: empty input list");
  const Shape first = inputs[0]->shape();
  int channels = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Shape& s = inputs[i]->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: input " + std::to_string(i) +
                       " has shape " + to_string(s) + ", expected (" +
                       std::to_string(first.n) + ",*," +
                       std::to_string(first.h) + "," +
                       std::to_string(first.w) + ")");
    }
    channels += s.c;
  }
  Tensor out({first.n, channels, first.h, first.w});
  const std::size_t plane = first.plane();
  for (int n = 0; n < first.n; ++n) {
    float* dst = out.plane(n, 0);
    for (const Tensor* t : inputs) {
      const std::size_t block = static_cast<std::size_t>(t->channels()) * plane;
      const float* src = t->plane(n, 0);
      std::copy(src, src + block, dst);
      dst += block;
    }
  }
  return out;
}

inline Tensor concat_channels(const std::vector<Tensor>& inputs) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(inputs.size());
  for (const Tensor& t : inputs) ptrs.push_back(&t);
  return concat_channels(std::span<const Tensor* const>(ptrs));
}

// Copies channels [begin, begin + count).
inline Tensor slice_channels(const Tensor& x, int begin, int count) {
  const Shape s = x.shape();
  if (begin < 0 || count < 1 || begin + count > s.c) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + "," +
                     std::to_string(begin + count) + ") outside " +
                     std::to_string(s.c) + " channels");
  }
  Tensor out({s.n, count, s.h, s.w});
  const std::size_t block = static_cast<std::size_t>(count) * s.plane();
  for (int n = 0; n < s.n; ++n) {
    const float* src = x.plane(n, begin);
    std::copy(src, src + block, out.plane(n, 0));
  }
  return out;
}

inline Tensor elementwise_add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("elementwise_add: shape " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
  Tensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  return out;
}

inline Tensor scale_channels(const Tensor& x, std::span<const float> weights) {
  if (weights.size() != static_cast<std::size_t>(x.channels())) {
    throw ShapeError("scale_channels: " + std::to_string(weights.size()) +
                     " weights for " + std::to_string(x.channels()) +
                     " channels");
  }
  Tensor out(x.shape());
  const std::size_t plane = x.shape().plane();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const float* src = x.plane(n, c);
      float* dst = out.plane(n, c);
      const float wc = weights[c];
      for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * wc;
    }
  }
  return out;
}

// Fill distributions for seeded_fill.
struct Uniform {
  float bound = 1.0f;  // samples in [-bound, bound)
};
struct Constant {
  float value = 0.0f;
};
using FillDistribution = std::variant<Uniform, Constant>;

// Deterministic fill. The generator is std::mt19937 seeded through
// std::seed_seq{low32(seed), high32(seed)}; both are fully specified by the
// standard, so the bit pattern is platform independent. Each draw keeps the
// top 24 bits: u = (r >> 8) * 2^-24, value = bound * (2u - 1).
inline Tensor seeded_fill(Shape shape, std::uint64_t seed,
                          FillDistribution dist) {
  Tensor out(shape);
  if (const auto* c = std::get_if<Constant>(&dist)) {
    std::fill(out.data().begin(), out.data().end(), c->value);
    return out;
  }
  const float bound = std::get<Uniform>(dist).bound;
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937 gen(seq);
  constexpr float kScale = 1.0f / 16777216.0f;
  for (float& v : out.data()) {
    const float u = static_cast<float>(gen() >> 8) * kScale;
    v = bound * (2.0f * u - 1.0f);
  }
  return out;
}

}  // namespace lbnseg

#endif  // LBNSEG_TENSOR_HPP_
