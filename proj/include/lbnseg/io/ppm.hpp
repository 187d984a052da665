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

// Binary PPM (P6) input/output and label-map images.

#ifndef LBNSEG_IO_PPM_HPP_
#define LBNSEG_IO_PPM_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/io/weight_file.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg::io {

inline constexpr long kMaxImageSide = 1 << 15;
inline constexpr long kMaxImagePixels = 1L << 28;

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Per-channel input normalization: value = (byte / maxval - mean) / std.
struct Normalization {
  std::array<float, 3> mean{0.5f, 0.5f, 0.5f};
  std::array<float, 3> std{0.5f, 0.5f, 0.5f};

  static Normalization none() { return {{0.0f, 0.0f, 0.0f}, {1.0f, 1.0f, 1.0f}}; }
};

namespace detail {

class PnmParser {
 public:
  explicit PnmParser(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) throw FormatError("image truncated before magic");
    pos_ = 2;
    return std::string(bytes_.begin(), bytes_.begin() + 2);
  }

  long number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError(std::string("image header: expected ") + what);
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > kMaxImageSide) {
        throw FormatError(std::string("image dimension overflow in ") + what);
      }
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("image header not terminated");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
  detail::PnmParser p(bytes);
  const std::string magic = p.magic();
  if (magic != "P6") {
    throw FormatError("unsupported image format '" + magic + "' (expected P6)");
  }
  const long width = p.number("width");
  const long height = p.number("height");
  const long maxval = p.number("maxval");
  if (width < 1 || height < 1 || width * height > kMaxImagePixels) {
    throw FormatError("image dimension overflow: " + std::to_string(width) +
                      "x" + std::to_string(height));
  }
  if (maxval < 1 || maxval > 255) {
    throw FormatError("unsupported maxval " + std::to_string(maxval));
  }
  const std::size_t start = p.raster_start();
  const auto need = static_cast<std::size_t>(width * height * 3);
  if (bytes.size() < start + need) throw FormatError("image raster truncated");
  RgbImage img{static_cast<int>(height), static_cast<int>(width), {}};
  img.pixels.assign(bytes.begin() + start, bytes.begin() + start + need);
  if (maxval != 255) {
    for (auto& v : img.pixels) {
      v = static_cast<std::uint8_t>(std::lround(v * 255.0 / maxval));
    }
  }
  return img;
}

inline std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

// 8-bit grayscale (P5), used for raw label maps.
inline std::vector<std::uint8_t> encode_pgm(int height, int width,
                                            const std::vector<std::uint8_t>& values) {
  const std::string header = "P5\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), values.begin(), values.end());
  return out;
}

inline Tensor image_to_tensor(const RgbImage& img, const Normalization& norm = {}) {
  Tensor t({1, 3, img.height, img.width});
  for (int c = 0; c < 3; ++c) {
    float* dst = t.plane(0, c);
    for (std::size_t i = 0; i < static_cast<std::size_t>(img.height) * img.width; ++i) {
      const float v = img.pixels[i * 3 + c] / 255.0f;
      dst[i] = (v - norm.mean[c]) / norm.std[c];
    }
  }
  return t;
}

inline RgbImage tensor_to_image(const Tensor& t, const Normalization& norm = {}) {
  if (t.channels() != 3) {
    throw ShapeError("tensor_to_image expects 3 channels, got " +
                     std::to_string(t.channels()));
  }
  RgbImage img{t.height(), t.width(), {}};
  img.pixels.resize(static_cast<std::size_t>(t.height()) * t.width() * 3);
  for (int c = 0; c < 3; ++c) {
    const float* src = t.plane(0, c);
    for (std::size_t i = 0; i < static_cast<std::size_t>(t.height()) * t.width(); ++i) {
      const float v = std::clamp(src[i] * norm.std[c] + norm.mean[c], 0.0f, 1.0f);
      img.pixels[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return img;
}

inline Tensor read_image(const std::string& path, const Normalization& norm = {}) {
  return image_to_tensor(decode_ppm(read_file(path)), norm);
}

inline void write_image(const RgbImage& img, const std::string& path) {
  write_file(path, encode_ppm(img));
}

inline void write_image(const Tensor& t, const std::string& path,
                        const Normalization& norm = {}) {
  write_image(tensor_to_image(t, norm), path);
}

}  // namespace lbnseg::io

#endif  // LBNSEG_IO_PPM_HPP_
