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

#ifndef LBNSEG_IO_PALETTE_HPP_
#define LBNSEG_IO_PALETTE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "lbnseg/error.hpp"
#include "lbnseg/io/ppm.hpp"
#include "lbnseg/network.hpp"

namespace lbnseg::io {

struct Rgb {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct PaletteEntry {
  std::string_view name;
  Rgb color;
};

using Palette = std::array<PaletteEntry, 19>;

// Cityscapes evaluation classes, in benchmark order.
inline constexpr Palette kCityscapesPalette{{
    {"road", {128, 64, 128}},
    {"sidewalk", {244, 35, 232}},
    {"building", {70, 70, 70}},
    {"wall", {102, 102, 156}},
    {"fence", {190, 153, 153}},
    {"pole", {153, 153, 153}},
    {"traffic light", {250, 170, 30}},
    {"traffic sign", {220, 220, 0}},
    {"vegetation", {107, 142, 35}},
    {"terrain", {152, 251, 152}},
    {"sky", {70, 130, 180}},
    {"person", {220, 20, 60}},
    {"rider", {255, 0, 0}},
    {"car", {0, 0, 142}},
    {"truck", {0, 0, 70}},
    {"bus", {0, 60, 100}},
    {"train", {0, 80, 100}},
    {"motorcycle", {0, 0, 230}},
    {"bicycle", {119, 11, 32}},
}};

inline RgbImage colorize(const LabelMap& labels,
                         const Palette& palette = kCityscapesPalette) {
  RgbImage img{labels.height, labels.width, {}};
  img.pixels.resize(labels.ids.size() * 3);
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    const int id = labels.ids[i];
    if (id < 0 || id >= static_cast<int>(palette.size())) {
      throw FormatError("label id " + std::to_string(id) + " outside palette of " +
                        std::to_string(palette.size()) + " classes");
    }
    const Rgb c = palette[id].color;
    img.pixels[i * 3] = c.r;
    img.pixels[i * 3 + 1] = c.g;
    img.pixels[i * 3 + 2] = c.b;
  }
  return img;
}

}  // namespace lbnseg::io

#endif  // LBNSEG_IO_PALETTE_HPP_
