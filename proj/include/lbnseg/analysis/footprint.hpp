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

#ifndef LBNSEG_ANALYSIS_FOOTPRINT_HPP_
#define LBNSEG_ANALYSIS_FOOTPRINT_HPP_

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>

#include "lbnseg/error.hpp"
#include "lbnseg/executor.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/weights.hpp"

namespace lbnseg::analysis {

inline constexpr std::size_t kDefaultProbeCap = std::size_t{1} << 16;

// Input pixels (row, col) that influence one output position.
struct Footprint {
  std::set<std::pair<int, int>> pixels;

  int min_row() const { return pixels.empty() ? 0 : pixels.begin()->first; }
  int max_row() const { return pixels.empty() ? -1 : pixels.rbegin()->first; }
  int min_col() const {
    int v = 1 << 30;
    for (const auto& p : pixels) v = std::min(v, p.second);
    return v;
  }
  int max_col() const {
    int v = -(1 << 30);
    for (const auto& p : pixels) v = std::max(v, p.second);
    return v;
  }
  int height() const { return pixels.empty() ? 0 : max_row() - min_row() + 1; }
  int width() const { return pixels.empty() ? 0 : max_col() - min_col() + 1; }
};

// Brute-force dependency set of output (out_row, out_col) of `target`: with
// all-ones weights, zero biases and identity batch norm, each input pixel of
// a zero image is set to 1 in turn and the target position is compared with
// the all-zero baseline. The graph must have a single input. Throws when the
// input has more than `cap` pixels.
inline Footprint footprint_probe(const Graph& graph, NodeId target,
                                 const Shape& input, int out_row, int out_col,
                                 std::size_t cap = kDefaultProbeCap) {
  if (graph.input_ids().size() != 1) {
    throw Error(ErrorKind::kUsage, "footprint_probe needs a single-input graph");
  }
  if (input.plane() > cap) {
    throw Error(ErrorKind::kUsage,
                "footprint_probe: prefix too large (" +
                    std::to_string(input.plane()) + " pixels, cap " +
                    std::to_string(cap) + ")");
  }
  const auto shapes = graph.infer_shapes(input);
  const Shape out = shapes[target];
  if (out_row < 0 || out_row >= out.h || out_col < 0 || out_col >= out.w) {
    throw Error(ErrorKind::kUsage, "footprint_probe: output position outside " +
                                       to_string(out));
  }
  const WeightStore ones = constant_init(graph, 1.0f);
  ExecOptions opts;
  opts.targets = {target};

  auto sample = [&](const Tensor& x) {
    const Activations acts = execute(graph, ones, x, opts);
    const Tensor& y = acts.at(target);
    std::vector<float> v(y.channels());
    for (int c = 0; c < y.channels(); ++c) v[c] = y.at(0, c, out_row, out_col);
    return v;
  };

  Tensor image(input);
  const auto baseline = sample(image);
  Footprint fp;
  for (int r = 0; r < input.h; ++r) {
    for (int c = 0; c < input.w; ++c) {
      for (int ch = 0; ch < input.c; ++ch) image.at(0, ch, r, c) = 1.0f;
      if (sample(image) != baseline) fp.pixels.emplace(r, c);
      for (int ch = 0; ch < input.c; ++ch) image.at(0, ch, r, c) = 0.0f;
    }
  }
  return fp;
}

}  // namespace lbnseg::analysis

#endif  // LBNSEG_ANALYSIS_FOOTPRINT_HPP_
