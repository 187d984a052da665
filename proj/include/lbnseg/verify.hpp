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

// Self-checks behind `lbnseg verify`: optimized kernels against the naive
// definitional path, structural identities of the blocks, and the analyzers
// against brute-force probes.

#ifndef LBNSEG_VERIFY_HPP_
#define LBNSEG_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lbnseg/analysis/footprint.hpp"
#include "lbnseg/analysis/gridding.hpp"
#include "lbnseg/analysis/receptive_field.hpp"
#include "lbnseg/blocks.hpp"
#include "lbnseg/executor.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/network.hpp"

namespace lbnseg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// max |a - b| / max |b|; 0 when both are all-zero.
inline double max_relative_error(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    scale = std::max(scale, std::abs(static_cast<double>(b.data()[i])));
  }
  return scale == 0.0 ? diff : diff / scale;
}

struct RandomConvCase {
  Shape input;
  kernels::ConvSpec spec;
};

// Random conv configuration with rate from {1,2,4,8,16}, groups from {1, C}
// and stride from {1,2}; spatial size adapts to the rate.
inline RandomConvCase random_conv_case(std::mt19937& rng) {
  auto pick = [&](std::initializer_list<int> xs) {
    std::vector<int> v(xs);
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  const int rate = pick({1, 2, 4, 8, 16});
  const int stride = pick({1, 2});
  const int k = pick({1, 3, 3, 5});
  const int cin = pick({1, 3, 4, 8, 16});
  const bool depthwise = cin > 1 && pick({0, 1}) == 1;
  const int cout = depthwise ? cin : pick({1, 4, 8, 12});
  const int extent = k + (k - 1) * (rate - 1);
  const int size = std::max(extent / 2 + 1, pick({5, 8, 11, 16})) + pick({0, 3});
  const bool same = pick({0, 1}) == 1;
  kernels::ConvSpec spec{k,   rate, stride, same ? rate * (k - 1) / 2 : pick({0, 1}),
                         depthwise ? cin : 1, cin, cout};
  Shape in{1, cin, size, size + pick({0, 5})};
  // ensure a positive output size
  while (spec.output_size(in.h) < 1 || spec.output_size(in.w) < 1) {
    in.h += extent;
    in.w += extent;
  }
  return {in, spec};
}

inline CheckResult check_conv_equivalence(int cases, std::uint64_t seed,
                                          double tolerance = 1e-5) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  double worst = 0.0;
  for (int i = 0; i < cases; ++i) {
    const auto c = random_conv_case(rng);
    const Tensor x = seeded_fill(c.input, seed + 3 * i, Uniform{1.0f});
    const Tensor w = seeded_fill(c.spec.weight_shape(), seed + 3 * i + 1, Uniform{1.0f});
    const Tensor b = seeded_fill({1, c.spec.out_channels, 1, 1}, seed + 3 * i + 2,
                                 Uniform{1.0f});
    const Tensor ref = kernels::conv2d_naive(x, w, b.data(), c.spec);
    const Tensor opt = kernels::conv2d_optimized(x, w, b.data(), c.spec);
    worst = std::max(worst, max_relative_error(opt, ref));
  }
  std::ostringstream os;
  os << cases << " cases, max rel error " << worst;
  return {"conv optimized == naive", worst <= tolerance, os.str()};
}

inline CheckResult check_linearity(std::uint64_t seed) {
  const kernels::ConvSpec spec = kernels::ConvSpec::same(4, 6, 3, 4);
  const Shape s{1, 4, 17, 19};
  const Tensor x = seeded_fill(s, seed, Uniform{1.0f});
  const Tensor y = seeded_fill(s, seed + 1, Uniform{1.0f});
  const Tensor w = seeded_fill(spec.weight_shape(), seed + 2, Uniform{1.0f});
  const float alpha = 0.75f;
  const float beta = -1.5f;
  Tensor mix(s);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix.data()[i] = alpha * x.data()[i] + beta * y.data()[i];
  }
  const Tensor lhs = kernels::conv2d(mix, w, {}, spec);
  const Tensor cx = kernels::conv2d(x, w, {}, spec);
  const Tensor cy = kernels::conv2d(y, w, {}, spec);
  Tensor rhs(cx.shape());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs.data()[i] = alpha * cx.data()[i] + beta * cy.data()[i];
  }
  const double err = max_relative_error(lhs, rhs);
  return {"conv linearity", err <= 1e-5, "rel error " + std::to_string(err)};
}

inline CheckResult check_block_identities() {
  const Tensor x = seeded_fill({1, 128, 12, 16}, 7, Uniform{2.0f});
  std::ostringstream os;
  bool ok = true;

  const Graph dg = blocks::daspp_graph();
  const double d_err = max_relative_error(
      execute(dg, constant_init(dg, 0.0f), x).output(), x);
  ok = ok && d_err <= 1e-6;
  os << "daspp " << d_err;

  const Tensor xb = seeded_fill({1, 32, 9, 11}, 8, Uniform{2.0f});
  const Graph bg = blocks::bottleneck_graph(32, {6, 32, 1, 2});
  const double b_err = max_relative_error(
      execute(bg, constant_init(bg, 0.0f), xb).output(), xb);
  ok = ok && b_err <= 1e-6;
  os << ", bottleneck " << b_err;

  const Graph cg = blocks::cam_graph(32);
  Tensor half(xb.shape());
  for (std::size_t i = 0; i < half.size(); ++i) half.data()[i] = xb.data()[i] * 0.5f;
  const double c_err = max_relative_error(
      execute(cg, constant_init(cg, 0.0f), xb).output(), half);
  ok = ok && c_err <= 1e-6;
  os << ", cam " << c_err;
  return {"block identities", ok, os.str()};
}

// Graph of stride-1 single-channel same-padded convs for a rate stack.
inline Graph rate_stack_graph(std::span<const analysis::KernelRate> stack) {
  Graph g;
  NodeId x = g.add_input("x", 1);
  for (std::size_t i = 0; i < stack.size(); ++i) {
    x = g.conv("conv" + std::to_string(i), x,
               kernels::ConvSpec::same(1, 1, stack[i].kernel, stack[i].rate));
  }
  return g;
}

inline CheckResult check_gridding() {
  const std::vector<int> ladder{2, 4, 8, 16};
  const std::vector<int> single{16};
  const auto ladder_stack = analysis::rate_stack(ladder);
  const auto single_stack = analysis::rate_stack(single);
  const double dl = analysis::gridding_coverage(ladder_stack);
  const double ds = analysis::gridding_coverage(single_stack);
  bool ok = dl > ds;

  for (const auto& stack : {ladder_stack, single_stack}) {
    const long rf = analysis::stack_receptive_field(stack);
    const int side = static_cast<int>(rf) + 4;
    const Graph g = rate_stack_graph(stack);
    const auto fp = analysis::footprint_probe(g, g.output(), {1, 1, side, side},
                                              side / 2, side / 2);
    std::set<std::pair<int, int>> probed;
    for (auto [r, c] : fp.pixels) probed.emplace(r - side / 2, c - side / 2);
    ok = ok && probed == analysis::offset_set(stack);
  }
  std::ostringstream os;
  os << "ladder " << dl << " vs single d=16 " << ds;
  return {"gridding coverage", ok, os.str()};
}

inline CheckResult check_receptive_field_probe() {
  Graph g;
  NodeId x = g.add_input("x", 1);
  x = g.conv("conv", x, kernels::ConvSpec::same(1, 1, 7, 1, 2));
  x = g.pool("pool", x, {kernels::PoolKind::kMax, 3, 2, 1});
  const NodeId pool = x;
  x = g.conv("atrous", x, kernels::ConvSpec::same(1, 1, 3, 2));
  const Shape in{1, 1, 48, 48};
  const auto rf = analysis::receptive_fields(g, in);
  bool ok = true;
  std::ostringstream os;
  for (NodeId id : {NodeId{1}, pool, x}) {
    const auto shapes = g.infer_shapes(in);
    const auto fp = analysis::footprint_probe(g, id, in, shapes[id].h / 2,
                                              shapes[id].w / 2);
    ok = ok && fp.width() == rf[id].size && fp.height() == rf[id].size;
    os << g.node(id).name << " rf " << rf[id].size << " probe " << fp.width()
       << "; ";
  }
  return {"receptive field vs probe", ok, os.str()};
}

inline CheckResult check_shape_ledger() {
  const Graph g = build_network();
  const auto shapes = g.infer_shapes(Shape{1, 3, 448, 896});
  const std::vector<std::pair<std::string, Shape>> expect{
      {"block0_out", {1, 32, 224, 448}},  {"block1_out", {1, 16, 224, 448}},
      {"block2_out", {1, 24, 112, 224}},  {"block3_out", {1, 32, 56, 112}},
      {"block4_out", {1, 64, 56, 112}},   {"block5_out", {1, 96, 56, 112}},
      {"block6_out", {1, 160, 56, 112}},  {"block7_out", {1, 320, 56, 112}},
      {"dense_skip", {1, 640, 56, 112}},  {"daspp_out", {1, 128, 56, 112}},
      {"spn_layer0_out", {1, 64, 112, 224}}, {"spn_layer1_out", {1, 64, 112, 224}},
      {"spn_out", {1, 88, 112, 224}},     {"logits", {1, 19, 448, 896}}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& [tap, shape] : expect) {
    const Shape got = shapes[g.require_tap(tap)];
    if (got != shape) {
      ok = false;
      os << tap << " " << to_string(got) << " != " << to_string(shape) << "; ";
    }
  }
  if (ok) os << expect.size() << " taps match";
  return {"shape ledger 448x896", ok, os.str()};
}

inline std::vector<CheckResult> run_verification(std::uint64_t seed = 2024,
                                                 int conv_cases = 100) {
  std::vector<CheckResult> results;
  results.push_back(check_conv_equivalence(conv_cases, seed));
  results.push_back(check_linearity(seed));
  results.push_back(check_block_identities());
  results.push_back(check_gridding());
  results.push_back(check_receptive_field_probe());
  results.push_back(check_shape_ledger());
  return results;
}

}  // namespace lbnseg

#endif  // LBNSEG_VERIFY_HPP_
