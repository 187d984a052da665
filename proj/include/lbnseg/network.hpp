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

#ifndef LBNSEG_NETWORK_HPP_
#define LBNSEG_NETWORK_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lbnseg/blocks.hpp"
#include "lbnseg/error.hpp"
#include "lbnseg/executor.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/tensor.hpp"
#include "lbnseg/weights.hpp"

namespace lbnseg {

enum class BlockOp { kConv2d, kBottleneck };

// One row of the backbone table: op, expansion t, channels c, repeats n,
// first-unit stride s and first-unit atrous rate d.
struct BlockRow {
  BlockOp op;
  int expansion;
  int channels;
  int repeats;
  int stride;
  int rate;
};

inline constexpr std::array<BlockRow, 8> kBackboneTable{{
    {BlockOp::kConv2d, 0, 32, 1, 2, 1},
    {BlockOp::kBottleneck, 1, 16, 1, 1, 1},
    {BlockOp::kBottleneck, 6, 24, 2, 2, 1},
    {BlockOp::kBottleneck, 6, 32, 3, 2, 1},
    {BlockOp::kBottleneck, 6, 64, 4, 1, 2},
    {BlockOp::kBottleneck, 6, 96, 3, 1, 4},
    {BlockOp::kBottleneck, 6, 160, 3, 1, 8},
    {BlockOp::kBottleneck, 6, 320, 1, 1, 16},
}};

// Blocks whose outputs get channel attention and feed the dense skip.
inline constexpr int kFirstAtrousBlock = 4;

// Atrous rate of the non-first units inside a repeated block.
enum class RateMode {
  kAllUnits,       // every unit keeps the block's rate d
  kFirstUnitOnly,  // later units fall back to rate 1
};

enum class ContextModule { kDaspp, kAspp };

struct NetworkConfig {
  int num_classes = 19;
  blocks::DasppConfig daspp;
  ContextModule context = ContextModule::kDaspp;
  blocks::Fusion fusion = blocks::Fusion::kFfn;
  RateMode rate_mode = RateMode::kAllUnits;
  bool attention = true;
};

inline constexpr int kInputChannels = 3;
inline constexpr int kInputDivisor = 8;
inline constexpr int kContextChannels = 128;

// Builds the two-branch network. Taps:
//   block0_out .. block7_out   backbone block outputs (after attention, 4-7)
//   dense_skip                 concat of block4..block7 (640 ch)
//   daspp_in, daspp_out        context module input / output (128 ch)
//   spn_layer0_out, spn_layer1_out, spn_out
//   logits
inline Graph build_network(const NetworkConfig& cfg = {}) {
  using blocks::ConvSpec;
  Graph g;
  const NodeId image = g.add_input("image", kInputChannels);

  g.set_branch(Branch::kSemantic);
  NodeId x = image;
  std::vector<NodeId> skips;
  NodeId quarter = -1;
  for (std::size_t b = 0; b < kBackboneTable.size(); ++b) {
    const BlockRow& row = kBackboneTable[b];
    const std::string block = "lbn.block" + std::to_string(b);
    if (row.op == BlockOp::kConv2d) {
      x = blocks::conv_bn_act(
          g, block, x,
          ConvSpec::same(g.channels(x), row.channels, 3, row.rate, row.stride),
          blocks::kRelu6);
    } else {
      for (int u = 0; u < row.repeats; ++u) {
        const bool first = u == 0;
        const int rate =
            first || cfg.rate_mode == RateMode::kAllUnits ? row.rate : 1;
        x = blocks::bottleneck(
            g, block + ".unit" + std::to_string(u), x,
            {row.expansion, row.channels, first ? row.stride : 1, rate});
      }
    }
    if (static_cast<int>(b) >= kFirstAtrousBlock) {
      if (cfg.attention) x = blocks::cam(g, block + ".cam", x);
      skips.push_back(x);
    }
    if (b == 2) quarter = x;
    g.set_tap("block" + std::to_string(b) + "_out", x);
  }
  const NodeId dense = g.concat("lbn.dense_skip", skips);
  g.set_tap("dense_skip", dense);

  NodeId ctx = blocks::conv_bn_act(
      g, "context.reduce", dense,
      ConvSpec::same(g.channels(dense), kContextChannels, 1), blocks::kRelu);
  g.set_tap("daspp_in", ctx);
  if (cfg.context == ContextModule::kDaspp) {
    blocks::DasppConfig dc = cfg.daspp;
    dc.channels = kContextChannels;
    ctx = blocks::daspp(g, "daspp", ctx, dc);
  } else {
    ctx = blocks::aspp(g, "aspp", ctx);
    ctx = blocks::conv_bn_act(
        g, "aspp.project", ctx,
        ConvSpec::same(g.channels(ctx), kContextChannels, 1), blocks::kRelu);
  }
  g.set_tap("daspp_out", ctx);

  g.set_branch(Branch::kSpatial);
  const blocks::SpnNodes spn = blocks::spn(g, "spn", image, quarter);
  g.set_tap("spn_layer0_out", spn.layer0);
  g.set_tap("spn_layer1_out", spn.layer1);
  g.set_tap("spn_out", spn.out);

  g.set_branch(Branch::kFusion);
  const NodeId logits =
      cfg.fusion == blocks::Fusion::kFfn
          ? blocks::ffn(g, "ffn", ctx, spn.out, image, cfg.num_classes)
          : blocks::fusion_add(g, "fusion", ctx, spn.out, image,
                               cfg.num_classes);
  g.set_tap("logits", logits);
  g.set_output(logits);
  return g;
}

inline void check_network_input(const Shape& s) {
  if (s.c != kInputChannels || s.h % kInputDivisor != 0 ||
      s.w % kInputDivisor != 0 || !s.valid()) {
    throw ShapeError("network input " + to_string(s) +
                     " must have 3 channels and height/width divisible by 8");
  }
}

// Full forward pass returning every tap.
inline Activations forward_with_taps(const Graph& graph,
                                     const WeightStore& weights,
                                     const Tensor& image,
                                     const ExecOptions& options = {}) {
  check_network_input(image.shape());
  validate_binding(graph, weights, /*strict=*/false);
  return execute(graph, weights, image, options);
}

inline Tensor forward(const Graph& graph, const WeightStore& weights,
                      const Tensor& image, const ExecOptions& options = {}) {
  ExecOptions opts = options;
  opts.targets = {graph.output()};
  return forward_with_taps(graph, weights, image, opts).output();
}

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<int> ids;

  int at(int y, int x) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

// Per-pixel argmax over channels of batch item 0; ties go to the lowest id.
inline LabelMap predict_labels(const Tensor& logits) {
  LabelMap map{logits.height(), logits.width(),
               std::vector<int>(logits.shape().plane(), 0)};
  std::vector<float> best(logits.plane(0, 0),
                          logits.plane(0, 0) + logits.shape().plane());
  for (int c = 1; c < logits.channels(); ++c) {
    const float* p = logits.plane(0, c);
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (p[i] > best[i]) {
        best[i] = p[i];
        map.ids[i] = c;
      }
    }
  }
  return map;
}

}  // namespace lbnseg

#endif  // LBNSEG_NETWORK_HPP_
