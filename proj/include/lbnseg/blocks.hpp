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

// Composite blocks of the segmentation network, expressed as graph builders.
// Each builder appends nodes under a dotted name prefix and returns the id of
// its output node. The *_graph factories wrap a single block with its own
// input nodes so it can be initialized and run in isolation.

#ifndef LBNSEG_BLOCKS_HPP_
#define LBNSEG_BLOCKS_HPP_

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/kernels/activation.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/kernels/pooling.hpp"

namespace lbnseg::blocks {

using kernels::Activation;
using kernels::ActivationKind;
using kernels::ConvSpec;
using kernels::PoolKind;
using kernels::PoolSpec;

inline constexpr Activation kRelu{ActivationKind::kRelu};
inline constexpr Activation kRelu6{ActivationKind::kRelu6};
inline constexpr Activation kLeaky{ActivationKind::kLeakyRelu,
                                   kernels::kLeakySlope};
inline constexpr Activation kSigmoid{ActivationKind::kSigmoid};

// conv -> BN -> optional activation, named <prefix>.conv / .bn / .act.
inline NodeId conv_bn_act(Graph& g, const std::string& prefix, NodeId x,
                          const ConvSpec& spec,
                          std::optional<Activation> act) {
  NodeId h = g.conv(prefix + ".conv", x, spec);
  h = g.batchnorm(prefix + ".bn", h);
  if (act) h = g.activation(prefix + ".act", h, *act);
  return h;
}

// ---------------------------------------------------------------------------
// Inverted residual bottleneck.

struct BottleneckSpec {
  int expansion = 6;
  int out_channels = 16;
  int stride = 1;
  int rate = 1;

  void validate() const {
    if (expansion < 1 || out_channels < 1 || rate < 1 ||
        (stride != 1 && stride != 2)) {
      throw ShapeError("invalid bottleneck spec");
    }
  }
};

inline bool has_shortcut(int in_channels, const BottleneckSpec& spec) {
  return spec.stride == 1 && in_channels == spec.out_channels;
}

// 1x1 expand (skipped when t = 1) -> BN -> relu6 -> 3x3 depthwise (stride s,
// rate d) -> BN -> relu6 -> 1x1 linear projection -> BN, plus the identity
// shortcut when stride is 1 and channel counts match.
inline NodeId bottleneck(Graph& g, const std::string& prefix, NodeId x,
                         const BottleneckSpec& spec) {
  spec.validate();
  const int in = g.channels(x);
  const int hidden = in * spec.expansion;
  NodeId h = x;
  if (spec.expansion != 1) {
    h = conv_bn_act(g, prefix + ".expand", h, ConvSpec::same(in, hidden, 1),
                    kRelu6);
  }
  h = conv_bn_act(g, prefix + ".depthwise", h,
                  ConvSpec::same(hidden, hidden, 3, spec.rate, spec.stride,
                                 hidden),
                  kRelu6);
  h = conv_bn_act(g, prefix + ".project", h,
                  ConvSpec::same(hidden, spec.out_channels, 1), std::nullopt);
  if (has_shortcut(in, spec)) h = g.add(prefix + ".residual", {x, h});
  return h;
}

// ---------------------------------------------------------------------------
// Channel attention.

// Width of the squeezed attention vector.
inline int cam_reduced_width(int channels) { return std::max(channels / 4, 8); }

// gap -> 1x1 conv (C -> C/4) -> BN -> leaky relu -> linear (C/4 -> C) ->
// sigmoid, then the input channels are scaled by the resulting vector.
inline NodeId cam(Graph& g, const std::string& prefix, NodeId x) {
  const int c = g.channels(x);
  const int r = cam_reduced_width(c);
  NodeId a = g.global_avg_pool(prefix + ".gap", x);
  a = conv_bn_act(g, prefix + ".squeeze", a, ConvSpec::same(c, r, 1), kLeaky);
  a = g.linear(prefix + ".fc", a, c);
  a = g.activation(prefix + ".sigmoid", a, kSigmoid);
  return g.scale_channels(prefix + ".scale", x, a);
}

// ---------------------------------------------------------------------------
// Atrous spatial pyramid pooling (comparison configuration).

struct AsppConfig {
  std::array<int, 3> rates{6, 12, 18};
  int branch_channels = 128;
};

// Parallel 1x1 and three 3x3 atrous branches on the same input, concatenated
// in (1x1, rate0, rate1, rate2) order.
inline NodeId aspp(Graph& g, const std::string& prefix, NodeId x,
                   const AsppConfig& cfg = {}) {
  const int c = g.channels(x);
  const int b = cfg.branch_channels;
  std::vector<NodeId> branches;
  branches.push_back(
      conv_bn_act(g, prefix + ".branch0", x, ConvSpec::same(c, b, 1), kRelu));
  for (std::size_t i = 0; i < cfg.rates.size(); ++i) {
    branches.push_back(conv_bn_act(g, prefix + ".branch" + std::to_string(i + 1),
                                   x, ConvSpec::same(c, b, 3, cfg.rates[i]),
                                   kRelu));
  }
  return g.concat(prefix + ".concat", branches);
}

// ---------------------------------------------------------------------------
// Distinctive ASPP.

enum class DasppMerge { kConcatThenShortcut, kSum };

struct DasppConfig {
  std::array<int, 3> pool_sizes{3, 5, 7};
  std::array<int, 3> rates{12, 24, 36};
  int channels = 128;
  PoolKind pool = PoolKind::kAvg;
  DasppMerge merge = DasppMerge::kConcatThenShortcut;
};

// Five branches at input resolution, in this order:
//   image   gap -> 1x1 -> BN -> relu -> bilinear back to H x W
//   pooledI pool(size_I, stride 1) -> 3x3 rate_I -> BN -> relu   (I = 0..2)
//   local   1x1 -> BN -> relu -> 3x3 -> BN -> relu
// concat_then_shortcut: concat (5C) -> 1x1 -> BN, added to the input.
// sum: input plus all branch outputs.
inline NodeId daspp(Graph& g, const std::string& prefix, NodeId x,
                    const DasppConfig& cfg = {}) {
  const int c = cfg.channels;
  if (g.channels(x) != c) {
    throw ShapeError(prefix + ": expects " + std::to_string(c) +
                     " input channels, got " + std::to_string(g.channels(x)));
  }
  std::vector<NodeId> branches;
  NodeId img = g.global_avg_pool(prefix + ".image.gap", x);
  img = conv_bn_act(g, prefix + ".image", img, ConvSpec::same(c, c, 1), kRelu);
  branches.push_back(g.resize_like(prefix + ".image.resize", img, x));
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name = prefix + ".pooled" + std::to_string(i);
    NodeId p = g.pool(name + ".pool", x, PoolSpec::same(cfg.pool, cfg.pool_sizes[i]));
    branches.push_back(conv_bn_act(g, name, p, ConvSpec::same(c, c, 3, cfg.rates[i]),
                                   kRelu));
  }
  NodeId local = conv_bn_act(g, prefix + ".local.reduce", x,
                             ConvSpec::same(c, c, 1), kRelu);
  branches.push_back(
      conv_bn_act(g, prefix + ".local", local, ConvSpec::same(c, c, 3), kRelu));

  if (cfg.merge == DasppMerge::kSum) {
    std::vector<NodeId> terms{x};
    terms.insert(terms.end(), branches.begin(), branches.end());
    return g.add(prefix + ".sum", terms);
  }
  NodeId cat = g.concat(prefix + ".concat", branches);
  NodeId merged = conv_bn_act(g, prefix + ".merge", cat,
                              ConvSpec::same(c * 5, c, 1), std::nullopt);
  return g.add(prefix + ".shortcut", {x, merged});
}

// ---------------------------------------------------------------------------
// Spatial detail branch.

inline constexpr int kSpnWidth = 64;

struct SpnNodes {
  NodeId layer0 = -1;
  NodeId layer1 = -1;
  NodeId out = -1;
};

// layer0: 7x7/2 conv -> BN -> relu -> 3x3/2 max pool; layer1: two basic
// residual blocks of 64 channels; output concatenates layer1 with the
// quarter-resolution features of the semantic branch.
inline SpnNodes spn(Graph& g, const std::string& prefix, NodeId image,
                    NodeId quarter_features) {
  SpnNodes nodes;
  NodeId h = conv_bn_act(g, prefix + ".layer0", image,
                         ConvSpec::same(g.channels(image), kSpnWidth, 7, 1, 2),
                         kRelu);
  h = g.pool(prefix + ".layer0.pool", h, {PoolKind::kMax, 3, 2, 1});
  nodes.layer0 = h;
  for (int u = 0; u < 2; ++u) {
    const std::string unit = prefix + ".layer1.unit" + std::to_string(u);
    NodeId r = conv_bn_act(g, unit + ".conv1", h,
                           ConvSpec::same(kSpnWidth, kSpnWidth, 3), kRelu);
    r = conv_bn_act(g, unit + ".conv2", r,
                    ConvSpec::same(kSpnWidth, kSpnWidth, 3), std::nullopt);
    r = g.add(unit + ".residual", {h, r});
    h = g.activation(unit + ".relu", r, kRelu);
  }
  nodes.layer1 = h;
  nodes.out = g.concat(prefix + ".concat", {h, quarter_features});
  return nodes;
}

// ---------------------------------------------------------------------------
// Fusion heads.

enum class Fusion { kFfn, kAdd };

inline constexpr int kSemanticChannels = 128;
inline constexpr int kSpatialChannels = 88;

inline void check_fusion_inputs(const Graph& g, const std::string& prefix,
                                NodeId semantic, NodeId spatial) {
  if (g.channels(semantic) != kSemanticChannels ||
      g.channels(spatial) != kSpatialChannels) {
    throw ShapeError(prefix + ": expects (" + std::to_string(kSemanticChannels) +
                     ", " + std::to_string(kSpatialChannels) +
                     ") channels, got (" + std::to_string(g.channels(semantic)) +
                     ", " + std::to_string(g.channels(spatial)) + ")");
  }
}

// semantic x2 bilinear -> concat with spatial (216) -> BN -> 3x3 rate-2 conv
// -> BN -> 1x1 classifier -> bilinear to the image size.
inline NodeId ffn(Graph& g, const std::string& prefix, NodeId semantic,
                  NodeId spatial, NodeId image, int num_classes) {
  check_fusion_inputs(g, prefix, semantic, spatial);
  NodeId up = g.resize_like(prefix + ".upsample", semantic, spatial, 2);
  NodeId h = g.concat(prefix + ".concat", {up, spatial});
  const int c = g.channels(h);
  h = g.batchnorm(prefix + ".concat.bn", h);
  h = conv_bn_act(g, prefix + ".fuse", h, ConvSpec::same(c, c, 3, 2),
                  std::nullopt);
  h = g.conv(prefix + ".classifier", h, ConvSpec::same(c, num_classes, 1), true);
  return g.resize_like(prefix + ".logits", h, image);
}

// Experimental element-wise-add fusion: both branches projected to class
// logits by 1x1 convs, summed at quarter resolution, then upsampled.
inline NodeId fusion_add(Graph& g, const std::string& prefix, NodeId semantic,
                         NodeId spatial, NodeId image, int num_classes) {
  check_fusion_inputs(g, prefix, semantic, spatial);
  NodeId a = g.conv(prefix + ".semantic_proj", semantic,
                    ConvSpec::same(g.channels(semantic), num_classes, 1), true);
  a = g.resize_like(prefix + ".upsample", a, spatial, 2);
  NodeId b = g.conv(prefix + ".spatial_proj", spatial,
                    ConvSpec::same(g.channels(spatial), num_classes, 1), true);
  NodeId sum = g.add(prefix + ".sum", {a, b});
  return g.resize_like(prefix + ".logits", sum, image);
}

// ---------------------------------------------------------------------------
// Stand-alone block graphs.

inline Graph bottleneck_graph(int in_channels, const BottleneckSpec& spec) {
  Graph g;
  NodeId x = g.add_input("x", in_channels);
  bottleneck(g, "bottleneck", x, spec);
  return g;
}

inline Graph cam_graph(int channels) {
  Graph g;
  NodeId x = g.add_input("x", channels);
  cam(g, "cam", x);
  return g;
}

inline Graph aspp_graph(int channels, const AsppConfig& cfg = {}) {
  Graph g;
  NodeId x = g.add_input("x", channels);
  aspp(g, "aspp", x, cfg);
  return g;
}

inline Graph daspp_graph(const DasppConfig& cfg = {}) {
  Graph g;
  NodeId x = g.add_input("x", cfg.channels);
  daspp(g, "daspp", x, cfg);
  return g;
}

// Inputs: image (3 channels), quarter-resolution features.
inline Graph spn_graph(int quarter_channels = 24) {
  Graph g;
  NodeId image = g.add_input("image", 3);
  NodeId q = g.add_input("quarter", quarter_channels);
  const SpnNodes n = spn(g, "spn", image, q);
  g.set_tap("spn_layer0_out", n.layer0);
  g.set_tap("spn_layer1_out", n.layer1);
  g.set_tap("spn_out", n.out);
  return g;
}

// Inputs: semantic (128 ch, 1/8), spatial (88 ch, 1/4), image (any channels,
// full resolution; used only for its size).
inline Graph fusion_graph(int num_classes = 19, Fusion mode = Fusion::kFfn,
                          int image_channels = 3) {
  Graph g;
  NodeId sem = g.add_input("semantic", kSemanticChannels);
  NodeId spa = g.add_input("spatial", kSpatialChannels);
  NodeId img = g.add_input("image", image_channels);
  if (mode == Fusion::kFfn) {
    ffn(g, "ffn", sem, spa, img, num_classes);
  } else {
    fusion_add(g, "fusion", sem, spa, img, num_classes);
  }
  return g;
}

}  // namespace lbnseg::blocks

#endif  // LBNSEG_BLOCKS_HPP_
