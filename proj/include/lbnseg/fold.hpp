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

#ifndef LBNSEG_FOLD_HPP_
#define LBNSEG_FOLD_HPP_

#include <map>
#include <vector>

#include "lbnseg/graph.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/weights.hpp"

namespace lbnseg {

struct FoldedModel {
  Graph graph;
  WeightStore weights;
  int folded = 0;  // number of batch norms absorbed
};

// Absorbs every batch norm whose sole input is a convolution consumed by
// nothing else (and not tapped) into that convolution's weights and bias.
inline FoldedModel fold_batchnorms(const Graph& graph,
                                   const WeightStore& weights) {
  const auto consumers = graph.consumer_counts();
  std::vector<bool> tapped(graph.size(), false);
  for (const auto& [name, id] : graph.taps()) tapped[id] = true;
  tapped[graph.output()] = true;

  std::vector<bool> fold(graph.size(), false);
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    if (!std::holds_alternative<ops::BatchNorm>(n.op)) continue;
    const NodeId src = n.inputs.front();
    if (std::holds_alternative<ops::Conv>(graph.node(src).op) &&
        consumers[src] == 1 && !tapped[src]) {
      fold[id] = true;
    }
  }

  FoldedModel out;
  std::vector<NodeId> remap(graph.size(), -1);
  std::map<NodeId, NodeId> bn_of_conv;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    if (fold[id]) bn_of_conv[graph.node(id).inputs.front()] = id;
  }
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    if (fold[id]) {
      remap[id] = remap[n.inputs.front()];
      ++out.folded;
      continue;
    }
    Node copy = n;
    for (NodeId& in : copy.inputs) in = remap[in];
    auto it = bn_of_conv.find(id);
    if (it != bn_of_conv.end()) {
      auto& conv = std::get<ops::Conv>(copy.op);
      const Tensor& w = weights.get(n.name + ".weight");
      std::span<const float> b;
      if (conv.bias) b = weights.get(n.name + ".bias").data();
      const auto folded = kernels::fold_batchnorm(
          w, b, weights.batchnorm(graph.node(it->second).name));
      conv.bias = true;
      out.weights.set(n.name + ".weight", folded.weights);
      out.weights.set(n.name + ".bias",
                      Tensor({1, conv.spec.out_channels, 1, 1}, folded.bias));
    }
    remap[id] = out.graph.append(copy);
  }
  for (const auto& [name, id] : graph.taps()) out.graph.set_tap(name, remap[id]);
  out.graph.set_output(remap[graph.output()]);

  for (const ParamSpec& p : out.graph.parameters()) {
    if (!out.weights.contains(p.name)) out.weights.set(p.name, weights.get(p.name));
  }
  return out;
}

}  // namespace lbnseg

#endif  // LBNSEG_FOLD_HPP_
