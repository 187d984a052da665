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

#ifndef LBNSEG_ANALYSIS_RECEPTIVE_FIELD_HPP_
#define LBNSEG_ANALYSIS_RECEPTIVE_FIELD_HPP_

#include <algorithm>
#include <span>
#include <vector>

#include "lbnseg/graph.hpp"

namespace lbnseg::analysis {

// Receptive field of one node along one spatial axis, in input pixels.
struct ReceptiveField {
  long size = 1;   // extent of the local window
  long jump = 1;   // input-pixel distance between adjacent outputs
  bool global = false;  // depends on the whole input (global pooling upstream)

  friend bool operator==(const ReceptiveField&, const ReceptiveField&) = default;
};

// Standard recurrence: RF_l = RF_{l-1} + (k_l - 1) * d_l * prod_{i<l} s_i,
// with RF = 1 at the inputs. Merges (concat, add, scale) take the widest
// input. A bilinear resize reads two neighbouring samples, so it widens the
// field by one input step and rescales the jump by the size ratio.
inline std::vector<ReceptiveField> receptive_fields(
    const Graph& graph, std::span<const Shape> input_shapes) {
  const auto shapes = graph.infer_shapes(input_shapes);
  std::vector<ReceptiveField> rf(graph.size());
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    if (std::holds_alternative<ops::Input>(n.op)) {
      rf[id] = {};
      continue;
    }
    const ReceptiveField in = rf[n.inputs.front()];
    ReceptiveField out = in;
    if (const auto* c = std::get_if<ops::Conv>(&n.op)) {
      out.size = in.size + static_cast<long>(c->spec.kernel - 1) *
                               c->spec.rate * in.jump;
      out.jump = in.jump * c->spec.stride;
    } else if (const auto* p = std::get_if<ops::Pool>(&n.op)) {
      out.size = in.size + static_cast<long>(p->spec.kernel - 1) * in.jump;
      out.jump = in.jump * p->spec.stride;
    } else if (std::holds_alternative<ops::GlobalAvgPool>(n.op)) {
      out.global = true;
    } else if (std::holds_alternative<ops::ResizeLike>(n.op)) {
      const Shape src = shapes[n.inputs[0]];
      const Shape dst = shapes[id];
      if (src.h != dst.h || src.w != dst.w) {
        out.size = in.size + in.jump;
        out.jump = std::max(1L, in.jump * src.w / dst.w);
      }
    } else if (std::holds_alternative<ops::Concat>(n.op) ||
               std::holds_alternative<ops::Add>(n.op) ||
               std::holds_alternative<ops::ScaleChannels>(n.op)) {
      for (NodeId i : n.inputs) {
        out.size = std::max(out.size, rf[i].size);
        out.jump = std::max(out.jump, rf[i].jump);
        out.global = out.global || rf[i].global;
      }
    }
    rf[id] = out;
  }
  return rf;
}

inline std::vector<ReceptiveField> receptive_fields(const Graph& graph,
                                                    const Shape& input) {
  return receptive_fields(graph, std::span<const Shape>(&input, 1));
}

}  // namespace lbnseg::analysis

#endif  // LBNSEG_ANALYSIS_RECEPTIVE_FIELD_HPP_
