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

// Static computation graph. Blocks append nodes through the builder methods;
// a node may only consume earlier nodes, so insertion order is a topological
// order. Every node carries a canonical dotted path (e.g.
// "lbn.block4.unit0.expand.conv") that also prefixes its parameter names.

#ifndef LBNSEG_GRAPH_HPP_
#define LBNSEG_GRAPH_HPP_

#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/kernels/activation.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/kernels/pooling.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg {

using NodeId = int;

namespace ops {

struct Input {
  int channels = 3;
};
struct Conv {
  kernels::ConvSpec spec;
  bool bias = false;
};
struct BatchNorm {
  int channels = 1;
};
struct Act {
  kernels::Activation act;
};
struct Pool {
  kernels::PoolSpec spec;
};
struct GlobalAvgPool {};
// inputs: {x, reference}; output takes the reference's height and width.
// A positive expected_ratio requires reference size == ratio * input size.
struct ResizeLike {
  int expected_ratio = 0;
};
struct Concat {};
// n-ary elementwise sum
struct Add {};
// inputs: {x, gate} with gate shaped (N, C, 1, 1)
struct ScaleChannels {};
// fully connected over (N, in, 1, 1)
struct Linear {
  int in_features = 1;
  int out_features = 1;
  bool bias = true;
};

}  // namespace ops

using Op = std::variant<ops::Input, ops::Conv, ops::BatchNorm, ops::Act,
                        ops::Pool, ops::GlobalAvgPool, ops::ResizeLike,
                        ops::Concat, ops::Add, ops::ScaleChannels, ops::Linear>;

inline std::string_view op_name(const Op& op) {
  struct Visitor {
    std::string_view operator()(const ops::Input&) const { return "input"; }
    std::string_view operator()(const ops::Conv&) const { return "conv"; }
    std::string_view operator()(const ops::BatchNorm&) const { return "bn"; }
    std::string_view operator()(const ops::Act&) const { return "act"; }
    std::string_view operator()(const ops::Pool& p) const {
      return p.spec.kind == kernels::PoolKind::kMax ? "maxpool" : "avgpool";
    }
    std::string_view operator()(const ops::GlobalAvgPool&) const { return "gap"; }
    std::string_view operator()(const ops::ResizeLike&) const { return "resize"; }
    std::string_view operator()(const ops::Concat&) const { return "concat"; }
    std::string_view operator()(const ops::Add&) const { return "add"; }
    std::string_view operator()(const ops::ScaleChannels&) const { return "scale"; }
    std::string_view operator()(const ops::Linear&) const { return "linear"; }
  };
  return std::visit(Visitor{}, op);
}

// Which path of the two-branch network a node belongs to.
enum class Branch { kShared, kSemantic, kSpatial, kFusion };

struct Node {
  std::string name;
  Op op;
  std::vector<NodeId> inputs;
  Branch branch = Branch::kShared;
  int channels = 0;  // output channels, fixed at build time
};

enum class ParamRole { kWeight, kBias, kBnGamma, kBnBeta, kBnMean, kBnVar };

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamRole role = ParamRole::kWeight;
  int fan_in = 1;
  NodeId node = -1;

  // Counted in the "Params" total; running BN statistics are not.
  bool learnable() const {
    return role != ParamRole::kBnMean && role != ParamRole::kBnVar;
  }
};

class Graph {
 public:
  NodeId add_input(std::string name, int channels) {
    return push(std::move(name), ops::Input{channels}, {}, channels);
  }

  NodeId conv(std::string name, NodeId x, const kernels::ConvSpec& spec,
              bool bias = false) {
    spec.validate();
    expect_channels(name, x, spec.in_channels);
    return push(std::move(name), ops::Conv{spec, bias}, {x}, spec.out_channels);
  }

  NodeId batchnorm(std::string name, NodeId x) {
    const int c = channels(x);
    return push(std::move(name), ops::BatchNorm{c}, {x}, c);
  }

  NodeId activation(std::string name, NodeId x, kernels::Activation act) {
    return push(std::move(name), ops::Act{act}, {x}, channels(x));
  }

  NodeId pool(std::string name, NodeId x, const kernels::PoolSpec& spec) {
    return push(std::move(name), ops::Pool{spec}, {x}, channels(x));
  }

  NodeId global_avg_pool(std::string name, NodeId x) {
    return push(std::move(name), ops::GlobalAvgPool{}, {x}, channels(x));
  }

  NodeId resize_like(std::string name, NodeId x, NodeId reference,
                     int expected_ratio = 0) {
    return push(std::move(name), ops::ResizeLike{expected_ratio},
                {x, reference}, channels(x));
  }

  // Re-adds a node (e.g. from another graph) with already remapped inputs.
  NodeId append(const Node& n) {
    const Branch saved = branch_;
    branch_ = n.branch;
    const NodeId id = push(n.name, n.op, n.inputs, n.channels);
    branch_ = saved;
    return id;
  }

  NodeId concat(std::string name, std::vector<NodeId> xs) {
    if (xs.empty()) throw ShapeError(name + ": concat of nothing");
    int c = 0;
    for (NodeId x : xs) c += channels(x);
    return push(std::move(name), ops::Concat{}, std::move(xs), c);
  }

  NodeId add(std::string name, std::vector<NodeId> xs) {
    if (xs.empty()) throw ShapeError(name + ": add of nothing");
    const int c = channels(xs.front());
    for (NodeId x : xs) expect_channels(name, x, c);
    return push(std::move(name), ops::Add{}, std::move(xs), c);
  }

  NodeId scale_channels(std::string name, NodeId x, NodeId gate) {
    expect_channels(name, gate, channels(x));
    return push(std::move(name), ops::ScaleChannels{}, {x, gate}, channels(x));
  }

  NodeId linear(std::string name, NodeId x, int out_features, bool bias = true) {
    const int in = channels(x);
    return push(std::move(name), ops::Linear{in, out_features, bias}, {x},
                out_features);
  }

  // Subsequently added nodes are tagged with this branch.
  void set_branch(Branch b) { branch_ = b; }

  void set_tap(const std::string& tap, NodeId id) {
    check_id(id);
    taps_[tap] = id;
  }
  std::optional<NodeId> tap(std::string_view tap) const {
    auto it = taps_.find(std::string(tap));
    if (it == taps_.end()) return std::nullopt;
    return it->second;
  }
  NodeId require_tap(std::string_view tap) const {
    auto id = this->tap(tap);
    if (!id) throw Error(ErrorKind::kUsage, "unknown tap '" + std::string(tap) + "'");
    return *id;
  }
  const std::map<std::string, NodeId>& taps() const { return taps_; }

  std::optional<NodeId> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  void set_output(NodeId id) {
    check_id(id);
    output_ = id;
  }
  NodeId output() const {
    if (nodes_.empty()) throw Error(ErrorKind::kUsage, "empty graph");
    return output_.value_or(static_cast<NodeId>(nodes_.size()) - 1);
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const {
    check_id(id);
    return nodes_[id];
  }
  std::size_t size() const { return nodes_.size(); }
  int channels(NodeId id) const { return node(id).channels; }

  std::vector<NodeId> input_ids() const {
    std::vector<NodeId> ids;
    for (NodeId i = 0; i < static_cast<NodeId>(nodes_.size()); ++i) {
      if (std::holds_alternative<ops::Input>(nodes_[i].op)) ids.push_back(i);
    }
    return ids;
  }

  // Number of downstream consumers of each node.
  std::vector<int> consumer_counts() const {
    std::vector<int> counts(nodes_.size(), 0);
    for (const Node& n : nodes_) {
      for (NodeId in : n.inputs) ++counts[in];
    }
    return counts;
  }

  // Nodes that `targets` transitively depend on (including themselves).
  std::vector<bool> ancestors(std::span<const NodeId> targets) const {
    std::vector<bool> needed(nodes_.size(), false);
    for (NodeId t : targets) needed[t] = true;
    for (NodeId i = static_cast<NodeId>(nodes_.size()) - 1; i >= 0; --i) {
      if (!needed[i]) continue;
      for (NodeId in : nodes_[i].inputs) needed[in] = true;
    }
    return needed;
  }

  // Parameter manifest in node order.
  std::vector<ParamSpec> parameters() const {
    std::vector<ParamSpec> params;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
      const Node& n = nodes_[id];
      if (const auto* conv = std::get_if<ops::Conv>(&n.op)) {
        const auto& s = conv->spec;
        const int fan_in = s.in_channels / s.groups * s.kernel * s.kernel;
        params.push_back({n.name + ".weight", s.weight_shape(),
                          ParamRole::kWeight, fan_in, id});
        if (conv->bias) {
          params.push_back({n.name + ".bias", {1, s.out_channels, 1, 1},
                            ParamRole::kBias, fan_in, id});
        }
      } else if (const auto* bn = std::get_if<ops::BatchNorm>(&n.op)) {
        const Shape s{1, bn->channels, 1, 1};
        params.push_back({n.name + ".gamma", s, ParamRole::kBnGamma, 1, id});
        params.push_back({n.name + ".beta", s, ParamRole::kBnBeta, 1, id});
        params.push_back({n.name + ".mean", s, ParamRole::kBnMean, 1, id});
        params.push_back({n.name + ".var", s, ParamRole::kBnVar, 1, id});
      } else if (const auto* fc = std::get_if<ops::Linear>(&n.op)) {
        params.push_back({n.name + ".weight",
                          {fc->out_features, fc->in_features, 1, 1},
                          ParamRole::kWeight, fc->in_features, id});
        if (fc->bias) {
          params.push_back({n.name + ".bias", {1, fc->out_features, 1, 1},
                            ParamRole::kBias, fc->in_features, id});
        }
      }
    }
    return params;
  }

  // Output shape of every node for the given input shapes (one per input
  // node, in declaration order). Violations name the offending node.
  std::vector<Shape> infer_shapes(std::span<const Shape> inputs) const {
    const auto input_nodes = input_ids();
    if (inputs.size() != input_nodes.size()) {
      throw ShapeError("graph has " + std::to_string(input_nodes.size()) +
                       " inputs, got " + std::to_string(inputs.size()));
    }
    std::vector<Shape> shapes(nodes_.size());
    std::size_t next_input = 0;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
      const Node& n = nodes_[id];
      try {
        if (std::holds_alternative<ops::Input>(n.op)) {
          const Shape s = inputs[next_input++];
          if (!s.valid() || s.c != n.channels) {
            throw ShapeError("input shape " + to_string(s) + " but " +
                             std::to_string(n.channels) + " channels declared");
          }
          shapes[id] = s;
        } else {
          shapes[id] = infer_node(n, shapes);
        }
      } catch (const ShapeError& e) {
        throw ShapeError(n.name + ": " + e.what());
      }
    }
    return shapes;
  }

  std::vector<Shape> infer_shapes(const Shape& input) const {
    return infer_shapes(std::span<const Shape>(&input, 1));
  }

 private:
  static Shape infer_node(const Node& n, const std::vector<Shape>& shapes) {
    const Shape x = shapes[n.inputs.front()];
    struct Visitor {
      const Node& n;
      const std::vector<Shape>& shapes;
      Shape x;
      Shape operator()(const ops::Input&) const { return x; }
      Shape operator()(const ops::Conv& c) const {
        return c.spec.output_shape(x);
      }
      Shape operator()(const ops::BatchNorm&) const { return x; }
      Shape operator()(const ops::Act&) const { return x; }
      Shape operator()(const ops::Pool& p) const { return p.spec.output_shape(x); }
      Shape operator()(const ops::GlobalAvgPool&) const { return {x.n, x.c, 1, 1}; }
      Shape operator()(const ops::ResizeLike& rs) const {
        const Shape r = shapes[n.inputs[1]];
        if (rs.expected_ratio > 0 &&
            (r.h != x.h * rs.expected_ratio || r.w != x.w * rs.expected_ratio)) {
          throw ShapeError("resolution ratio between " + to_string(x) + " and " +
                           to_string(r) + " is not " +
                           std::to_string(rs.expected_ratio));
        }
        return {x.n, x.c, r.h, r.w};
      }
      Shape operator()(const ops::Concat&) const {
        Shape out = x;
        out.c = 0;
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          const Shape s = shapes[n.inputs[i]];
          if (s.n != x.n || s.h != x.h || s.w != x.w) {
            throw ShapeError("concat input " + std::to_string(i) + " has shape " +
                             to_string(s) + ", first is " + to_string(x));
          }
          out.c += s.c;
        }
        return out;
      }
      Shape operator()(const ops::Add&) const {
        for (std::size_t i = 1; i < n.inputs.size(); ++i) {
          if (shapes[n.inputs[i]] != x) {
            throw ShapeError("add input " + std::to_string(i) + " has shape " +
                             to_string(shapes[n.inputs[i]]) + ", expected " +
                             to_string(x));
          }
        }
        return x;
      }
      Shape operator()(const ops::ScaleChannels&) const {
        const Shape g = shapes[n.inputs[1]];
        if (g != Shape{x.n, x.c, 1, 1}) {
          throw ShapeError("gate shape " + to_string(g) + " for input " +
                           to_string(x));
        }
        return x;
      }
      Shape operator()(const ops::Linear& fc) const {
        if (x.h != 1 || x.w != 1 || x.c != fc.in_features) {
          throw ShapeError("linear expects (N," + std::to_string(fc.in_features) +
                           ",1,1), got " + to_string(x));
        }
        return {x.n, fc.out_features, 1, 1};
      }
    };
    return std::visit(Visitor{n, shapes, x}, n.op);
  }

  NodeId push(std::string name, Op op, std::vector<NodeId> inputs,
              int channels) {
    if (name.empty()) throw Error(ErrorKind::kUsage, "node without a name");
    if (by_name_.count(name)) {
      throw Error(ErrorKind::kUsage, "duplicate node name '" + name + "'");
    }
    for (NodeId in : inputs) check_id(in);
    const auto id = static_cast<NodeId>(nodes_.size());
    by_name_.emplace(name, id);
    nodes_.push_back({std::move(name), std::move(op), std::move(inputs),
                      branch_, channels});
    return id;
  }

  void check_id(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
      throw Error(ErrorKind::kUsage, "node id " + std::to_string(id) +
                                         " out of range");
    }
  }

  void expect_channels(const std::string& name, NodeId x, int expected) const {
    if (channels(x) != expected) {
      throw ShapeError(name + ": expects " + std::to_string(expected) +
                       " channels from '" + node(x).name + "', which has " +
                       std::to_string(channels(x)));
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> by_name_;
  std::map<std::string, NodeId> taps_;
  std::optional<NodeId> output_;
  Branch branch_ = Branch::kShared;
};

}  // namespace lbnseg

#endif  // LBNSEG_GRAPH_HPP_
