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

#ifndef LBNSEG_EXECUTOR_HPP_
#define LBNSEG_EXECUTOR_HPP_

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/kernels/activation.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/kernels/linear.hpp"
#include "lbnseg/kernels/pooling.hpp"
#include "lbnseg/kernels/resize.hpp"
#include "lbnseg/tensor.hpp"
#include "lbnseg/weights.hpp"

namespace lbnseg {

struct ExecOptions {
  kernels::ConvPath path = kernels::ConvPath::kOptimized;
  // Retain every intermediate instead of only taps and the output.
  bool keep_all = false;
  // Run the image-only part of the spatial branch on a second thread.
  bool parallel_branches = false;
  // Evaluate only what these nodes need; empty means the graph output.
  std::vector<NodeId> targets;
};

// Retained node outputs of one execution.
class Activations {
 public:
  explicit Activations(const Graph& graph)
      : graph_(&graph), values_(graph.size()) {}

  bool has(NodeId id) const { return values_.at(id).has_value(); }

  const Tensor& at(NodeId id) const {
    if (!has(id)) {
      throw Error(ErrorKind::kUsage,
                  "activation of '" + graph_->node(id).name + "' not retained");
    }
    return *values_[id];
  }

  // Looks up a tap first, then a node name.
  const Tensor& at(std::string_view name) const {
    if (auto t = graph_->tap(name)) return at(*t);
    if (auto n = graph_->find(name)) return at(*n);
    throw Error(ErrorKind::kUsage, "no tap or node named '" + std::string(name) + "'");
  }

  const Tensor& output() const { return at(graph_->output()); }

  std::optional<Tensor>& slot(NodeId id) { return values_[id]; }

 private:
  const Graph* graph_;
  std::vector<std::optional<Tensor>> values_;
};

namespace detail {

inline std::span<const float> bias_of(const WeightStore& w,
                                      const std::string& node, bool has_bias) {
  if (!has_bias) return {};
  return w.get(node + ".bias").data();
}

inline Tensor eval_node(const Node& n, std::span<const Tensor* const> args,
                        const WeightStore& weights, kernels::ConvPath path) {
  const Tensor& x = *args[0];
  struct Visitor {
    const Node& n;
    std::span<const Tensor* const> args;
    const WeightStore& weights;
    kernels::ConvPath path;
    const Tensor& x;

    Tensor operator()(const ops::Input&) const { return x; }
    Tensor operator()(const ops::Conv& c) const {
      const Tensor& w = weights.get(n.name + ".weight");
      if (w.shape() != c.spec.weight_shape()) {
        throw BindingError(n.name + ".weight has shape " + to_string(w.shape()) +
                           ", expected " + to_string(c.spec.weight_shape()));
      }
      return kernels::conv2d(x, w, bias_of(weights, n.name, c.bias), c.spec,
                             path);
    }
    Tensor operator()(const ops::BatchNorm&) const {
      return kernels::batchnorm_inference(x, weights.batchnorm(n.name));
    }
    Tensor operator()(const ops::Act& a) const {
      return kernels::activation(x, a.act);
    }
    Tensor operator()(const ops::Pool& p) const {
      return kernels::pool2d(x, p.spec);
    }
    Tensor operator()(const ops::GlobalAvgPool&) const {
      return kernels::global_avg_pool(x);
    }
    Tensor operator()(const ops::ResizeLike&) const {
      return kernels::bilinear_resize(x, args[1]->height(), args[1]->width());
    }
    Tensor operator()(const ops::Concat&) const {
      return concat_channels(args);
    }
    Tensor operator()(const ops::Add&) const {
      Tensor sum = x;
      for (std::size_t i = 1; i < args.size(); ++i) {
        sum = elementwise_add(sum, *args[i]);
      }
      return sum;
    }
    Tensor operator()(const ops::ScaleChannels&) const {
      const Tensor& gate = *args[1];
      Tensor out(x.shape());
      for (int b = 0; b < x.batch(); ++b) {
        Tensor item = slice_batch(x, b);
        std::span<const float> g(gate.plane(b, 0), gate.channels());
        Tensor scaled = scale_channels(item, g);
        std::copy(scaled.data().begin(), scaled.data().end(), out.plane(b, 0));
      }
      return out;
    }
    Tensor operator()(const ops::Linear& fc) const {
      const Tensor& w = weights.get(n.name + ".weight");
      const auto b = bias_of(weights, n.name, fc.bias);
      Tensor out({x.batch(), fc.out_features, 1, 1});
      for (int i = 0; i < x.batch(); ++i) {
        std::span<const float> v(x.plane(i, 0), x.channels());
        const auto r = kernels::linear(v, w, b);
        std::copy(r.begin(), r.end(), out.plane(i, 0));
      }
      return out;
    }

    static Tensor slice_batch(const Tensor& t, int b) {
      Shape s = t.shape();
      s.n = 1;
      const float* p = t.plane(b, 0);
      return Tensor(s, std::vector<float>(p, p + s.count()));
    }
  };
  return std::visit(Visitor{n, args, weights, path, x}, n.op);
}

inline Tensor eval_checked(const Graph& graph, NodeId id,
                           std::span<const Tensor* const> args,
                           const WeightStore& weights, kernels::ConvPath path) {
  const Node& n = graph.node(id);
  try {
    return eval_node(n, args, weights, path);
  } catch (const ShapeError& e) {
    throw ShapeError(n.name + ": " + e.what());
  } catch (const BindingError& e) {
    throw BindingError(n.name + ": " + e.what());
  }
}

}  // namespace detail

// Runs the graph on `inputs` (one tensor per input node, declaration order).
// Deterministic for fixed inputs and weights; `weights` is only read.
inline Activations execute(const Graph& graph, const WeightStore& weights,
                           std::span<const Tensor> inputs,
                           const ExecOptions& options = {}) {
  const auto input_nodes = graph.input_ids();
  if (inputs.size() != input_nodes.size()) {
    throw ShapeError("graph expects " + std::to_string(input_nodes.size()) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<Shape> in_shapes;
  for (const Tensor& t : inputs) in_shapes.push_back(t.shape());
  graph.infer_shapes(in_shapes);

  std::vector<NodeId> targets = options.targets;
  if (targets.empty()) targets.push_back(graph.output());
  const auto needed = graph.ancestors(targets);

  std::vector<bool> keep(graph.size(), options.keep_all);
  for (NodeId t : targets) keep[t] = true;
  for (const auto& [name, id] : graph.taps()) keep[id] = true;

  std::vector<int> remaining(graph.size(), 0);
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    if (!needed[id]) continue;
    for (NodeId in : graph.node(id).inputs) ++remaining[in];
  }

  // Spatial-branch nodes that depend only on graph inputs form the side task.
  std::vector<bool> side(graph.size(), false);
  if (options.parallel_branches) {
    for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
      const Node& n = graph.node(id);
      if (!needed[id] || n.branch != Branch::kSpatial) continue;
      bool ok = true;
      for (NodeId in : n.inputs) {
        const bool is_input =
            std::holds_alternative<ops::Input>(graph.node(in).op);
        ok = ok && (is_input || side[in]);
      }
      side[id] = ok;
    }
  }

  Activations acts(graph);
  std::size_t next_input = 0;
  for (NodeId id : input_nodes) acts.slot(id) = inputs[next_input++];

  auto release = [&](NodeId id) {
    if (--remaining[id] == 0 && !keep[id]) acts.slot(id).reset();
  };

  std::future<std::map<NodeId, Tensor>> side_task;
  bool side_joined = true;
  if (std::find(side.begin(), side.end(), true) != side.end()) {
    side_joined = false;
    side_task = std::async(std::launch::async, [&graph, &weights, &side,
                                                &acts, &options] {
      std::map<NodeId, Tensor> local;
      for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
        if (!side[id]) continue;
        std::vector<const Tensor*> args;
        for (NodeId in : graph.node(id).inputs) {
          auto it = local.find(in);
          args.push_back(it != local.end() ? &it->second : &acts.at(in));
        }
        local.emplace(id, detail::eval_checked(graph, id, args, weights,
                                               options.path));
      }
      return local;
    });
  }
  auto join_side = [&] {
    if (side_joined) return;
    side_joined = true;
    for (auto& [id, t] : side_task.get()) acts.slot(id) = std::move(t);
  };

  try {
    for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
      const Node& n = graph.node(id);
      if (!needed[id] || side[id] || std::holds_alternative<ops::Input>(n.op)) {
        continue;
      }
      std::vector<const Tensor*> args;
      for (NodeId in : n.inputs) {
        if (side[in]) join_side();
        args.push_back(&acts.at(in));
      }
      acts.slot(id) = detail::eval_checked(graph, id, args, weights, options.path);
      for (NodeId in : n.inputs) release(in);
    }
    join_side();
  } catch (...) {
    if (!side_joined) side_task.wait();
    throw;
  }
  return acts;
}

inline Activations execute(const Graph& graph, const WeightStore& weights,
                           const Tensor& input,
                           const ExecOptions& options = {}) {
  return execute(graph, weights, std::span<const Tensor>(&input, 1), options);
}

}  // namespace lbnseg

#endif  // LBNSEG_EXECUTOR_HPP_
