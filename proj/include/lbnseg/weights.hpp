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

#ifndef LBNSEG_WEIGHTS_HPP_
#define LBNSEG_WEIGHTS_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg {

// Named parameter tensors. Batch norm records are stored as four (1,C,1,1)
// tensors under "<node>.gamma", ".beta", ".mean" and ".var".
class WeightStore {
 public:
  void set(const std::string& name, Tensor value) {
    entries_.insert_or_assign(name, std::move(value));
  }

  bool contains(std::string_view name) const {
    return entries_.find(std::string(name)) != entries_.end();
  }

  const Tensor& get(std::string_view name) const {
    auto it = entries_.find(std::string(name));
    if (it == entries_.end()) {
      throw BindingError("unbound parameter '" + std::string(name) + "'");
    }
    return it->second;
  }

  Tensor& mutable_get(std::string_view name) {
    auto it = entries_.find(std::string(name));
    if (it == entries_.end()) {
      throw BindingError("unbound parameter '" + std::string(name) + "'");
    }
    return it->second;
  }

  void erase(std::string_view name) { entries_.erase(std::string(name)); }

  kernels::BatchNormParams batchnorm(const std::string& node) const {
    auto vec = [&](const char* suffix) {
      const auto& v = get(node + suffix).values();
      return std::vector<float>(v.begin(), v.end());
    };
    return {vec(".gamma"), vec(".beta"), vec(".mean"), vec(".var"),
            kernels::kBatchNormEpsilon};
  }

  void set_batchnorm(const std::string& node, const kernels::BatchNormParams& p) {
    const Shape s{1, static_cast<int>(p.channels()), 1, 1};
    set(node + ".gamma", Tensor(s, p.gamma));
    set(node + ".beta", Tensor(s, p.beta));
    set(node + ".mean", Tensor(s, p.mean));
    set(node + ".var", Tensor(s, p.var));
  }

  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const WeightStore&, const WeightStore&) = default;

 private:
  std::map<std::string, Tensor> entries_;
};

// Every graph parameter must be present with its manifest shape. In strict
// mode the store may not hold anything else.
inline void validate_binding(const Graph& graph, const WeightStore& store,
                             bool strict = true) {
  const auto params = graph.parameters();
  for (const ParamSpec& p : params) {
    const Tensor& t = store.get(p.name);
    if (t.shape() != p.shape) {
      throw BindingError("parameter '" + p.name + "' has shape " +
                         to_string(t.shape()) + ", expected " +
                         to_string(p.shape));
    }
  }
  if (strict && store.size() != params.size()) {
    std::map<std::string, bool> known;
    for (const ParamSpec& p : params) known[p.name] = true;
    for (const auto& [name, tensor] : store) {
      if (!known.count(name)) {
        throw BindingError("unused parameter '" + name + "'");
      }
    }
  }
}

// Per-parameter seed: golden-ratio stride over the manifest index.
inline std::uint64_t parameter_seed(std::uint64_t seed, std::size_t index) {
  return seed * 0x9E3779B97F4A7C15ull + index;
}

// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); batch norm set to
// the identity (gamma 1, beta 0, mean 0, var 1).
inline WeightStore random_init(const Graph& graph, std::uint64_t seed) {
  WeightStore store;
  const auto params = graph.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamSpec& p = params[i];
    switch (p.role) {
      case ParamRole::kWeight:
      case ParamRole::kBias: {
        const float bound = 1.0f / std::sqrt(static_cast<float>(p.fan_in));
        store.set(p.name, seeded_fill(p.shape, parameter_seed(seed, i),
                                      Uniform{bound}));
        break;
      }
      case ParamRole::kBnGamma:
      case ParamRole::kBnVar:
        store.set(p.name, Tensor(p.shape, 1.0f));
        break;
      case ParamRole::kBnBeta:
      case ParamRole::kBnMean:
        store.set(p.name, Tensor(p.shape, 0.0f));
        break;
    }
  }
  return store;
}

// Every weight set to `weight`, biases zero, batch norm identity with
// epsilon absorbed (var = 1 - eps) so it is exactly the identity map.
inline WeightStore constant_init(const Graph& graph, float weight) {
  WeightStore store;
  for (const ParamSpec& p : graph.parameters()) {
    float v = 0.0f;
    switch (p.role) {
      case ParamRole::kWeight: v = weight; break;
      case ParamRole::kBias: v = 0.0f; break;
      case ParamRole::kBnGamma: v = 1.0f; break;
      case ParamRole::kBnBeta: v = 0.0f; break;
      case ParamRole::kBnMean: v = 0.0f; break;
      case ParamRole::kBnVar: v = 1.0f - kernels::kBatchNormEpsilon; break;
    }
    store.set(p.name, Tensor(p.shape, v));
  }
  return store;
}

// Replaces batch norm statistics with random but well-conditioned values.
inline void randomize_batchnorm(const Graph& graph, WeightStore& store,
                                std::uint64_t seed) {
  const auto params = graph.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamSpec& p = params[i];
    const std::uint64_t s = parameter_seed(seed ^ 0xB7E151628AED2A6Bull, i);
    switch (p.role) {
      case ParamRole::kBnGamma:
      case ParamRole::kBnVar: {
        Tensor t = seeded_fill(p.shape, s, Uniform{0.5f});
        for (float& v : t.data()) v += 1.0f;  // [0.5, 1.5)
        store.set(p.name, std::move(t));
        break;
      }
      case ParamRole::kBnBeta:
      case ParamRole::kBnMean:
        store.set(p.name, seeded_fill(p.shape, s, Uniform{0.5f}));
        break;
      default:
        break;
    }
  }
}

// One "name shape" line per parameter, in manifest order.
inline std::string weight_manifest(const Graph& graph) {
  std::ostringstream os;
  for (const ParamSpec& p : graph.parameters()) {
    os << p.name << ' ' << p.shape.n << 'x' << p.shape.c << 'x' << p.shape.h
       << 'x' << p.shape.w << '\n';
  }
  return os.str();
}

}  // namespace lbnseg

#endif  // LBNSEG_WEIGHTS_HPP_
