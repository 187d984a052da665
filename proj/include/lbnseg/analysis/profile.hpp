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

#ifndef LBNSEG_ANALYSIS_PROFILE_HPP_
#define LBNSEG_ANALYSIS_PROFILE_HPP_

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "lbnseg/analysis/report.hpp"
#include "lbnseg/error.hpp"
#include "lbnseg/executor.hpp"
#include "lbnseg/kernels/conv.hpp"

namespace lbnseg::analysis {

inline std::string path_name(kernels::ConvPath path) {
  return path == kernels::ConvPath::kNaive ? "naive" : "optimized";
}

// Wall-clock statistics of `repeats` forward passes after one untimed
// warm-up. Single-threaded: branch parallelism is disabled while timing.
inline TimingEntry profile_forward(const Graph& graph,
                                   const WeightStore& weights,
                                   const Tensor& input, int repeats,
                                   kernels::ConvPath path,
                                   Tensor* last_output = nullptr) {
  if (repeats < 3) {
    throw Error(ErrorKind::kUsage, "profile_forward needs at least 3 repeats");
  }
  ExecOptions opts;
  opts.path = path;
  Tensor out = execute(graph, weights, input, opts).output();
  std::vector<double> ms;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out = execute(graph, weights, input, opts).output();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  double mean = 0.0;
  for (double v : ms) mean += v;
  mean /= repeats;
  double var = 0.0;
  for (double v : ms) var += (v - mean) * (v - mean);
  var /= repeats - 1;
  if (last_output) *last_output = std::move(out);
  return {path_name(path), mean, std::sqrt(var), repeats, 1};
}

}  // namespace lbnseg::analysis

#endif  // LBNSEG_ANALYSIS_PROFILE_HPP_
