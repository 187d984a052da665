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

#ifndef LBNSEG_ANALYSIS_GRIDDING_HPP_
#define LBNSEG_ANALYSIS_GRIDDING_HPP_

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lbnseg/error.hpp"

namespace lbnseg::analysis {

// One stride-1 square kernel in a stacked atrous sequence.
struct KernelRate {
  int kernel = 3;
  int rate = 1;
};

inline void check_stack(std::span<const KernelRate> stack) {
  for (const KernelRate& kr : stack) {
    if (kr.kernel < 1 || kr.kernel % 2 == 0 || kr.rate < 1) {
      throw Error(ErrorKind::kUsage, "gridding stack needs odd kernels and rates >= 1");
    }
  }
}

// Offsets (along one axis) sampled by the stack, relative to the output
// position: the Minkowski sum of each layer's tap set {-r*d, ..., r*d}.
inline std::set<int> offset_set_1d(std::span<const KernelRate> stack) {
  check_stack(stack);
  std::set<int> offsets{0};
  for (const KernelRate& kr : stack) {
    const int r = (kr.kernel - 1) / 2;
    std::set<int> next;
    for (int o : offsets) {
      for (int t = -r; t <= r; ++t) next.insert(o + t * kr.rate);
    }
    offsets = std::move(next);
  }
  return offsets;
}

// 2-D offsets; square kernels make this the product of the axis sets.
inline std::set<std::pair<int, int>> offset_set(
    std::span<const KernelRate> stack) {
  const auto axis = offset_set_1d(stack);
  std::set<std::pair<int, int>> out;
  for (int dy : axis) {
    for (int dx : axis) out.emplace(dy, dx);
  }
  return out;
}

inline long stack_receptive_field(std::span<const KernelRate> stack) {
  long rf = 1;
  for (const KernelRate& kr : stack) rf += static_cast<long>(kr.kernel - 1) * kr.rate;
  return rf;
}

// Fraction of the stack's receptive-field window that is actually sampled.
inline double gridding_coverage(std::span<const KernelRate> stack) {
  const double touched = static_cast<double>(offset_set_1d(stack).size());
  const double window = static_cast<double>(stack_receptive_field(stack));
  return (touched * touched) / (window * window);
}

inline std::vector<KernelRate> rate_stack(std::span<const int> rates,
                                          int kernel = 3) {
  std::vector<KernelRate> stack;
  for (int r : rates) stack.push_back({kernel, r});
  return stack;
}

}  // namespace lbnseg::analysis

#endif  // LBNSEG_ANALYSIS_GRIDDING_HPP_
