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

// Cache-blocked single-precision matrix multiply used by the optimized
// convolution path. Row-major operands; C = A * B (C is overwritten).

#ifndef LBNSEG_KERNELS_GEMM_HPP_
#define LBNSEG_KERNELS_GEMM_HPP_

#include <algorithm>
#include <cstddef>
#include <vector>

namespace lbnseg::kernels {
namespace detail {

inline constexpr int kMr = 6;
inline constexpr int kNr = 16;
inline constexpr int kKc = 256;
inline constexpr int kMc = 96;
inline constexpr int kNc = 2048;

// Packs an mc x kc block of A into kMr-row slivers, zero-padding the tail.
inline void pack_a(const float* a, int lda, int mc, int kc, float* buf) {
  for (int ir = 0; ir < mc; ir += kMr) {
    const int rows = std::min(kMr, mc - ir);
    for (int p = 0; p < kc; ++p) {
      for (int i = 0; i < rows; ++i) {
        buf[i] = a[static_cast<std::size_t>(ir + i) * lda + p];
      }
      for (int i = rows; i < kMr; ++i) buf[i] = 0.0f;
      buf += kMr;
    }
  }
}

// Packs a kc x nc block of B into kNr-column slivers.
inline void pack_b(const float* b, int ldb, int kc, int nc, float* buf) {
  for (int jr = 0; jr < nc; jr += kNr) {
    const int cols = std::min(kNr, nc - jr);
    for (int p = 0; p < kc; ++p) {
      const float* src = b + static_cast<std::size_t>(p) * ldb + jr;
      if (cols == kNr) {
        for (int j = 0; j < kNr; ++j) buf[j] = src[j];
      } else {
        for (int j = 0; j < cols; ++j) buf[j] = src[j];
        for (int j = cols; j < kNr; ++j) buf[j] = 0.0f;
      }
      buf += kNr;
    }
  }
}

// 8-lane float vector; GCC and Clang lower this to SSE/AVX registers.
typedef float Vec8 __attribute__((vector_size(32), aligned(4)));

inline void micro_kernel(int kc, const float* __restrict a,
                         const float* __restrict b, float* c, int ldc,
                         int rows, int cols, bool accumulate) {
  static_assert(kMr == 6 && kNr == 16);
  Vec8 c00{}, c01{}, c10{}, c11{}, c20{}, c21{};
  Vec8 c30{}, c31{}, c40{}, c41{}, c50{}, c51{};
  for (int p = 0; p < kc; ++p) {
    Vec8 b0, b1;
    __builtin_memcpy(&b0, b + p * kNr, sizeof(Vec8));
    __builtin_memcpy(&b1, b + p * kNr + 8, sizeof(Vec8));
    const float* ap = a + p * kMr;
    c00 += ap[0] * b0; c01 += ap[0] * b1;
    c10 += ap[1] * b0; c11 += ap[1] * b1;
    c20 += ap[2] * b0; c21 += ap[2] * b1;
    c30 += ap[3] * b0; c31 += ap[3] * b1;
    c40 += ap[4] * b0; c41 += ap[4] * b1;
    c50 += ap[5] * b0; c51 += ap[5] * b1;
  }
  alignas(32) float acc[kMr][kNr];
  __builtin_memcpy(&acc[0][0], &c00, 32); __builtin_memcpy(&acc[0][8], &c01, 32);
  __builtin_memcpy(&acc[1][0], &c10, 32); __builtin_memcpy(&acc[1][8], &c11, 32);
  __builtin_memcpy(&acc[2][0], &c20, 32); __builtin_memcpy(&acc[2][8], &c21, 32);
  __builtin_memcpy(&acc[3][0], &c30, 32); __builtin_memcpy(&acc[3][8], &c31, 32);
  __builtin_memcpy(&acc[4][0], &c40, 32); __builtin_memcpy(&acc[4][8], &c41, 32);
  __builtin_memcpy(&acc[5][0], &c50, 32); __builtin_memcpy(&acc[5][8], &c51, 32);
  for (int i = 0; i < rows; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * ldc;
    if (accumulate) {
      for (int j = 0; j < cols; ++j) crow[j] += acc[i][j];
    } else {
      for (int j = 0; j < cols; ++j) crow[j] = acc[i][j];
    }
  }
}

}  // namespace detail

// C[m x n] = A[m x k] * B[k x n].
inline void sgemm(int m, int n, int k, const float* a, int lda,
                  const float* b, int ldb, float* c, int ldc) {
  using namespace detail;
  std::vector<float> packed_a(static_cast<std::size_t>(kMc) * kKc);
  std::vector<float> packed_b(static_cast<std::size_t>(kKc) *
                              ((kNc + kNr - 1) / kNr * kNr));
  for (int jc = 0; jc < n; jc += kNc) {
    const int nc = std::min(kNc, n - jc);
    for (int pc = 0; pc < k; pc += kKc) {
      const int kc = std::min(kKc, k - pc);
      pack_b(b + static_cast<std::size_t>(pc) * ldb + jc, ldb, kc, nc,
             packed_b.data());
      for (int ic = 0; ic < m; ic += kMc) {
        const int mc = std::min(kMc, m - ic);
        pack_a(a + static_cast<std::size_t>(ic) * lda + pc, lda, mc, kc,
               packed_a.data());
        for (int jr = 0; jr < nc; jr += kNr) {
          const int cols = std::min(kNr, nc - jr);
          const float* bp = packed_b.data() + static_cast<std::size_t>(jr) * kc;
          for (int ir = 0; ir < mc; ir += kMr) {
            const int rows = std::min(kMr, mc - ir);
            micro_kernel(kc, packed_a.data() + static_cast<std::size_t>(ir) * kc,
                         bp, c + static_cast<std::size_t>(ic + ir) * ldc + jc + jr,
                         ldc, rows, cols, pc > 0);
          }
        }
      }
    }
  }
}

}  // namespace lbnseg::kernels

#endif  // LBNSEG_KERNELS_GEMM_HPP_
