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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/kernels/activation.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/kernels/gemm.hpp"
#include "lbnseg/kernels/linear.hpp"
#include "lbnseg/kernels/pooling.hpp"
#include "lbnseg/kernels/resize.hpp"
#include "lbnseg/verify.hpp"
#include "oracles.hpp"

namespace lbnseg::kernels {
namespace {

std::vector<float> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

// ---- gemm ----

TEST(Gemm, MatchesTripleLoop) {
  for (auto [m, n, k] : {std::tuple{1, 1, 1}, {7, 19, 5}, {13, 40, 300}, {97, 33, 257}}) {
    const Tensor a = seeded_fill({1, 1, m, k}, m * 31 + k, Uniform{1.0f});
    const Tensor b = seeded_fill({1, 1, k, n}, n * 17 + k, Uniform{1.0f});
    std::vector<float> c(static_cast<std::size_t>(m) * n, 123.0f);
    sgemm(m, n, k, a.data().data(), k, b.data().data(), n, c.data(), n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double ref = 0.0;
        for (int p = 0; p < k; ++p) ref += double(a.at(0, 0, i, p)) * b.at(0, 0, p, j);
        EXPECT_NEAR(c[i * n + j], ref, 1e-4 * (1 + std::abs(ref)));
      }
  }
}

// ---- conv ----

TEST(Conv, HandCountedOnes) {
  const Tensor x({1, 1, 3, 3}, 1.0f);
  const Tensor w({1, 1, 3, 3}, 1.0f);
  const ConvSpec spec = ConvSpec::same(1, 1, 3);
  for (ConvPath path : {ConvPath::kNaive, ConvPath::kOptimized}) {
    const Tensor y = conv2d(x, w, {}, spec, path);
    EXPECT_EQ(values(y), (std::vector<float>{4, 6, 4, 6, 9, 6, 4, 6, 4}));
  }
}

TEST(Conv, PointwiseUnitIsIdentityAtAnyRate) {
  const Tensor x = seeded_fill({1, 1, 6, 7}, 2, Uniform{1.0f});
  const Tensor w({1, 1, 1, 1}, 1.0f);
  for (int d : {1, 2, 16}) {
    const ConvSpec spec{1, d, 1, 0, 1, 1, 1};
    EXPECT_EQ(conv2d(x, w, {}, spec, ConvPath::kNaive), x);
    EXPECT_EQ(conv2d(x, w, {}, spec, ConvPath::kOptimized), x);
  }
}

TEST(Conv, FirstBackboneLayerShape) {
  const ConvSpec spec{3, 1, 2, 1, 1, 3, 32};
  EXPECT_EQ(spec.output_shape({1, 3, 448, 896}), (Shape{1, 32, 224, 448}));
}

TEST(Conv, RateTwoAgainstDilatedKernelOracle) {
  const Tensor x = seeded_fill({1, 4, 8, 8}, 10, Uniform{1.0f});
  const ConvSpec spec{3, 2, 1, 2, 1, 4, 5};
  const Tensor w = seeded_fill(spec.weight_shape(), 11, Uniform{1.0f});
  const Tensor ref = oracle::conv_dilated(x, w, {}, 1, 2, 2, 1);
  EXPECT_LE(oracle::abs_err(conv2d(x, w, {}, spec, ConvPath::kNaive), ref), 1e-5);
  EXPECT_LE(oracle::abs_err(conv2d(x, w, {}, spec, ConvPath::kOptimized), ref), 1e-5);
}

TEST(Conv, RandomizedAgainstDilatedKernelOracle) {
  std::mt19937 rng(7);
  for (int i = 0; i < 60; ++i) {
    const auto c = random_conv_case(rng);
    const Tensor x = seeded_fill(c.input, 100 + i, Uniform{1.0f});
    const Tensor w = seeded_fill(c.spec.weight_shape(), 200 + i, Uniform{1.0f});
    const Tensor b = seeded_fill({1, c.spec.out_channels, 1, 1}, 300 + i, Uniform{1.0f});
    const Tensor ref = oracle::conv_dilated(x, w, values(b), c.spec.stride, c.spec.rate,
                                            c.spec.pad, c.spec.groups);
    const Tensor naive = conv2d_naive(x, w, b.data(), c.spec);
    const Tensor opt = conv2d_optimized(x, w, b.data(), c.spec);
    ASSERT_EQ(naive.shape(), ref.shape());
    EXPECT_LE(oracle::rel_err(naive, ref), 1e-6) << "case " << i;
    EXPECT_LE(oracle::rel_err(opt, ref), 1e-5) << "case " << i;
  }
}

TEST(Conv, RateOneEqualsStandardConvolutionExactly) {
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    auto c = random_conv_case(rng);
    c.spec.rate = 1;
    c.spec.pad = std::min(c.spec.pad, c.spec.kernel / 2);
    const Tensor x = oracle::dyadic(seeded_fill(c.input, 400 + i, Uniform{1.0f}));
    const Tensor w = oracle::dyadic(seeded_fill(c.spec.weight_shape(), 500 + i, Uniform{1.0f}));
    const Tensor ref = oracle::conv_scatter(x, w, {}, c.spec.stride, c.spec.pad,
                                            c.spec.groups);
    EXPECT_EQ(conv2d_naive(x, w, {}, c.spec), ref) << "case " << i;
  }
}

TEST(Conv, LinearInInput) {
  EXPECT_TRUE(check_linearity(5).passed);
}

TEST(Conv, TranslationCovariance) {
  // Shifting the input by one pixel (stride 1) shifts the interior output.
  const ConvSpec spec = ConvSpec::same(2, 3, 3, 2);
  const Tensor x = seeded_fill({1, 2, 20, 20}, 12, Uniform{1.0f});
  const Tensor w = seeded_fill(spec.weight_shape(), 13, Uniform{1.0f});
  Tensor shifted(x.shape());
  for (int c = 0; c < 2; ++c)
    for (int y = 1; y < 20; ++y)
      for (int xx = 1; xx < 20; ++xx) shifted.at(0, c, y, xx) = x.at(0, c, y - 1, xx - 1);
  const Tensor a = conv2d(x, w, {}, spec);
  const Tensor b = conv2d(shifted, w, {}, spec);
  for (int o = 0; o < 3; ++o)
    for (int y = 3; y < 16; ++y)
      for (int xx = 3; xx < 16; ++xx) EXPECT_EQ(b.at(0, o, y + 1, xx + 1), a.at(0, o, y, xx));
}

TEST(Conv, RejectsBadArguments) {
  const Tensor x({1, 4, 8, 8});
  EXPECT_THROW(conv2d(x, Tensor({2, 4, 3, 3}), {}, ConvSpec::same(3, 2, 3)), ShapeError);
  EXPECT_THROW(conv2d(x, Tensor({2, 4, 3, 3}), std::vector<float>(3), ConvSpec::same(4, 2, 3)),
               ShapeError);
  EXPECT_THROW(ConvSpec::same(4, 6, 3, 1, 1, 4).validate(), ShapeError);
  const ConvSpec huge{3, 16, 1, 0, 1, 4, 2};
  EXPECT_THROW(conv2d(x, Tensor(huge.weight_shape()), {}, huge), ShapeError);
}

// ---- batch norm ----

TEST(BatchNorm, IdentityWithZeroEpsilon) {
  const Tensor x = seeded_fill({1, 3, 4, 4}, 1, Uniform{3.0f});
  auto p = BatchNormParams::identity(3);
  p.epsilon = 0.0f;
  EXPECT_EQ(batchnorm_inference(x, p), x);
}

TEST(BatchNorm, ChannelAtMeanGivesBeta) {
  auto p = BatchNormParams::identity(2);
  p.mean = {0.75f, -2.0f};
  p.beta = {0.25f, 1.5f};
  p.gamma = {3.0f, -1.0f};
  p.var = {2.0f, 0.5f};
  Tensor x({1, 2, 3, 3});
  for (int y = 0; y < 3; ++y)
    for (int xx = 0; xx < 3; ++xx) {
      x.at(0, 0, y, xx) = 0.75f;
      x.at(0, 1, y, xx) = -2.0f;
    }
  const Tensor out = batchnorm_inference(x, p);
  for (int y = 0; y < 3; ++y)
    for (int xx = 0; xx < 3; ++xx) {
      EXPECT_EQ(out.at(0, 0, y, xx), 0.25f);
      EXPECT_EQ(out.at(0, 1, y, xx), 1.5f);
    }
}

TEST(BatchNorm, MatchesScalarOracle) {
  const Tensor x = seeded_fill({2, 5, 6, 7}, 21, Uniform{3.0f});
  const Tensor g = seeded_fill({1, 5, 1, 1}, 22, Uniform{2.0f});
  const Tensor b = seeded_fill({1, 5, 1, 1}, 23, Uniform{2.0f});
  const Tensor m = seeded_fill({1, 5, 1, 1}, 24, Uniform{2.0f});
  BatchNormParams p{values(g), values(b), values(m), std::vector<float>(5), 1e-3f};
  for (int c = 0; c < 5; ++c) p.var[c] = 0.1f + c * 0.7f;
  const Tensor out = batchnorm_inference(x, p);
  Tensor ref(x.shape());
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 5; ++c)
      for (int y = 0; y < 6; ++y)
        for (int xx = 0; xx < 7; ++xx)
          ref.at(n, c, y, xx) = oracle::bn_scalar(x.at(n, c, y, xx), p.gamma[c], p.beta[c],
                                                  p.mean[c], p.var[c], p.epsilon);
  EXPECT_LE(oracle::rel_err(out, ref), 1e-6);
}

TEST(BatchNorm, RejectsInvalidStatistics) {
  const Tensor x({1, 2, 2, 2});
  auto p = BatchNormParams::identity(2);
  p.var[1] = -1.0f;
  EXPECT_THROW(batchnorm_inference(x, p), ShapeError);
  auto q = BatchNormParams::identity(3);
  EXPECT_THROW(batchnorm_inference(x, q), ShapeError);
  auto r = BatchNormParams::identity(2);
  r.var = {0.0f, 1.0f};
  r.epsilon = 0.0f;
  EXPECT_THROW(batchnorm_inference(x, r), ShapeError);
}

TEST(FoldBatchNorm, NearIdentityStatistics) {
  const Tensor w = seeded_fill({4, 3, 3, 3}, 30, Uniform{1.0f});
  const std::vector<float> bias{0.5f, -0.25f, 1.0f, 2.0f};
  auto p = BatchNormParams::identity(4);
  p.var.assign(4, 1.0f - p.epsilon);
  const FoldedConv f = fold_batchnorm(w, bias, p);
  EXPECT_LE(oracle::rel_err(f.weights, w), 1e-6);
  for (int o = 0; o < 4; ++o) EXPECT_NEAR(f.bias[o], bias[o], 1e-6);
}

TEST(FoldBatchNorm, ZeroWeightsGiveShift) {
  auto p = BatchNormParams::identity(2);
  p.gamma = {2.0f, 0.5f};
  p.beta = {1.0f, -1.0f};
  p.mean = {3.0f, 4.0f};
  p.var = {3.0f, 0.25f};
  const FoldedConv f = fold_batchnorm(Tensor({2, 1, 1, 1}), {}, p);
  for (int c = 0; c < 2; ++c) {
    const double expect = p.beta[c] - p.gamma[c] * p.mean[c] / std::sqrt(p.var[c] + p.epsilon);
    EXPECT_NEAR(f.bias[c], expect, 1e-6);
  }
}

TEST(FoldBatchNorm, ConvThenBatchNormEquivalence) {
  const ConvSpec spec = ConvSpec::same(6, 8, 3, 2);
  for (int i = 0; i < 5; ++i) {
    const Tensor x = seeded_fill({1, 6, 11, 13}, 40 + i, Uniform{1.0f});
    const Tensor w = seeded_fill(spec.weight_shape(), 50 + i, Uniform{1.0f});
    const Tensor b = seeded_fill({1, 8, 1, 1}, 60 + i, Uniform{1.0f});
    BatchNormParams p{values(seeded_fill({1, 8, 1, 1}, 70 + i, Uniform{2.0f})),
                      values(seeded_fill({1, 8, 1, 1}, 71 + i, Uniform{2.0f})),
                      values(seeded_fill({1, 8, 1, 1}, 72 + i, Uniform{2.0f})),
                      std::vector<float>(8, 0.6f)};
    const Tensor ref = batchnorm_inference(conv2d(x, w, b.data(), spec), p);
    const FoldedConv f = fold_batchnorm(w, b.data(), p);
    EXPECT_LE(oracle::rel_err(conv2d(x, f.weights, f.bias, spec), ref), 1e-5);
  }
}

// ---- activations ----

TEST(Activation, PointValues) {
  const Activation relu6{ActivationKind::kRelu6};
  EXPECT_EQ(activate(7.0f, relu6), 6.0f);
  EXPECT_EQ(activate(-1.0f, relu6), 0.0f);
  EXPECT_EQ(activate(3.0f, relu6), 3.0f);
  EXPECT_FLOAT_EQ(activate(-2.0f, {ActivationKind::kLeakyRelu, 0.01f}), -0.02f);
  EXPECT_EQ(activate(0.0f, {ActivationKind::kSigmoid}), 0.5f);
  EXPECT_EQ(activate(-3.0f, {ActivationKind::kRelu}), 0.0f);
  EXPECT_EQ(activate(2.5f, {ActivationKind::kRelu}), 2.5f);
}

TEST(Activation, ElementwiseOverTensor) {
  const Tensor x = seeded_fill({1, 2, 3, 4}, 80, Uniform{8.0f});
  const Activation act{ActivationKind::kSigmoid};
  const Tensor y = activation(x, act);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_FLOAT_EQ(y.data()[i], 1.0f / (1.0f + std::exp(-x.data()[i])));
  }
}

// ---- pooling ----

TEST(Pool, AverageOfConstantIsConstant) {
  const Tensor x({1, 2, 7, 9}, 2.5f);
  for (PoolSpec spec : {PoolSpec{PoolKind::kAvg, 3, 1, 1}, PoolSpec{PoolKind::kAvg, 5, 2, 2},
                        PoolSpec{PoolKind::kAvg, 7, 1, 3}, PoolSpec{PoolKind::kAvg, 2, 2, 0}}) {
    const Tensor y = pool2d(x, spec);
    for (float v : y.data()) EXPECT_FLOAT_EQ(v, 2.5f);
  }
}

TEST(Pool, MaxFindsSinglePeak) {
  Tensor x({1, 1, 5, 5}, -1.0f);
  x.at(0, 0, 2, 3) = 5.0f;
  const Tensor y = pool2d(x, {PoolKind::kMax, 3, 1, 1});
  EXPECT_EQ(y.at(0, 0, 2, 2), 5.0f);
  EXPECT_EQ(y.at(0, 0, 1, 4), 5.0f);
  EXPECT_EQ(y.at(0, 0, 0, 0), -1.0f);
}

TEST(Pool, AverageMatchesLoopOracle) {
  const Tensor x = seeded_fill({1, 2, 9, 9}, 90, Uniform{1.0f});
  EXPECT_LE(oracle::rel_err(pool2d(x, {PoolKind::kAvg, 3, 1, 1}),
                            oracle::avg_pool_scalar(x, 3, 1, 1)),
            1e-6);
  EXPECT_LE(oracle::rel_err(pool2d(x, {PoolKind::kAvg, 5, 2, 2}),
                            oracle::avg_pool_scalar(x, 5, 2, 2)),
            1e-6);
}

TEST(GlobalAvgPool, Values) {
  EXPECT_FLOAT_EQ(global_avg_pool(Tensor({1, 1, 3, 5}, -4.0f)).at(0, 0, 0, 0), -4.0f);
  const Tensor x({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  EXPECT_EQ(global_avg_pool(x).at(0, 0, 0, 0), 2.5f);
  const Tensor r = seeded_fill({2, 3, 17, 23}, 91, Uniform{5.0f});
  EXPECT_LE(oracle::rel_err(global_avg_pool(r), oracle::gap_scalar(r)), 1e-6);
}

// ---- bilinear resize ----

TEST(Resize, SameSizeAndConstant) {
  const Tensor x = seeded_fill({1, 2, 5, 6}, 95, Uniform{1.0f});
  EXPECT_EQ(bilinear_resize(x, 5, 6), x);
  const Tensor c({1, 1, 3, 4}, 0.375f);
  for (auto [h, w] : {std::pair{7, 9}, {1, 1}, {24, 32}, {2, 3}}) {
    const Tensor y = bilinear_resize(c, h, w);
    for (float v : y.data()) EXPECT_FLOAT_EQ(v, 0.375f);
  }
}

TEST(Resize, FrozenTwoByTwoUpsample) {
  // Half-pixel centres: source coordinate (o + 0.5) * 2/4 - 0.5, clamped,
  // gives {0, .25, .75, 1} on both axes; value = 2*sy + sx.
  const Tensor x({1, 1, 2, 2}, std::vector<float>{0, 1, 2, 3});
  const std::vector<float> expect{0.0f, 0.25f, 0.75f, 1.0f,  0.5f, 0.75f, 1.25f, 1.5f,
                                  1.5f, 1.75f, 2.25f, 2.5f,  2.0f, 2.25f, 2.75f, 3.0f};
  EXPECT_EQ(values(bilinear_resize(x, 4, 4)), expect);
}

TEST(Resize, MatchesFormulaOracle) {
  const Tensor x = seeded_fill({1, 3, 7, 5}, 96, Uniform{1.0f});
  for (auto [h, w] : {std::pair{28, 20}, {3, 11}, {56, 40}}) {
    EXPECT_LE(oracle::abs_err(bilinear_resize(x, h, w), oracle::bilinear_scalar(x, h, w)),
              1e-6);
  }
}

// ---- linear ----

TEST(Linear, IdentityAndZeroInput) {
  Tensor eye({3, 3, 1, 1});
  for (int i = 0; i < 3; ++i) eye.at(i, i, 0, 0) = 1.0f;
  const std::vector<float> x{0.5f, -1.0f, 2.0f};
  EXPECT_EQ(linear(x, eye, std::vector<float>(3, 0.0f)), x);
  const std::vector<float> b{1.0f, 2.0f};
  EXPECT_EQ(linear(std::vector<float>(3, 0.0f), Tensor({2, 3, 1, 1}, 4.0f), b), b);
}

TEST(Linear, MatchesDotProducts) {
  const Tensor w = seeded_fill({7, 11, 1, 1}, 97, Uniform{1.0f});
  const Tensor xb = seeded_fill({1, 11, 1, 1}, 98, Uniform{1.0f});
  const std::vector<float> b = values(seeded_fill({1, 7, 1, 1}, 99, Uniform{1.0f}));
  const auto out = linear(xb.data(), w, b);
  for (int o = 0; o < 7; ++o) {
    double ref = b[o];
    for (int i = 0; i < 11; ++i) ref += double(w.at(o, i, 0, 0)) * xb.at(0, i, 0, 0);
    EXPECT_NEAR(out[o], ref, 1e-6 * (1 + std::abs(ref)));
  }
  EXPECT_THROW(linear(std::vector<float>(10), w, b), ShapeError);
}

}  // namespace
}  // namespace lbnseg::kernels
