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

#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"

namespace lbnseg {
namespace {

TEST(Shape, CountAndValidity) {
  EXPECT_EQ((Shape{1, 3, 4, 5}.count()), 60u);
  EXPECT_EQ((Shape{2, 3, 4, 5}.plane()), 20u);
  EXPECT_TRUE((Shape{1, 1, 1, 1}.valid()));
  EXPECT_FALSE((Shape{1, 0, 1, 1}.valid()));
  EXPECT_THROW(Tensor(Shape{1, -1, 2, 2}), ShapeError);
}

TEST(Tensor, ConstructionAndIndexing) {
  Tensor t({1, 2, 2, 3}, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  EXPECT_EQ(t.at(0, 1, 0, 0), 6.0f);
  EXPECT_EQ(t.at(0, 0, 1, 2), 5.0f);
  EXPECT_EQ(t.plane(0, 1)[0], 6.0f);
  EXPECT_THROW(Tensor({1, 1, 2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  Tensor z({1, 1, 2, 2});
  for (float v : z.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Concat, TableChannelWidths) {
  Tensor a({1, 64, 56, 112});
  Tensor b({1, 96, 56, 112});
  EXPECT_EQ(concat_channels(std::vector<Tensor>{a, b}).shape(), (Shape{1, 160, 56, 112}));
}

TEST(Concat, SingleInputIsIdentity) {
  const Tensor a = seeded_fill({2, 3, 4, 5}, 11, Uniform{1.0f});
  EXPECT_EQ(concat_channels(std::vector<Tensor>{a}), a);
}

TEST(Concat, BlockPlacement) {
  const Tensor ones({1, 2, 2, 2}, 1.0f);
  const Tensor twos({1, 1, 2, 2}, 2.0f);
  const Tensor out = concat_channels(std::vector<Tensor>{ones, twos});
  ASSERT_EQ(out.shape(), (Shape{1, 3, 2, 2}));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) EXPECT_EQ(out.at(0, c, y, x), c < 2 ? 1.0f : 2.0f);
}

TEST(Concat, BatchedPlacementMatchesLoop) {
  const Tensor a = seeded_fill({2, 2, 3, 3}, 1, Uniform{1.0f});
  const Tensor b = seeded_fill({2, 3, 3, 3}, 2, Uniform{1.0f});
  const Tensor out = concat_channels(std::vector<Tensor>{a, b});
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 5; ++c)
      for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
          EXPECT_EQ(out.at(n, c, y, x), c < 2 ? a.at(n, c, y, x) : b.at(n, c - 2, y, x));
}

TEST(Concat, MismatchNamesOffendingInput) {
  const Tensor a({1, 2, 4, 4});
  const Tensor b({1, 2, 4, 4});
  const Tensor c({1, 2, 4, 5});
  try {
    concat_channels(std::vector<Tensor>{a, b, c});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(concat_channels(std::vector<Tensor>{}), ShapeError);
}

TEST(Slice, InvertsConcat) {
  const Tensor a = seeded_fill({1, 2, 3, 3}, 5, Uniform{1.0f});
  const Tensor b = seeded_fill({1, 4, 3, 3}, 6, Uniform{1.0f});
  const Tensor cat = concat_channels(std::vector<Tensor>{a, b});
  EXPECT_EQ(slice_channels(cat, 0, 2), a);
  EXPECT_EQ(slice_channels(cat, 2, 4), b);
  EXPECT_THROW(slice_channels(cat, 5, 2), ShapeError);
}

TEST(Add, Identities) {
  const Tensor a = seeded_fill({1, 3, 5, 7}, 3, Uniform{4.0f});
  EXPECT_EQ(elementwise_add(a, Tensor(a.shape())), a);
  const Tensor twice = elementwise_add(a, a);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(twice.data()[i], 2 * a.data()[i]);
}

TEST(Add, MatchesLoopOracle) {
  const Tensor a = seeded_fill({2, 3, 5, 7}, 8, Uniform{4.0f});
  const Tensor b = seeded_fill({2, 3, 5, 7}, 9, Uniform{4.0f});
  const Tensor s = elementwise_add(a, b);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x)
          EXPECT_EQ(s.at(n, c, y, x), a.at(n, c, y, x) + b.at(n, c, y, x));
  EXPECT_THROW(elementwise_add(a, Tensor({2, 3, 5, 6})), ShapeError);
}

TEST(ScaleChannels, OnesZerosAndOracle) {
  const Tensor x = seeded_fill({2, 3, 4, 4}, 4, Uniform{1.0f});
  EXPECT_EQ(scale_channels(x, std::vector<float>(3, 1.0f)), x);
  EXPECT_EQ(scale_channels(x, std::vector<float>(3, 0.0f)), Tensor(x.shape()));
  const std::vector<float> w{0.5f, -2.0f, 3.25f};
  const Tensor s = scale_channels(x, w);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 4; ++y)
        for (int xx = 0; xx < 4; ++xx) EXPECT_EQ(s.at(n, c, y, xx), w[c] * x.at(n, c, y, xx));
  EXPECT_THROW(scale_channels(x, std::vector<float>(2, 1.0f)), ShapeError);
}

TEST(SeededFill, ConstantAndDeterminism) {
  const Tensor z = seeded_fill({1, 2, 3, 3}, 99, Constant{0.0f});
  EXPECT_EQ(z, Tensor(z.shape()));
  const Tensor a = seeded_fill({1, 4, 8, 8}, 42, Uniform{1.0f});
  const Tensor b = seeded_fill({1, 4, 8, 8}, 42, Uniform{1.0f});
  const Tensor c = seeded_fill({1, 4, 8, 8}, 43, Uniform{1.0f});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (float v : a.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LT(v, 1.0f);
  }
}

}  // namespace
}  // namespace lbnseg
