/* Copyright 2026 The pirm-bench Authors. All Rights Reserved.

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

#include "pirm/zoo.hpp"

#include <gtest/gtest.h>

#include <random>

#include "reference_ops.hpp"

namespace pirm::zoo {
namespace {

using pirm::testing::random_tensor;

const Shape kHd{1, 3, 720, 1280};

std::size_t count_ops(const GraphSpec& g, OpKind op) {
  return static_cast<std::size_t>(
      std::count_if(g.nodes.begin(), g.nodes.end(), [op](const Node& n) { return n.op == op; }));
}

TEST(Srcnn, Structure) {
  const GraphSpec g = build_srcnn();
  EXPECT_EQ(g.nodes.size(), 6u);
  EXPECT_EQ(count_ops(g, OpKind::conv), 3u);
  EXPECT_EQ(count_ops(g, OpKind::activate), 2u);
  EXPECT_EQ(std::get<ConvParams>(g.find("conv1")->params).kernel_h, 9);
  EXPECT_EQ(std::get<ConvParams>(g.find("conv1")->params).out_channels, 64);
  EXPECT_EQ(std::get<ConvParams>(g.find("conv2")->params).kernel_h, 1);
  EXPECT_EQ(std::get<ConvParams>(g.find("conv2")->params).out_channels, 32);
  EXPECT_EQ(std::get<ConvParams>(g.find("conv3")->params).kernel_h, 5);
  EXPECT_EQ(infer_shapes(g, kHd).at(g.output), kHd);
}

TEST(Srcnn, ZeroWeightsGiveZeroOutput) {
  std::mt19937 rng(1);
  const GraphSpec g = build_srcnn();
  const Tensor y = execute(g, init_weights(g, WeightFill::zero),
                           random_tensor(rng, Shape{1, 3, 20, 20}, 0.0f, 1.0f));
  for (float v : y) ASSERT_EQ(v, 0.0f);
}

TEST(Feqe, HdShapesAndQuarterResolutionTrunk) {
  const GraphSpec g = build_feqe();
  EXPECT_EQ(count_ops(g, OpKind::add), 21u);  // 20 residual blocks plus the global skip
  const ShapeMap s = infer_shapes(g, kHd);
  EXPECT_EQ(s.at(g.output), kHd);
  EXPECT_EQ(s.at("down2_conv"), (Shape{1, 16, 180, 320}));
  for (int i = 1; i <= 20; ++i) {
    const Shape b = s.at("block" + std::to_string(i) + "_add");
    EXPECT_EQ(b.h * b.w * 16, kHd.h * kHd.w);
  }
}

TEST(Feqe, ZeroWeightsReturnInput) {
  std::mt19937 rng(2);
  const GraphSpec g = build_feqe();
  const Tensor x = random_tensor(rng, Shape{1, 3, 32, 48}, 0.0f, 1.0f);
  EXPECT_EQ(execute(g, init_weights(g, WeightFill::zero, 0, x.shape()), x), x);
}

TEST(SuperSr, Structure) {
  const GraphSpec g = build_supersr();
  const ShapeMap s = infer_shapes(g, kHd);
  EXPECT_EQ(s.at(g.output), kHd);
  EXPECT_EQ(s.at("space_to_depth").c, 48);
  for (int i = 1; i <= 20; ++i) {
    const Node* act = g.find("block" + std::to_string(i) + "_prelu");
    ASSERT_NE(act, nullptr);
    EXPECT_EQ(std::get<Activation>(act->params).kind, Activation::Kind::prelu);
  }
  EXPECT_EQ(count_ops(g, OpKind::conv_transpose), 1u);
}

TEST(Dped, StructureAndTanhRange) {
  const GraphSpec g = build_dped_resnet();
  EXPECT_EQ(infer_shapes(g, kHd).at(g.output), kHd);
  EXPECT_EQ(count_ops(g, OpKind::add), static_cast<std::size_t>(kDpedResidualBlocks));
  std::mt19937 rng(3);
  const WeightStore w = init_weights(g, WeightFill::random, 5);
  const Tensor y = execute(g, w, random_tensor(rng, Shape{1, 3, 24, 24}, -5.0f, 5.0f));
  for (float v : y) {
    ASSERT_GE(v, -1.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Zoo, EveryModelRunsOnSmallRandomInput) {
  std::mt19937 rng(4);
  const Tensor x = random_tensor(rng, Shape{1, 3, 64, 64}, 0.0f, 1.0f);
  for (auto name : model_names()) {
    const GraphSpec g = parse_graph(serialize_graph(build(name)));
    const WeightStore w = init_weights(g, WeightFill::random, 9);
    const Tensor y = execute(g, w, x);
    EXPECT_EQ(y.shape(), x.shape()) << name;
    for (float v : y) ASSERT_TRUE(std::isfinite(v)) << name;
  }
}

TEST(Zoo, ConfigValidationAndNames) {
  EXPECT_THROW(build_feqe(ZooConfig{0, 16}), ValidationError);
  EXPECT_THROW(build_supersr(ZooConfig{2, 0}), ValidationError);
  EXPECT_THROW(build("fsrcnn"), ValidationError);
  EXPECT_EQ(build_feqe(ZooConfig{3, 8}).nodes.size(), build_feqe(ZooConfig{3, 8}).nodes.size());
  EXPECT_EQ(build_feqe(ZooConfig{3, 8, ValueScale::raw}).scale, ValueScale::raw);
}

TEST(Zoo, RandomWeightsAreSeededAndBounded) {
  const GraphSpec g = build_srcnn();
  const WeightStore a = init_weights(g, WeightFill::random, 7);
  EXPECT_EQ(a, init_weights(g, WeightFill::random, 7));
  EXPECT_NE(a, init_weights(g, WeightFill::random, 8));
  const float bound = 1.0f / std::sqrt(3.0f * 81.0f);
  for (float v : a.find("conv1.weight")->values) ASSERT_LE(std::abs(v), bound);
  for (float v : a.find("conv1.bias")->values) ASSERT_LE(std::abs(v), 0.01f);
}

}  // namespace
}  // namespace pirm::zoo
