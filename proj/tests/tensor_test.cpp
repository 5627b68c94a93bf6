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

#include "pirm/tensor.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "reference_ops.hpp"

namespace pirm {
namespace {

TEST(TensorCreate, FillsEveryElement) {
  const Tensor z = tensor_create(1, 1, 2, 2, 0.0f);
  EXPECT_EQ(z.size(), 4u);
  for (float v : z) EXPECT_EQ(v, 0.0f);

  const Tensor hd = tensor_create(1, 3, 720, 1280, 1.0f);
  EXPECT_EQ(hd.size(), 2764800u);
  for (float v : hd) ASSERT_EQ(v, 1.0f);

  const Tensor one = tensor_create(1, 1, 1, 1, 7.5f);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.at(0, 0, 0, 0), 7.5f);
}

TEST(TensorCreate, RejectsBadDimensions) {
  EXPECT_THROW(tensor_create(0, 1, 1, 1, 0.0f), SizeError);
  EXPECT_THROW(tensor_create(1, -3, 1, 1, 0.0f), SizeError);
  EXPECT_THROW(tensor_create(1 << 16, 1 << 16, 2, 1, 0.0f), SizeError);
  EXPECT_THROW(tensor_create(1, 1, std::int64_t{1} << 62, std::int64_t{1} << 62, 0.0f),
               SizeError);
}

TEST(Tensor, RejectsDataLengthMismatch) {
  EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
}

TEST(Tensor, CanonicalLayoutMatchesIteration) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> d(1, 5);
    const Shape s{d(rng), d(rng), d(rng), d(rng)};
    const Tensor t = testing::random_tensor(rng, s);
    auto it = t.begin();
    for (std::int64_t b = 0; b < s.n; ++b)
      for (std::int64_t c = 0; c < s.c; ++c)
        for (std::int64_t y = 0; y < s.h; ++y)
          for (std::int64_t x = 0; x < s.w; ++x, ++it) {
            ASSERT_EQ(t.index(b, c, y, x),
                      static_cast<std::size_t>(((b * s.c + c) * s.h + y) * s.w + x));
            ASSERT_EQ(t.at(b, c, y, x), *it);
          }
    const auto p = t.plane(s.n - 1, s.c - 1);
    EXPECT_EQ(p.front(), t.at(s.n - 1, s.c - 1, 0, 0));
    EXPECT_EQ(p.size(), static_cast<std::size_t>(s.h * s.w));
  }
}

TEST(ImageToTensor, UnitAndRawPolicies) {
  const ImageU8 px(1, 1, std::vector<std::uint8_t>{255, 0, 128});
  const Tensor unit = image_to_tensor(px, ValueScale::unit);
  EXPECT_EQ(unit.shape(), (Shape{1, 3, 1, 1}));
  EXPECT_EQ(unit.at(0, 0, 0, 0), 1.0f);
  EXPECT_EQ(unit.at(0, 1, 0, 0), 0.0f);
  EXPECT_EQ(unit.at(0, 2, 0, 0), 128.0f / 255.0f);

  const Tensor raw = image_to_tensor(px, ValueScale::raw);
  EXPECT_EQ(raw.at(0, 0, 0, 0), 255.0f);
  EXPECT_EQ(raw.at(0, 1, 0, 0), 0.0f);
  EXPECT_EQ(raw.at(0, 2, 0, 0), 128.0f);

  const Tensor gray = image_to_tensor(ImageU8(2, 2, std::uint8_t{100}), ValueScale::unit);
  for (float v : gray) EXPECT_EQ(v, 100.0f / 255.0f);
}

TEST(TensorToImage, ClampsAndRoundsHalfAway) {
  auto one_value = [](float v) {
    return tensor_to_image(Tensor(Shape{1, 3, 1, 1}, {v, v, v}), ValueScale::unit).at(0, 0, 0);
  };
  EXPECT_EQ(one_value(1.2f), 255);
  EXPECT_EQ(one_value(-0.3f), 0);
  EXPECT_EQ(one_value(0.5f), 128);
  EXPECT_EQ(one_value(std::nanf("")), 0);

  EXPECT_EQ(quantize_u8(2.5f), 3);
  EXPECT_EQ(quantize_u8(2.49f), 2);
  EXPECT_EQ(quantize_u8(-0.5f), 0);
  EXPECT_EQ(quantize_u8(254.5), 255);
}

TEST(TensorToImage, RejectsWrongShape) {
  EXPECT_THROW(tensor_to_image(tensor_create(1, 1, 2, 2, 0.0f), ValueScale::unit), ShapeError);
  EXPECT_THROW(tensor_to_image(tensor_create(2, 3, 2, 2, 0.0f), ValueScale::unit), ShapeError);
}

TEST(ImageTensorRoundtrip, IdentityOnAllByteValues) {
  std::mt19937 rng(11);
  std::vector<ImageU8> cases{ImageU8(3, 5, std::uint8_t{0}), ImageU8(4, 2, std::uint8_t{255})};
  // Every byte value appears in every channel.
  std::vector<std::uint8_t> ramp(256 * 3);
  for (int i = 0; i < 256; ++i)
    for (int c = 0; c < 3; ++c) ramp[static_cast<std::size_t>(i * 3 + c)] = static_cast<std::uint8_t>(i);
  cases.emplace_back(16, 16, ramp);
  for (int k = 0; k < 20; ++k) {
    std::uniform_int_distribution<int> dim(1, 17), byte(0, 255);
    const int h = dim(rng), w = dim(rng);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(h * w * 3));
    for (auto& v : px) v = static_cast<std::uint8_t>(byte(rng));
    cases.emplace_back(h, w, px);
  }
  for (const ImageU8& img : cases) {
    for (ValueScale s : {ValueScale::unit, ValueScale::raw}) {
      EXPECT_EQ(tensor_to_image(image_to_tensor(img, s), s), img);
    }
  }
}

TEST(EltwiseAdd, Arithmetic) {
  const Tensor a(Shape{1, 1, 1, 2}, {1.0f, 2.0f});
  const Tensor b(Shape{1, 1, 1, 2}, {3.0f, 4.0f});
  EXPECT_EQ(eltwise_add(a, b), Tensor(Shape{1, 1, 1, 2}, {4.0f, 6.0f}));
  EXPECT_EQ(eltwise_add(a, tensor_create(1, 1, 1, 2, 0.0f)), a);
  EXPECT_EQ(eltwise_add(a, Tensor(Shape{1, 1, 1, 2}, {-1.0f, -2.0f})),
            tensor_create(1, 1, 1, 2, 0.0f));
  EXPECT_THROW(eltwise_add(a, tensor_create(1, 1, 2, 1, 0.0f)), ShapeError);
}

TEST(EltwiseAdd, CommutativeAssociativeOnIntegers) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(-(1 << 20), 1 << 20);
  auto ints = [&] {
    std::vector<float> v(60);
    for (float& x : v) x = static_cast<float>(d(rng));
    return Tensor(Shape{1, 3, 4, 5}, std::move(v));
  };
  for (int i = 0; i < 20; ++i) {
    const Tensor a = ints(), b = ints(), c = ints();
    EXPECT_EQ(eltwise_add(a, b), eltwise_add(b, a));
    EXPECT_EQ(eltwise_add(eltwise_add(a, b), c), eltwise_add(a, eltwise_add(b, c)));
  }
}

TEST(ConcatChannels, ShapeOrderAndSlice) {
  std::mt19937 rng(5);
  const Tensor a = testing::random_tensor(rng, Shape{2, 2, 3, 4});
  const Tensor b = testing::random_tensor(rng, Shape{2, 3, 3, 4});
  const std::vector<Tensor> parts{a, b};
  const Tensor cat = concat_channels(std::span<const Tensor>(parts));
  EXPECT_EQ(cat.shape(), (Shape{2, 5, 3, 4}));
  EXPECT_EQ(slice_channels(cat, 0, 2), a);
  EXPECT_EQ(slice_channels(cat, 2, 3), b);

  const std::vector<Tensor> single{a};
  EXPECT_EQ(concat_channels(std::span<const Tensor>(single)), a);

  const std::vector<Tensor> bad{a, testing::random_tensor(rng, Shape{2, 1, 3, 5})};
  EXPECT_THROW(concat_channels(std::span<const Tensor>(bad)), ShapeError);
  EXPECT_THROW(concat_channels(std::span<const Tensor>()), ShapeError);
  EXPECT_THROW(slice_channels(a, 1, 2), ShapeError);
}

}  // namespace
}  // namespace pirm
