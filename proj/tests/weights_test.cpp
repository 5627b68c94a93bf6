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

#include "pirm/weights.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <vector>

#include "pirm/zoo.hpp"

namespace pirm {
namespace {

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> v) {
  return std::vector<std::uint8_t>(v.begin(), v.end());
}

const std::vector<std::uint8_t> kMagic = bytes_of({0x50, 0x49, 0x52, 0x4D, 0x57, 0x31});

TEST(LoadWeights, EmptyStore) {
  auto b = kMagic;
  b.insert(b.end(), {0, 0, 0, 0});
  const WeightStore s = load_weights(b);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(serialize_weights(s), b);
}

TEST(LoadWeights, HandAssembledSingleTensor) {
  // name "a.weight", 4 dims of 1, value 2.0f (0x40000000 little-endian).
  auto b = kMagic;
  b.insert(b.end(), {1, 0, 0, 0, 8, 0});
  for (char ch : std::string("a.weight")) b.push_back(static_cast<std::uint8_t>(ch));
  b.push_back(4);
  for (int d = 0; d < 4; ++d) b.insert(b.end(), {1, 0, 0, 0});
  b.insert(b.end(), {0x00, 0x00, 0x00, 0x40});
  const WeightStore s = load_weights(b);
  ASSERT_EQ(s.size(), 1u);
  const WeightBlob* w = s.find("a.weight");
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->dims, (std::vector<std::uint32_t>{1, 1, 1, 1}));
  EXPECT_EQ(w->values, std::vector<float>{2.0f});
  EXPECT_EQ(serialize_weights(s), b);
}

TEST(LoadWeights, Rejections) {
  EXPECT_THROW(load_weights(bytes_of({'X', 'X', 'X', 'X', 'X', 'X', 0, 0, 0, 0})), FormatError);
  EXPECT_THROW(load_weights(bytes_of({0x50, 0x49})), FormatError);

  WeightStore s;
  s.insert_weight("c", tensor_create(2, 1, 3, 3, 0.5f));
  auto full = serialize_weights(s);
  auto truncated = full;
  truncated.pop_back();
  EXPECT_THROW(load_weights(truncated), FormatError);
  auto trailing = full;
  trailing.push_back(0);
  EXPECT_THROW(load_weights(trailing), FormatError);

  // Two copies of the same entry under a count of 2.
  auto dup = full;
  dup[6] = 2;
  dup.insert(dup.end(), full.begin() + 10, full.end());
  EXPECT_THROW(load_weights(dup), FormatError);

  EXPECT_THROW(s.insert_weight("c", tensor_create(1, 1, 1, 1, 0.0f)), FormatError);
  EXPECT_THROW(s.insert("bad", WeightBlob{{2, 2}, {1.0f}}), FormatError);
}

TEST(Weights, SerializeRoundtripForZooModels) {
  for (auto name : zoo::model_names()) {
    const GraphSpec g = zoo::build(name, zoo::ZooConfig{2, 8});
    const WeightStore w = zoo::init_weights(g, zoo::WeightFill::random, 42);
    const auto bytes = serialize_weights(w);
    EXPECT_EQ(load_weights(bytes), w) << name;
    EXPECT_EQ(serialize_weights(load_weights(bytes)), bytes) << name;
  }
}

TEST(Weights, FileRoundtripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "pirm_weights_test.pirmw").string();
  WeightStore s;
  s.insert_weight("x", tensor_create(1, 2, 3, 4, -1.25f));
  s.insert_bias("x", {0.5f});
  save_weights_file(s, path);
  EXPECT_EQ(load_weights_file(path), s);

  write_file_bytes(path, bytes_of({'n', 'o', 'p', 'e', '!', '!', 0, 0, 0, 0}));
  try {
    load_weights_file(path);
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
    EXPECT_EQ(std::string(e.what()).rfind("format error: ", 0), 0u);  // single prefix
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_weights_file(path), IoError);
  EXPECT_THROW(save_weights_file(s, (dir / "no-such-dir" / "w.pirmw").string()), IoError);
}

}  // namespace
}  // namespace pirm
