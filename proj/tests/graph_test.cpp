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

#include "pirm/graph.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "pirm/zoo.hpp"
#include "reference_ops.hpp"

namespace pirm {
namespace {

using testing::random_tensor;

constexpr const char* kConvGraph = R"({
  "name": "one-conv",
  "input": {"channels": 3},
  "nodes": [
    {"id": "c", "op": "conv",
     "params": {"out_channels": 3, "kernel_h": 1, "kernel_w": 1}, "inputs": ["input"]},
    {"id": "out", "op": "output", "inputs": ["c"]}
  ],
  "output": "out"
})";

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

WeightStore identity_1x1(const std::string& id, std::int64_t c) {
  std::vector<float> w(static_cast<std::size_t>(c * c), 0.0f);
  for (std::int64_t i = 0; i < c; ++i) w[static_cast<std::size_t>(i * c + i)] = 1.0f;
  WeightStore s;
  s.insert_weight(id, Tensor(Shape{c, c, 1, 1}, w));
  return s;
}

TEST(ParseGraph, MinimalConvGraph) {
  const GraphSpec g = parse_graph(kConvGraph);
  EXPECT_EQ(g.name, "one-conv");
  EXPECT_EQ(g.input_channels, 3);
  EXPECT_EQ(g.scale, ValueScale::unit);
  ASSERT_EQ(g.nodes.size(), 2u);
  const auto& p = std::get<ConvParams>(g.find("c")->params);
  EXPECT_EQ(p.out_channels, 3);
  EXPECT_EQ(p.padding, Padding::same_zero);
  EXPECT_EQ(p.stride, 1);
  EXPECT_EQ(p.groups, 1);
}

TEST(ParseGraph, SerializeRoundtrip) {
  for (auto name : zoo::model_names()) {
    const GraphSpec g = zoo::build(name);
    EXPECT_EQ(parse_graph(serialize_graph(g)), g) << name;
  }
}

TEST(ParseGraph, AcceptsAnyNodeOrder) {
  const GraphSpec g = parse_graph(R"({"name": "r", "input": {"channels": 1},
    "nodes": [{"id": "out", "op": "output", "inputs": ["b"]},
              {"id": "b", "op": "activate", "params": {"kind": "relu"}, "inputs": ["a"]},
              {"id": "a", "op": "activate", "params": {"kind": "tanh"}, "inputs": ["input"]}],
    "output": "out"})");
  EXPECT_EQ(g.nodes[0].id, "a");
  EXPECT_EQ(g.nodes[1].id, "b");
  EXPECT_EQ(g.nodes[2].id, "out");
}

TEST(ParseGraph, Rejections) {
  auto graph_with = [](const std::string& nodes, const std::string& output = "out") {
    return R"({"name": "x", "input": {"channels": 1}, "nodes": [)" + nodes +
           R"(], "output": ")" + output + "\"}";
  };
  const std::string out_node = R"({"id": "out", "op": "output", "inputs": ["a"]})";

  EXPECT_NE(message_of([&] {
              parse_graph(graph_with(R"({"id": "a", "op": "activate", "params": {"kind": "relu"},
                                      "inputs": ["ghost"]},)" + out_node));
            }).find("ghost"),
            std::string::npos);
  EXPECT_NE(message_of([&] {
              parse_graph(graph_with(R"({"id": "a", "op": "activate", "params": {"kind": "relu"}, "inputs": ["input"]},
                                      {"id": "a", "op": "activate", "params": {"kind": "relu"}, "inputs": ["input"]},)" +
                                     out_node));
            }).find("duplicate"),
            std::string::npos);
  EXPECT_NE(message_of([&] {
              parse_graph(graph_with(R"({"id": "a", "op": "warp", "inputs": ["input"]},)" + out_node));
            }).find("unknown op"),
            std::string::npos);
  EXPECT_NE(message_of([&] {
              parse_graph(graph_with(R"({"id": "a", "op": "activate", "params": {"kind": "relu"}, "inputs": ["b"]},
                                      {"id": "b", "op": "activate", "params": {"kind": "relu"}, "inputs": ["a"]},)" +
                                     out_node));
            }).find("cycle"),
            std::string::npos);
  EXPECT_NE(message_of([&] {
              parse_graph(graph_with(R"({"id": "a", "op": "activate", "params": {"kind": "relu", "sloep": 1},
                                      "inputs": ["input"]},)" + out_node));
            }).find("sloep"),
            std::string::npos);
  EXPECT_THROW(parse_graph(graph_with(R"({"id": "a", "op": "activate", "params": {"kind": "relu"}, "inputs": ["input"]})", "a")),
               FormatError);  // no output node
  EXPECT_THROW(parse_graph(graph_with(out_node + R"(, {"id": "a", "op": "add", "inputs": ["input"]})")),
               FormatError);  // add arity
  EXPECT_THROW(parse_graph(graph_with(R"({"id": "input", "op": "activate", "params": {"kind": "relu"}, "inputs": ["input"]})")),
               FormatError);
  EXPECT_THROW(parse_graph("{ not json"), FormatError);
  EXPECT_THROW(parse_graph(R"({"name": "x", "input": {"channels": 1, "scale": "percent"}, "nodes": [], "output": "o"})"),
               FormatError);
}

TEST(InferShapes, ShapeRules) {
  const GraphSpec feqe = zoo::build_feqe();
  const ShapeMap hd = infer_shapes(feqe, Shape{1, 3, 720, 1280});
  EXPECT_EQ(hd.at(feqe.output), (Shape{1, 3, 720, 1280}));

  const GraphSpec un = parse_graph(R"({"name": "u", "input": {"channels": 3},
    "nodes": [{"id": "d", "op": "pixel_unshuffle", "params": {"factor": 4}, "inputs": ["input"]},
              {"id": "out", "op": "output", "inputs": ["d"]}], "output": "out"})");
  EXPECT_EQ(infer_shapes(un, Shape{1, 3, 720, 1280}).at("d"), (Shape{1, 48, 180, 320}));

  const GraphSpec bad = parse_graph(R"({"name": "b", "input": {"channels": 3},
    "nodes": [{"id": "d", "op": "pixel_unshuffle", "params": {"factor": 2}, "inputs": ["input"]},
              {"id": "sum", "op": "add", "inputs": ["d", "input"]},
              {"id": "out", "op": "output", "inputs": ["sum"]}], "output": "out"})");
  const std::string msg = message_of([&] { infer_shapes(bad, Shape{1, 3, 8, 8}); });
  EXPECT_NE(msg.find("'sum'"), std::string::npos) << msg;

  EXPECT_THROW(infer_shapes(parse_graph(kConvGraph), Shape{1, 4, 8, 8}), ShapeError);
}

TEST(Execute, IdentityConvAndInversePair) {
  std::mt19937 rng(1);
  const Tensor x = random_tensor(rng, Shape{1, 3, 6, 8});
  EXPECT_EQ(execute(parse_graph(kConvGraph), identity_1x1("c", 3), x), x);

  const GraphSpec pair = parse_graph(R"({"name": "p", "input": {"channels": 3},
    "nodes": [{"id": "d", "op": "pixel_unshuffle", "params": {"factor": 2}, "inputs": ["input"]},
              {"id": "u", "op": "pixel_shuffle", "params": {"factor": 2}, "inputs": ["d"]},
              {"id": "out", "op": "output", "inputs": ["u"]}], "output": "out"})");
  EXPECT_EQ(execute(pair, {}, x), x);

  const GraphSpec s2b = parse_graph(R"({"name": "s", "input": {"channels": 3},
    "nodes": [{"id": "d", "op": "space_to_batch", "inputs": ["input"]},
              {"id": "u", "op": "batch_to_space", "inputs": ["d"]},
              {"id": "out", "op": "output", "inputs": ["u"]}], "output": "out"})");
  EXPECT_EQ(execute(s2b, {}, x), x);
}

TEST(Execute, MissingWeightNamesNode) {
  const std::string msg = message_of([] {
    execute(parse_graph(kConvGraph), {}, tensor_create(1, 3, 4, 4, 0.0f));
  });
  EXPECT_NE(msg.find("'c'"), std::string::npos) << msg;
  EXPECT_THROW(execute(parse_graph(kConvGraph), {}, tensor_create(1, 3, 4, 4, 0.0f)),
               ExecutionError);
}

TEST(Execute, WrongWeightShapeRejected) {
  WeightStore w;
  w.insert_weight("c", tensor_create(3, 2, 1, 1, 0.0f));
  EXPECT_THROW(execute(parse_graph(kConvGraph), w, tensor_create(1, 3, 4, 4, 0.0f)), Error);
}

TEST(Execute, BiasDefaultsToZeroAndIsApplied) {
  const Tensor x = tensor_create(1, 3, 2, 2, 1.0f);
  WeightStore w = identity_1x1("c", 3);
  EXPECT_EQ(execute(parse_graph(kConvGraph), w, x), x);
  w.insert_bias("c", {1.0f, 2.0f, 3.0f});
  const Tensor y = execute(parse_graph(kConvGraph), w, x);
  EXPECT_EQ(y.at(0, 2, 1, 1), 4.0f);
}

TEST(Execute, ConcatAndSkipTopology) {
  std::mt19937 rng(3);
  const Tensor x = random_tensor(rng, Shape{1, 2, 4, 4});
  const GraphSpec g = parse_graph(R"({"name": "cat", "input": {"channels": 2},
    "nodes": [{"id": "r", "op": "activate", "params": {"kind": "relu"}, "inputs": ["input"]},
              {"id": "cat", "op": "concat", "inputs": ["input", "r"]},
              {"id": "sum", "op": "add", "inputs": ["cat", "cat", "cat"]},
              {"id": "out", "op": "output", "inputs": ["sum"]}], "output": "out"})");
  const Tensor y = execute(g, {}, x);
  const Tensor r = activate(x, Activation::relu());
  const std::vector<Tensor> parts{x, r};
  const Tensor cat = concat_channels(std::span<const Tensor>(parts));
  EXPECT_EQ(y, eltwise_add(eltwise_add(cat, cat), cat));
}

TEST(Execute, IdentityConvInsertionIsNeutral) {
  std::mt19937 rng(5);
  const GraphSpec base = zoo::build_srcnn();
  WeightStore w = zoo::init_weights(base, zoo::WeightFill::random, 3);
  const Tensor x = random_tensor(rng, Shape{1, 3, 16, 16}, 0.0f, 1.0f);
  const Tensor want = execute(base, w, x);

  GraphSpec g = base;
  for (Node& n : g.nodes)
    if (n.id == "relu1") n.inputs = {"extra"};
  g.nodes.push_back(Node{"extra", OpKind::conv, ConvParams{64, 1, 1}, {"conv1"}});
  validate_graph(g);
  const WeightStore extra = identity_1x1("extra", 64);
  for (const auto& [k, v] : extra.entries()) w.insert(k, v);
  EXPECT_LE(testing::relative_error(execute(g, w, x), want), 1e-6);
}

TEST(Execute, DeterministicAcrossRunsAndThreads) {
  std::mt19937 rng(8);
  const GraphSpec g = zoo::build_feqe(zoo::ZooConfig{2, 8});
  const WeightStore w = zoo::init_weights(g, zoo::WeightFill::random, 1);
  const Tensor x = random_tensor(rng, Shape{1, 3, 32, 24}, 0.0f, 1.0f);
  const Executor ex(g, w, x.shape());
  const Tensor a = ex.run(x);
  EXPECT_EQ(a, ex.run(x));
  EXPECT_EQ(a, ex.run(x, ExecOptions{4}));
  EXPECT_EQ(a, execute(g, w, x));
  EXPECT_THROW(ex.run(tensor_create(1, 3, 32, 32, 0.0f)), Error);
}

TEST(GraphFile, SaveLoadRoundtrip) {
  const auto path = std::filesystem::temp_directory_path() / "pirm_graph_test.json";
  const GraphSpec g = zoo::build_supersr();
  save_graph_file(g, path.string());
  EXPECT_EQ(load_graph_file(path.string()), g);
  std::filesystem::remove(path);
  EXPECT_THROW(load_graph_file(path.string()), IoError);
}

}  // namespace
}  // namespace pirm
