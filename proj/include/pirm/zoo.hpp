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
#pragma once

// Reference architectures. All of them map a bicubic-pre-upscaled RGB image
// to an output of the same size.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pirm/error.hpp"
#include "pirm/graph.hpp"
#include "pirm/weights.hpp"

namespace pirm::zoo {

struct ZooConfig {
  std::int64_t residual_blocks = 20;
  std::int64_t base_channels = 16;
  ValueScale io_scale = ValueScale::unit;
};

inline constexpr float kDefaultPreluSlope = 0.25f;

namespace detail {

class Builder {
 public:
  Builder(std::string name, ValueScale scale) {
    g_.name = std::move(name);
    g_.input_channels = 3;
    g_.scale = scale;
  }

  std::string conv(std::string id, const std::string& in, std::int64_t out_c,
                   std::int64_t k, std::int64_t stride = 1) {
    return add(std::move(id), OpKind::conv,
               ConvParams{out_c, k, k, stride, Padding::same_zero, 1}, {in});
  }
  std::string conv_transpose(std::string id, const std::string& in, std::int64_t out_c,
                             std::int64_t k, std::int64_t stride) {
    return add(std::move(id), OpKind::conv_transpose, ConvTransposeParams{out_c, k, stride},
               {in});
  }
  std::string act(std::string id, const std::string& in, Activation a) {
    return add(std::move(id), OpKind::activate, std::move(a), {in});
  }
  std::string shuffle(std::string id, const std::string& in, std::int64_t r) {
    return add(std::move(id), OpKind::pixel_shuffle, ShuffleParams{r}, {in});
  }
  std::string unshuffle(std::string id, const std::string& in, std::int64_t r) {
    return add(std::move(id), OpKind::pixel_unshuffle, ShuffleParams{r}, {in});
  }
  std::string sum(std::string id, const std::string& a, const std::string& b) {
    return add(std::move(id), OpKind::add, std::monostate{}, {a, b});
  }

  GraphSpec finish(const std::string& last) {
    add("output", OpKind::output, std::monostate{}, {last});
    g_.output = "output";
    validate_graph(g_);
    return std::move(g_);
  }

 private:
  std::string add(std::string id, OpKind op, NodeParams params, std::vector<std::string> ins) {
    g_.nodes.push_back(Node{id, op, std::move(params), std::move(ins)});
    return id;
  }

  GraphSpec g_;
};

inline void check(const ZooConfig& cfg) {
  if (cfg.residual_blocks < 1) throw ValidationError("residual_blocks must be >= 1");
  if (cfg.base_channels < 1) throw ValidationError("base_channels must be >= 1");
}

}  // namespace detail

// 9-1-5 SRCNN with 64/32 feature maps.
inline GraphSpec build_srcnn() {
  detail::Builder b("srcnn", ValueScale::unit);
  auto x = b.conv("conv1", std::string(kGraphInputId), 64, 9);
  x = b.act("relu1", x, Activation::relu());
  x = b.conv("conv2", x, 32, 1);
  x = b.act("relu2", x, Activation::relu());
  x = b.conv("conv3", x, 3, 5);
  return b.finish(x);
}

// Desubpixel network: two 2x space-to-channel stages bring the trunk to 1/4
// resolution, residual blocks run there, two subpixel stages restore full
// resolution and a global skip adds the input back.
inline GraphSpec build_feqe(const ZooConfig& cfg = {}) {
  detail::check(cfg);
  const std::int64_t c = cfg.base_channels;
  const std::string input(kGraphInputId);
  detail::Builder b("feqe", cfg.io_scale);

  auto x = b.unshuffle("down1", input, 2);
  x = b.conv("down1_conv", x, c, 3);
  x = b.unshuffle("down2", x, 2);
  x = b.conv("down2_conv", x, c, 3);
  for (std::int64_t i = 0; i < cfg.residual_blocks; ++i) {
    const std::string p = "block" + std::to_string(i + 1);
    auto y = b.conv(p + "_conv1", x, c, 3);
    y = b.act(p + "_relu", y, Activation::relu());
    y = b.conv(p + "_conv2", y, c, 3);
    x = b.sum(p + "_add", y, x);
  }
  x = b.conv("up1_conv", x, 4 * c, 3);
  x = b.shuffle("up1", x, 2);
  x = b.conv("up2_conv", x, 12, 3);
  x = b.shuffle("up2", x, 2);
  x = b.sum("global_skip", x, input);
  return b.finish(x);
}

// 4x space-to-depth, PReLU residual trunk, stride-4 transposed conv back up.
inline GraphSpec build_supersr(const ZooConfig& cfg = {}) {
  detail::check(cfg);
  const std::int64_t c = cfg.base_channels;
  const std::vector<float> slopes(static_cast<std::size_t>(c), kDefaultPreluSlope);
  detail::Builder b("supersr", cfg.io_scale);

  auto x = b.unshuffle("space_to_depth", std::string(kGraphInputId), 4);
  x = b.conv("head_conv", x, c, 3);
  x = b.act("head_prelu", x, Activation::prelu(slopes));
  for (std::int64_t i = 0; i < cfg.residual_blocks; ++i) {
    const std::string p = "block" + std::to_string(i + 1);
    auto y = b.conv(p + "_conv1", x, c, 3);
    y = b.act(p + "_prelu", y, Activation::prelu(slopes));
    y = b.conv(p + "_conv2", y, c, 3);
    x = b.sum(p + "_add", y, x);
  }
  x = b.conv("tail_conv", x, c, 3);
  x = b.act("tail_prelu", x, Activation::prelu(slopes));
  x = b.conv_transpose("upsample", x, 3, 8, 4);
  return b.finish(x);
}

inline constexpr std::int64_t kDpedResidualBlocks = 4;

// 9x9 head, four 64-channel residual blocks, two 3x3 convs, 9x9 tail, tanh.
inline GraphSpec build_dped_resnet() {
  detail::Builder b("dped", ValueScale::unit);
  auto x = b.conv("head_conv", std::string(kGraphInputId), 64, 9);
  x = b.act("head_relu", x, Activation::relu());
  for (std::int64_t i = 0; i < kDpedResidualBlocks; ++i) {
    const std::string p = "block" + std::to_string(i + 1);
    auto y = b.conv(p + "_conv1", x, 64, 3);
    y = b.act(p + "_relu1", y, Activation::relu());
    y = b.conv(p + "_conv2", y, 64, 3);
    y = b.act(p + "_relu2", y, Activation::relu());
    x = b.sum(p + "_add", y, x);
  }
  x = b.conv("conv_a", x, 64, 3);
  x = b.act("relu_a", x, Activation::relu());
  x = b.conv("conv_b", x, 64, 3);
  x = b.act("relu_b", x, Activation::relu());
  x = b.conv("tail_conv", x, 3, 9);
  x = b.act("tail_tanh", x, Activation::tanh());
  return b.finish(x);
}

inline const std::vector<std::string_view>& model_names() {
  static const std::vector<std::string_view> names{"srcnn", "feqe", "supersr", "dped"};
  return names;
}

inline GraphSpec build(std::string_view model, const ZooConfig& cfg = {}) {
  if (model == "srcnn") return build_srcnn();
  if (model == "feqe") return build_feqe(cfg);
  if (model == "supersr") return build_supersr(cfg);
  if (model == "dped") return build_dped_resnet();
  throw ValidationError("unknown model '" + std::string(model) +
                        "', expected one of srcnn, feqe, supersr, dped");
}

enum class WeightFill { random, zero };

// Weights for every parameterised node of g. Random fill is uniform in
// +-1/sqrt(fan_in) (biases +-0.01) from a fixed-seed mt19937, so the values
// are reproducible on every platform.
inline WeightStore init_weights(const GraphSpec& g, WeightFill fill, std::uint32_t seed = 0,
                                std::optional<Shape> probe = std::nullopt) {
  const Shape in = probe.value_or(Shape{1, g.input_channels, 128, 128});
  const ShapeMap shapes = infer_shapes(g, in);
  std::mt19937 rng(seed);
  auto uniform = [&rng](float bound) {
    const float u = static_cast<float>(rng() >> 8) * (1.0f / 16777216.0f);
    return (2.0f * u - 1.0f) * bound;
  };

  WeightStore store;
  for (const Node& n : g.nodes) {
    Shape ws;
    std::int64_t out_c = 0;
    if (const auto* p = std::get_if<ConvParams>(&n.params)) {
      ws = conv2d_weight_shape(shapes.at(n.inputs[0]), *p);
      out_c = p->out_channels;
    } else if (const auto* t = std::get_if<ConvTransposeParams>(&n.params)) {
      ws = conv2d_transpose_weight_shape(shapes.at(n.inputs[0]), *t);
      out_c = t->out_channels;
    } else {
      continue;
    }
    std::vector<float> w(static_cast<std::size_t>(ws.count()), 0.0f);
    std::vector<float> bias(static_cast<std::size_t>(out_c), 0.0f);
    if (fill == WeightFill::random) {
      const float fan_in = static_cast<float>(ws.c * ws.h * ws.w);
      const float bound = 1.0f / std::sqrt(fan_in);
      for (float& v : w) v = uniform(bound);
      for (float& v : bias) v = uniform(0.01f);
    }
    store.insert_weight(n.id, Tensor(ws, std::move(w)));
    store.insert_bias(n.id, std::move(bias));
  }
  return store;
}

}  // namespace pirm::zoo
