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

// Declarative network description, its JSON file form, shape inference and
// deterministic execution.
//
// Graph file:
//   {
//     "name": "feqe",
//     "input": {"channels": 3, "scale": "unit"},
//     "nodes": [
//       {"id": "conv1", "op": "conv", "params": {...}, "inputs": ["input"]},
//       ...
//     ],
//     "output": "out"
//   }
// The graph input is referenced by the reserved id "input". Nodes may appear
// in any order in the file; parse_graph stores them topologically sorted.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pirm/error.hpp"
#include "pirm/ops.hpp"
#include "pirm/tensor.hpp"
#include "pirm/weights.hpp"

namespace pirm {

inline constexpr std::string_view kGraphInputId = "input";

enum class OpKind {
  conv,
  conv_transpose,
  activate,
  pixel_shuffle,
  pixel_unshuffle,
  space_to_batch,
  batch_to_space,
  add,
  concat,
  output,
};

struct ShuffleParams {
  std::int64_t factor = 2;
  bool operator==(const ShuffleParams&) const = default;
};

using NodeParams = std::variant<std::monostate, ConvParams, ConvTransposeParams,
                                Activation, ShuffleParams>;

struct Node {
  std::string id;
  OpKind op = OpKind::output;
  NodeParams params;
  std::vector<std::string> inputs;

  bool operator==(const Node&) const = default;
};

struct GraphSpec {
  std::string name;
  std::int64_t input_channels = 3;
  ValueScale scale = ValueScale::unit;
  std::vector<Node> nodes;
  std::string output;

  const Node* find(std::string_view id) const {
    for (const Node& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  bool operator==(const GraphSpec&) const = default;
};

inline std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::conv: return "conv";
    case OpKind::conv_transpose: return "conv_transpose";
    case OpKind::activate: return "activate";
    case OpKind::pixel_shuffle: return "pixel_shuffle";
    case OpKind::pixel_unshuffle: return "pixel_unshuffle";
    case OpKind::space_to_batch: return "space_to_batch";
    case OpKind::batch_to_space: return "batch_to_space";
    case OpKind::add: return "add";
    case OpKind::concat: return "concat";
    case OpKind::output: return "output";
  }
  return "?";
}

inline std::optional<OpKind> op_from_name(std::string_view s) {
  for (OpKind op : {OpKind::conv, OpKind::conv_transpose, OpKind::activate,
                    OpKind::pixel_shuffle, OpKind::pixel_unshuffle,
                    OpKind::space_to_batch, OpKind::batch_to_space, OpKind::add,
                    OpKind::concat, OpKind::output}) {
    if (op_name(op) == s) return op;
  }
  return std::nullopt;
}

inline std::string_view scale_name(ValueScale s) {
  return s == ValueScale::unit ? "unit" : "raw";
}

inline std::optional<ValueScale> scale_from_name(std::string_view s) {
  if (s == "unit") return ValueScale::unit;
  if (s == "raw") return ValueScale::raw;
  return std::nullopt;
}

inline std::string_view activation_name(Activation::Kind k) {
  switch (k) {
    case Activation::Kind::relu: return "relu";
    case Activation::Kind::leaky_relu: return "leaky_relu";
    case Activation::Kind::prelu: return "prelu";
    case Activation::Kind::tanh: return "tanh";
    case Activation::Kind::identity: return "identity";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing and serialization

namespace detail {

using nlohmann::json;

class FieldReader {
 public:
  FieldReader(const json& obj, std::string where)
      : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(std::string_view field, std::string_view msg) const {
    std::string loc = where_;
    if (!field.empty()) loc += (loc.empty() ? "" : ".") + std::string(field);
    throw FormatError(loc + ": " + std::string(msg));
  }

  const json* get(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(std::string_view key) {
    const json* v = get(key);
    if (v == nullptr) fail(key, "missing required field");
    return *v;
  }

  std::int64_t positive_int(std::string_view key, std::optional<std::int64_t> dflt = {}) {
    const json* v = get(key);
    if (v == nullptr) {
      if (dflt) return *dflt;
      fail(key, "missing required field");
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 1) {
      fail(key, "expected an integer >= 1");
    }
    return v->get<std::int64_t>();
  }

  std::string string(std::string_view key, std::optional<std::string> dflt = {}) {
    const json* v = get(key);
    if (v == nullptr) {
      if (dflt) return *dflt;
      fail(key, "missing required field");
    }
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }

  float number(std::string_view key) {
    const json& v = require(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<float>();
  }

  // Rejects keys that no accessor asked for.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(it.key(), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

inline NodeParams parse_params(OpKind op, const json* params, const std::string& where) {
  static const json kEmpty = json::object();
  FieldReader r(params ? *params : kEmpty, where);
  NodeParams out;
  switch (op) {
    case OpKind::conv: {
      ConvParams p;
      p.out_channels = r.positive_int("out_channels");
      p.kernel_h = r.positive_int("kernel_h");
      p.kernel_w = r.positive_int("kernel_w");
      p.stride = r.positive_int("stride", 1);
      const std::string pad = r.string("padding", "same-zero");
      if (pad == "same-zero") {
        p.padding = Padding::same_zero;
      } else if (pad == "valid") {
        p.padding = Padding::valid;
      } else {
        r.fail("padding", "expected \"same-zero\" or \"valid\", got \"" + pad + "\"");
      }
      p.groups = r.positive_int("groups", 1);
      out = p;
      break;
    }
    case OpKind::conv_transpose: {
      ConvTransposeParams p;
      p.out_channels = r.positive_int("out_channels");
      p.kernel = r.positive_int("kernel");
      p.stride = r.positive_int("stride");
      out = p;
      break;
    }
    case OpKind::activate: {
      Activation a;
      const std::string kind = r.string("kind");
      if (kind == "relu") {
        a = Activation::relu();
      } else if (kind == "leaky_relu") {
        a = Activation::leaky_relu(r.number("slope"));
      } else if (kind == "prelu") {
        const json& s = r.require("slopes");
        if (!s.is_array() || s.empty()) r.fail("slopes", "expected a non-empty array");
        std::vector<float> slopes;
        for (const json& v : s) {
          if (!v.is_number()) r.fail("slopes", "expected numbers");
          slopes.push_back(v.get<float>());
        }
        a = Activation::prelu(std::move(slopes));
      } else if (kind == "tanh") {
        a = Activation::tanh();
      } else if (kind == "identity") {
        a = Activation::identity();
      } else {
        r.fail("kind", "unknown activation \"" + kind + "\"");
      }
      out = a;
      break;
    }
    case OpKind::pixel_shuffle:
    case OpKind::pixel_unshuffle:
      out = ShuffleParams{r.positive_int("factor")};
      break;
    default:
      break;
  }
  r.finish();
  return out;
}

inline json params_to_json(const NodeParams& params) {
  json out = json::object();
  if (const auto* c = std::get_if<ConvParams>(&params)) {
    out["out_channels"] = c->out_channels;
    out["kernel_h"] = c->kernel_h;
    out["kernel_w"] = c->kernel_w;
    out["stride"] = c->stride;
    out["padding"] = c->padding == Padding::same_zero ? "same-zero" : "valid";
    out["groups"] = c->groups;
  } else if (const auto* t = std::get_if<ConvTransposeParams>(&params)) {
    out["out_channels"] = t->out_channels;
    out["kernel"] = t->kernel;
    out["stride"] = t->stride;
  } else if (const auto* a = std::get_if<Activation>(&params)) {
    out["kind"] = activation_name(a->kind);
    if (a->kind == Activation::Kind::leaky_relu) out["slope"] = a->slope;
    if (a->kind == Activation::Kind::prelu) out["slopes"] = a->slopes;
  } else if (const auto* s = std::get_if<ShuffleParams>(&params)) {
    out["factor"] = s->factor;
  }
  return out;
}

inline std::pair<std::size_t, std::size_t> input_arity(OpKind op) {
  switch (op) {
    case OpKind::add: return {2, SIZE_MAX};
    case OpKind::concat: return {1, SIZE_MAX};
    default: return {1, 1};
  }
}

// Stable topological order (Kahn, lowest file index first). Throws on
// undefined references and cycles.
inline std::vector<Node> topo_sort(std::vector<Node> nodes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].id, i);

  std::vector<std::size_t> pending(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> users(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const std::string& in : nodes[i].inputs) {
      if (in == kGraphInputId) continue;
      auto it = index.find(in);
      if (it == index.end()) {
        throw FormatError("node '" + nodes[i].id + "' references undefined id '" + in + "'");
      }
      ++pending[i];
      users[it->second].push_back(i);
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (pending[i] == 0) ready.insert(i);

  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t u : users[i])
      if (--pending[u] == 0) ready.insert(u);
  }
  if (order.size() != nodes.size()) {
    std::string stuck;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (pending[i] != 0) stuck += (stuck.empty() ? "" : ", ") + nodes[i].id;
    }
    throw FormatError("cycle detected among nodes: " + stuck);
  }
  std::vector<Node> sorted;
  sorted.reserve(nodes.size());
  for (std::size_t i : order) sorted.push_back(std::move(nodes[i]));
  return sorted;
}

}  // namespace detail

// Structural checks shared by the parser and the zoo builders.
inline void validate_graph(GraphSpec& g) {
  std::set<std::string> ids;
  std::size_t outputs = 0;
  for (const Node& n : g.nodes) {
    if (n.id.empty()) throw FormatError("node with empty id");
    if (n.id == kGraphInputId) {
      throw FormatError("node id '" + n.id + "' is reserved for the graph input");
    }
    if (!ids.insert(n.id).second) throw FormatError("duplicate node id '" + n.id + "'");
    const auto [lo, hi] = detail::input_arity(n.op);
    if (n.inputs.size() < lo || n.inputs.size() > hi) {
      throw FormatError("node '" + n.id + "' (" + std::string(op_name(n.op)) + ") has " +
                        std::to_string(n.inputs.size()) + " inputs");
    }
    if (n.op == OpKind::output) ++outputs;
  }
  if (outputs != 1) {
    throw FormatError("graph must have exactly one output node, found " +
                      std::to_string(outputs));
  }
  g.nodes = detail::topo_sort(std::move(g.nodes));
  const Node* out = g.find(g.output);
  if (out == nullptr || out->op != OpKind::output) {
    throw FormatError("graph output '" + g.output + "' is not the output node");
  }
}

inline GraphSpec parse_graph(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("graph JSON: ") + e.what());
  }
  detail::FieldReader top(doc, "graph");
  GraphSpec g;
  g.name = top.string("name");

  detail::FieldReader in(top.require("input"), "input");
  g.input_channels = in.positive_int("channels");
  const std::string scale = in.string("scale", "unit");
  const auto sc = scale_from_name(scale);
  if (!sc) in.fail("scale", "expected \"unit\" or \"raw\", got \"" + scale + "\"");
  g.scale = *sc;
  in.finish();

  const json& nodes = top.require("nodes");
  if (!nodes.is_array()) top.fail("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    detail::FieldReader nr(nodes[i], where);
    Node n;
    n.id = nr.string("id");
    const std::string label = where + " ('" + n.id + "')";
    const std::string op = nr.string("op");
    const auto kind = op_from_name(op);
    if (!kind) throw FormatError(label + ": unknown op \"" + op + "\"");
    n.op = *kind;
    n.params = detail::parse_params(n.op, nr.get("params"), label + ".params");
    const json& ins = nr.require("inputs");
    if (!ins.is_array()) nr.fail("inputs", "expected an array of ids");
    for (const json& v : ins) {
      if (!v.is_string()) nr.fail("inputs", "expected an array of ids");
      n.inputs.push_back(v.get<std::string>());
    }
    nr.finish();
    g.nodes.push_back(std::move(n));
  }
  g.output = top.string("output");
  top.finish();
  validate_graph(g);
  return g;
}

inline nlohmann::ordered_json graph_to_json(const GraphSpec& g) {
  nlohmann::ordered_json doc;
  doc["name"] = g.name;
  doc["input"] = {{"channels", g.input_channels}, {"scale", scale_name(g.scale)}};
  auto nodes = nlohmann::ordered_json::array();
  for (const Node& n : g.nodes) {
    nlohmann::ordered_json j;
    j["id"] = n.id;
    j["op"] = op_name(n.op);
    j["params"] = detail::params_to_json(n.params);
    j["inputs"] = n.inputs;
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  doc["output"] = g.output;
  return doc;
}

inline std::string serialize_graph(const GraphSpec& g) {
  return graph_to_json(g).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Shape inference

using ShapeMap = std::map<std::string, Shape, std::less<>>;

namespace detail {

inline Shape node_shape(const Node& n, std::span<const Shape> ins) {
  switch (n.op) {
    case OpKind::conv:
      return conv2d_output_shape(ins[0], std::get<ConvParams>(n.params));
    case OpKind::conv_transpose:
      return conv2d_transpose_output_shape(ins[0], std::get<ConvTransposeParams>(n.params));
    case OpKind::activate:
      check_activation(ins[0], std::get<Activation>(n.params));
      return ins[0];
    case OpKind::pixel_shuffle:
      return pixel_shuffle_shape(ins[0], std::get<ShuffleParams>(n.params).factor);
    case OpKind::pixel_unshuffle:
      return pixel_unshuffle_shape(ins[0], std::get<ShuffleParams>(n.params).factor);
    case OpKind::space_to_batch:
      return space_to_batch_shape(ins[0]);
    case OpKind::batch_to_space:
      return batch_to_space_shape(ins[0]);
    case OpKind::add:
      for (const Shape& s : ins) {
        if (s != ins[0]) {
          throw ShapeError("add operands differ: " + ins[0].to_string() + " vs " +
                           s.to_string());
        }
      }
      return ins[0];
    case OpKind::concat:
      return concat_channels_shape(ins);
    case OpKind::output:
      return ins[0];
  }
  return ins[0];
}

}  // namespace detail

inline ShapeMap infer_shapes(const GraphSpec& g, const Shape& input) {
  validate_shape(input);
  if (input.c != g.input_channels) {
    throw ShapeError("graph '" + g.name + "' expects " + std::to_string(g.input_channels) +
                     " input channels, got " + input.to_string());
  }
  ShapeMap shapes;
  shapes.emplace(std::string(kGraphInputId), input);
  std::vector<Shape> ins;
  for (const Node& n : g.nodes) {
    ins.clear();
    for (const std::string& id : n.inputs) ins.push_back(shapes.at(id));
    try {
      const Shape s = detail::node_shape(n, ins);
      validate_shape(s);
      shapes.emplace(n.id, s);
    } catch (const Error& e) {
      throw ShapeError("node '" + n.id + "': " + e.detail());
    }
  }
  return shapes;
}

// ---------------------------------------------------------------------------
// Execution

struct ExecOptions {
  int threads = 1;
};

// A graph bound to its weights for one input shape. Shape inference and
// weight validation happen at construction; run() only evaluates kernels.
class Executor {
 public:
  Executor(const GraphSpec& graph, const WeightStore& weights, const Shape& input_shape)
      : graph_(graph), input_shape_(input_shape) {
    shapes_ = infer_shapes(graph_, input_shape);
    bind(weights);
    plan();
  }

  const ShapeMap& shapes() const { return shapes_; }
  const Shape& output_shape() const { return shapes_.at(graph_.output); }

  Tensor run(const Tensor& input, const ExecOptions& opts = {}) const {
    if (input.shape() != input_shape_) {
      throw ShapeError("executor bound to " + input_shape_.to_string() + ", got " +
                       input.shape().to_string());
    }
    std::vector<std::optional<Tensor>> values(graph_.nodes.size());
    auto fetch = [&](std::size_t slot) -> const Tensor& {
      return slot == kInputSlot ? input : *values[slot];
    };
    for (const Step& st : steps_) {
      const Node& n = graph_.nodes[st.node];
      const Tensor& x = fetch(st.inputs[0]);
      Tensor y;
      switch (n.op) {
        case OpKind::conv:
          y = conv2d(x, *st.weight, st.bias, std::get<ConvParams>(n.params), opts.threads);
          break;
        case OpKind::conv_transpose:
          y = conv2d_transpose(x, *st.weight, st.bias,
                               std::get<ConvTransposeParams>(n.params), opts.threads);
          break;
        case OpKind::activate:
          y = activate(x, std::get<Activation>(n.params));
          break;
        case OpKind::pixel_shuffle:
          y = pixel_shuffle(x, std::get<ShuffleParams>(n.params).factor);
          break;
        case OpKind::pixel_unshuffle:
          y = pixel_unshuffle(x, std::get<ShuffleParams>(n.params).factor);
          break;
        case OpKind::space_to_batch:
          y = space_to_batch(x);
          break;
        case OpKind::batch_to_space:
          y = batch_to_space(x);
          break;
        case OpKind::add:
          y = eltwise_add(x, fetch(st.inputs[1]));
          for (std::size_t i = 2; i < st.inputs.size(); ++i) {
            y = eltwise_add(y, fetch(st.inputs[i]));
          }
          break;
        case OpKind::concat: {
          std::vector<const Tensor*> parts;
          for (std::size_t s : st.inputs) parts.push_back(&fetch(s));
          y = concat_channels(std::span<const Tensor* const>(parts));
          break;
        }
        case OpKind::output:
          y = x;
          break;
      }
      values[st.node] = std::move(y);
      for (std::size_t dead : st.release) values[dead].reset();
    }
    return std::move(*values[output_index_]);
  }

 private:
  static constexpr std::size_t kInputSlot = SIZE_MAX;

  struct Step {
    std::size_t node;
    std::vector<std::size_t> inputs;
    std::optional<Tensor> weight;
    std::vector<float> bias;
    std::vector<std::size_t> release;  // values no later step reads
  };

  void bind(const WeightStore& weights) {
    for (const Node& n : graph_.nodes) {
      if (n.op != OpKind::conv && n.op != OpKind::conv_transpose) continue;
      const Shape in = shapes_.at(n.inputs[0]);
      Shape expected;
      std::int64_t out_c = 0;
      if (n.op == OpKind::conv) {
        const auto& p = std::get<ConvParams>(n.params);
        expected = conv2d_weight_shape(in, p);
        out_c = p.out_channels;
      } else {
        const auto& p = std::get<ConvTransposeParams>(n.params);
        expected = conv2d_transpose_weight_shape(in, p);
        out_c = p.out_channels;
      }
      const WeightBlob* w = weights.find(n.id + ".weight");
      if (w == nullptr) {
        throw ExecutionError("missing weight entry '" + n.id + ".weight' for node '" + n.id + "'");
      }
      if (w->dims.size() != 4 ||
          Shape{w->dims[0], w->dims[1], w->dims[2], w->dims[3]} != expected) {
        throw ShapeError("node '" + n.id + "': weight shape does not match expected " +
                         expected.to_string());
      }
      BoundWeights bw{Tensor(expected, w->values), {}};
      if (const WeightBlob* b = weights.find(n.id + ".bias")) {
        if (b->dims.size() != 1 || b->dims[0] != out_c) {
          throw ShapeError("node '" + n.id + "': bias must have shape [" +
                           std::to_string(out_c) + "]");
        }
        bw.bias = b->values;
      }
      bound_.emplace(n.id, std::move(bw));
    }
  }

  void plan() {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) index.emplace(graph_.nodes[i].id, i);
    output_index_ = index.at(graph_.output);

    // Only nodes the output depends on are evaluated.
    std::vector<bool> live(graph_.nodes.size(), false);
    live[output_index_] = true;
    for (std::size_t i = graph_.nodes.size(); i-- > 0;) {
      if (!live[i]) continue;
      for (const std::string& in : graph_.nodes[i].inputs)
        if (in != kGraphInputId) live[index.at(in)] = true;
    }

    std::vector<std::size_t> last_use(graph_.nodes.size(), 0);
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
      if (!live[i]) continue;
      Step st{i, {}, std::nullopt, {}, {}};
      for (const std::string& in : graph_.nodes[i].inputs) {
        const std::size_t slot = in == kGraphInputId ? kInputSlot : index.at(in);
        st.inputs.push_back(slot);
        if (slot != kInputSlot) last_use[slot] = steps_.size();
      }
      if (auto it = bound_.find(graph_.nodes[i].id); it != bound_.end()) {
        st.weight = std::move(it->second.weight);
        st.bias = std::move(it->second.bias);
      }
      steps_.push_back(std::move(st));
    }
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
      if (live[i] && i != output_index_) steps_[last_use[i]].release.push_back(i);
    }
    bound_.clear();
  }

  struct BoundWeights {
    Tensor weight;
    std::vector<float> bias;
  };

  GraphSpec graph_;
  Shape input_shape_;
  ShapeMap shapes_;
  std::map<std::string, BoundWeights> bound_;
  std::vector<Step> steps_;
  std::size_t output_index_ = 0;
};

inline Tensor execute(const GraphSpec& g, const WeightStore& w, const Tensor& input,
                      const ExecOptions& opts = {}) {
  return Executor(g, w, input.shape()).run(input, opts);
}

inline GraphSpec load_graph_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_graph(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.detail());
  }
}

inline void save_graph_file(const GraphSpec& g, const std::string& path) {
  const std::string text = serialize_graph(g);
  write_file_bytes(path, std::span<const std::uint8_t>(
                             reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace pirm
