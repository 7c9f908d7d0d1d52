// Copyright 2026 The Edgewatt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgewatt/model_ir.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <set>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "edgewatt/error.hpp"
#include "edgewatt/table.hpp"

namespace edgewatt {

namespace {

using json = nlohmann::json;

constexpr std::array<std::pair<OpKind, std::string_view>, 16> kOpKindNames = {{
    {OpKind::kConv, "conv"},
    {OpKind::kDwconv, "dwconv"},
    {OpKind::kBn, "bn"},
    {OpKind::kRelu, "relu"},
    {OpKind::kRelu6, "relu6"},
    {OpKind::kAvgpool, "avgpool"},
    {OpKind::kMaxpool, "maxpool"},
    {OpKind::kGlobalpool, "globalpool"},
    {OpKind::kFc, "fc"},
    {OpKind::kConcat, "concat"},
    {OpKind::kAdd, "add"},
    {OpKind::kReshape, "reshape"},
    {OpKind::kSoftmax, "softmax"},
    {OpKind::kSplit, "split"},
    {OpKind::kSigmoid, "sigmoid"},
    {OpKind::kHswish, "hswish"},
}};

std::vector<std::string_view> required_attrs(OpKind kind) {
  switch (kind) {
    case OpKind::kConv:
      return {"ks", "stride", "cout"};
    case OpKind::kDwconv:
    case OpKind::kAvgpool:
    case OpKind::kMaxpool:
      return {"ks", "stride"};
    case OpKind::kFc:
    case OpKind::kSplit:
      return {"cout"};
    default:
      return {};
  }
}

bool accepts_activation(OpKind kind) {
  return kind == OpKind::kConv || kind == OpKind::kDwconv || kind == OpKind::kBn;
}

std::string op_label(const PrimitiveOp& op) { return "op '" + op.id + "'"; }

}  // namespace

std::string_view to_string(OpKind kind) {
  for (const auto& [k, name] : kOpKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<OpKind> op_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kOpKindNames)
    if (n == name) return k;
  return std::nullopt;
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kNone:
      return "none";
    case Activation::kRelu:
      return "relu";
    case Activation::kRelu6:
      return "relu6";
  }
  return "?";
}

std::optional<Activation> activation_from_string(std::string_view name) {
  if (name == "none") return Activation::kNone;
  if (name == "relu") return Activation::kRelu;
  if (name == "relu6") return Activation::kRelu6;
  return std::nullopt;
}

std::string_view to_string(Padding padding) {
  return padding == Padding::kSame ? "same" : "valid";
}

std::optional<Padding> padding_from_string(std::string_view name) {
  if (name == "same") return Padding::kSame;
  if (name == "valid") return Padding::kValid;
  return std::nullopt;
}

bool is_compute(OpKind kind) {
  return kind == OpKind::kConv || kind == OpKind::kDwconv || kind == OpKind::kFc;
}

bool PrimitiveOp::has_attr(std::string_view key) const {
  return attrs.find(std::string(key)) != attrs.end();
}

std::int64_t PrimitiveOp::attr(std::string_view key) const {
  auto it = attrs.find(std::string(key));
  if (it == attrs.end())
    throw ValidationError(op_label(*this) + " (" + std::string(to_string(kind)) +
                          ") is missing required attribute '" + std::string(key) +
                          "'");
  return it->second;
}

const PrimitiveOp* ModelGraph::find(std::string_view id) const {
  for (const auto& op : ops)
    if (op.id == id) return &op;
  return nullptr;
}

void validate(const ModelGraph& graph) {
  if (graph.input_shape.hw < 1 || graph.input_shape.channels < 1)
    throw ValidationError("model '" + graph.name +
                          "': input shape must have hw >= 1 and channels >= 1");
  std::set<std::string, std::less<>> ids;
  for (const auto& op : graph.ops) {
    if (op.id.empty()) throw ValidationError("op with empty id");
    if (!ids.insert(op.id).second)
      throw ValidationError("duplicate op id '" + op.id + "'");
  }
  std::size_t input_ops = 0;
  for (const auto& op : graph.ops) {
    for (auto key : required_attrs(op.kind)) (void)op.attr(key);
    for (const auto& [key, value] : op.attrs)
      if (value < 1)
        throw ValidationError(op_label(op) + ": attribute '" + key +
                              "' must be >= 1");
    if (op.hw_override && *op.hw_override < 1)
      throw ValidationError(op_label(op) + ": declared hw must be >= 1");
    if (op.cin_override && *op.cin_override < 1)
      throw ValidationError(op_label(op) + ": declared cin must be >= 1");
    if (op.activation != Activation::kNone && !accepts_activation(op.kind))
      throw ValidationError(op_label(op) + ": kind '" +
                            std::string(to_string(op.kind)) +
                            "' cannot carry a fused activation");
    for (const auto& in : op.inputs) {
      if (!ids.count(in))
        throw ValidationError(op_label(op) + " references undeclared input '" +
                              in + "'");
      if (in == op.id) throw ValidationError(op_label(op) + " consumes itself");
    }
    const std::size_t n_in = op.inputs.size();
    if (n_in == 0) ++input_ops;
    if (op.kind == OpKind::kConcat) {
      if (n_in < 2 || n_in > 4)
        throw ValidationError(op_label(op) + ": concat takes 2 to 4 inputs");
      if (op.cin_override)
        throw ValidationError(op_label(op) + ": concat cannot declare cin");
    } else if (op.kind == OpKind::kAdd) {
      if (n_in < 2) throw ValidationError(op_label(op) + ": add takes >= 2 inputs");
    } else if (n_in > 1) {
      throw ValidationError(op_label(op) + ": kind '" +
                            std::string(to_string(op.kind)) +
                            "' takes a single input");
    }
  }
  if (!graph.ops.empty() && !graph.multi_input && input_ops != 1)
    throw ValidationError("model '" + graph.name + "' has " +
                          std::to_string(input_ops) +
                          " ops without inputs; exactly one is allowed unless "
                          "multi_input is declared");
  (void)topological_order(graph);
}

std::vector<std::string> topological_order(const ModelGraph& graph) {
  const std::size_t n = graph.ops.size();
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(graph.ops[i].id, i);

  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& in : graph.ops[i].inputs) {
      auto it = index.find(in);
      if (it == index.end())
        throw ValidationError("op '" + graph.ops[i].id +
                              "' references undeclared input '" + in + "'");
      consumers[it->second].push_back(i);
      ++pending[i];
    }
  }
  // Min-heap on declaration index gives the stable tie-break.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push(i);
  std::vector<std::string> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(graph.ops[i].id);
    for (std::size_t c : consumers[i])
      if (--pending[c] == 0) ready.push(c);
  }
  if (order.size() != n)
    throw ValidationError("model '" + graph.name + "' contains a cycle");
  return order;
}

ModelGraph parse_model_graph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file syntax error: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("model file must be a JSON object", 0);

  auto get_int = [](const json& obj, const char* key, const std::string& where)
      -> std::optional<std::int64_t> {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number_integer())
      throw ParseError(where + ": field '" + key + "' must be an integer");
    return it->get<std::int64_t>();
  };

  ModelGraph graph;
  static const std::set<std::string> kTopKeys = {"name", "input_hw", "input_channels",
                                                 "multi_input", "ops"};
  for (const auto& [key, value] : doc.items())
    if (!kTopKeys.count(key)) throw ParseError("unknown model field '" + key + "'");
  if (!doc.contains("name") || !doc["name"].is_string())
    throw ParseError("model file: 'name' must be a string");
  graph.name = doc["name"].get<std::string>();
  auto hw = get_int(doc, "input_hw", "model");
  auto ch = get_int(doc, "input_channels", "model");
  if (!hw || !ch) throw ParseError("model file: 'input_hw' and 'input_channels' are required");
  graph.input_shape = TensorShape{*hw, *ch};
  if (doc.contains("multi_input")) {
    if (!doc["multi_input"].is_boolean())
      throw ParseError("model file: 'multi_input' must be a boolean");
    graph.multi_input = doc["multi_input"].get<bool>();
  }
  if (!doc.contains("ops") || !doc["ops"].is_array())
    throw ParseError("model file: 'ops' must be an array");

  static const std::set<std::string> kOpKeys = {"id", "kind", "inputs", "ks", "stride",
                                                "cout", "act", "hw", "cin"};
  std::size_t idx = 0;
  for (const auto& jop : doc["ops"]) {
    const std::string where = "op #" + std::to_string(idx++);
    if (!jop.is_object()) throw ParseError(where + ": must be an object");
    for (const auto& [key, value] : jop.items())
      if (!kOpKeys.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
    PrimitiveOp op;
    if (!jop.contains("id") || !jop["id"].is_string())
      throw ParseError(where + ": 'id' must be a string");
    op.id = jop["id"].get<std::string>();
    if (!jop.contains("kind") || !jop["kind"].is_string())
      throw ParseError(where + ": 'kind' must be a string");
    const std::string kind = jop["kind"].get<std::string>();
    auto parsed_kind = op_kind_from_string(kind);
    if (!parsed_kind)
      throw ParseError(where + " ('" + op.id + "'): unknown op kind '" + kind + "'");
    op.kind = *parsed_kind;
    if (jop.contains("inputs")) {
      if (!jop["inputs"].is_array())
        throw ParseError(where + ": 'inputs' must be an array of ids");
      for (const auto& in : jop["inputs"]) {
        if (!in.is_string()) throw ParseError(where + ": input ids must be strings");
        op.inputs.push_back(in.get<std::string>());
      }
    }
    for (const char* key : {"ks", "stride", "cout"})
      if (auto v = get_int(jop, key, where)) op.attrs.emplace(key, *v);
    op.hw_override = get_int(jop, "hw", where);
    op.cin_override = get_int(jop, "cin", where);
    if (jop.contains("act")) {
      if (!jop["act"].is_string()) throw ParseError(where + ": 'act' must be a string");
      auto act = activation_from_string(jop["act"].get<std::string>());
      if (!act) throw ParseError(where + ": unknown activation");
      op.activation = *act;
    }
    graph.ops.push_back(std::move(op));
  }

  validate(graph);
  const auto order = topological_order(graph);
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos.emplace(order[i], i);
  std::vector<PrimitiveOp> sorted(graph.ops.size());
  for (auto& op : graph.ops) {
    const std::size_t p = pos.at(op.id);
    sorted[p] = std::move(op);
  }
  graph.ops = std::move(sorted);
  return graph;
}

ModelGraph load_model_graph(const std::filesystem::path& path) {
  return parse_model_graph(read_text_file(path));
}

std::string serialize_model_graph(const ModelGraph& graph) {
  json doc = json::object();
  doc["name"] = graph.name;
  doc["input_hw"] = graph.input_shape.hw;
  doc["input_channels"] = graph.input_shape.channels;
  if (graph.multi_input) doc["multi_input"] = true;
  json ops = json::array();
  for (const auto& op : graph.ops) {
    json j = json::object();
    j["id"] = op.id;
    j["kind"] = std::string(to_string(op.kind));
    j["inputs"] = op.inputs;
    for (const auto& [key, value] : op.attrs) j[key] = value;
    if (op.activation != Activation::kNone)
      j["act"] = std::string(to_string(op.activation));
    if (op.hw_override) j["hw"] = *op.hw_override;
    if (op.cin_override) j["cin"] = *op.cin_override;
    ops.push_back(std::move(j));
  }
  doc["ops"] = std::move(ops);
  return doc.dump(2) + "\n";
}

std::int64_t windowed_output_hw(std::int64_t hw, std::int64_t ks,
                                std::int64_t stride, Padding padding) {
  if (hw < 1 || ks < 1 || stride < 1)
    throw DomainError("windowed op needs hw, ks, stride >= 1");
  if (padding == Padding::kSame) return (hw + stride - 1) / stride;
  if (ks > hw)
    throw DomainError("valid padding underflow: kernel size " + std::to_string(ks) +
                      " exceeds input size " + std::to_string(hw));
  return (hw - ks) / stride + 1;
}

const OpShapes& ShapeInference::at(std::string_view id) const {
  auto it = ops.find(id);
  if (it == ops.end())
    throw ValidationError("no resolved shape for op '" + std::string(id) + "'");
  return it->second;
}

ShapeInference infer_shapes(const ModelGraph& graph, Padding padding) {
  ShapeInference result;
  result.padding = padding;
  for (const auto& id : topological_order(graph)) {
    const PrimitiveOp& op = *graph.find(id);
    OpShapes shapes;
    if (op.inputs.empty()) {
      shapes.input = graph.input_shape;
      shapes.input_channels = {graph.input_shape.channels};
    } else if (op.kind == OpKind::kConcat) {
      const TensorShape& first = result.output(op.inputs.front());
      shapes.input = TensorShape{first.hw, 0};
      for (const auto& in : op.inputs) {
        const TensorShape& s = result.output(in);
        if (s.hw != first.hw)
          throw ValidationError(op_label(op) + ": concat inputs disagree on hw (" +
                                std::to_string(first.hw) + " vs " +
                                std::to_string(s.hw) + ")");
        shapes.input.channels += s.channels;
        shapes.input_channels.push_back(s.channels);
      }
    } else {
      shapes.input = result.output(op.inputs.front());
      for (const auto& in : op.inputs) {
        const TensorShape& s = result.output(in);
        if (!(s == shapes.input))
          throw ValidationError(op_label(op) + ": add inputs have mismatched shapes");
        shapes.input_channels.push_back(s.channels);
      }
    }

    if (op.hw_override && *op.hw_override != shapes.input.hw) {
      result.warnings.push_back(op_label(op) + ": declared hw " +
                                std::to_string(*op.hw_override) +
                                " overrides inferred " +
                                std::to_string(shapes.input.hw));
    }
    if (op.hw_override) shapes.input.hw = *op.hw_override;
    if (op.cin_override && *op.cin_override != shapes.input.channels) {
      result.warnings.push_back(op_label(op) + ": declared cin " +
                                std::to_string(*op.cin_override) +
                                " overrides inferred " +
                                std::to_string(shapes.input.channels));
    }
    if (op.cin_override) {
      shapes.input.channels = *op.cin_override;
      shapes.input_channels.assign(shapes.input_channels.size(), *op.cin_override);
    }

    const TensorShape in = shapes.input;
    switch (op.kind) {
      case OpKind::kConv:
        shapes.output = {windowed_output_hw(in.hw, op.attr("ks"), op.attr("stride"), padding),
                         op.attr("cout")};
        break;
      case OpKind::kDwconv:
      case OpKind::kAvgpool:
      case OpKind::kMaxpool:
        shapes.output = {windowed_output_hw(in.hw, op.attr("ks"), op.attr("stride"), padding),
                         in.channels};
        break;
      case OpKind::kGlobalpool:
        shapes.output = {1, in.channels};
        break;
      case OpKind::kFc:
        shapes.output = {1, op.attr("cout")};
        break;
      case OpKind::kReshape:
        shapes.output = {1, in.hw * in.hw * in.channels};
        break;
      case OpKind::kSplit:
        if (op.attr("cout") > in.channels)
          throw ValidationError(op_label(op) + ": split width exceeds input channels");
        shapes.output = {in.hw, op.attr("cout")};
        break;
      default:
        shapes.output = in;
        break;
    }
    result.ops.emplace(op.id, std::move(shapes));
  }
  return result;
}

ModelGraphBuilder::ModelGraphBuilder(std::string name, TensorShape input) {
  graph_.name = std::move(name);
  graph_.input_shape = input;
}

std::string ModelGraphBuilder::add(OpKind kind, std::vector<std::string> inputs,
                                   std::map<std::string, std::int64_t> attrs,
                                   Activation act, std::string id) {
  if (id.empty()) {
    const std::string prefix(to_string(kind));
    id = prefix + std::to_string(++counters_[prefix]);
  }
  PrimitiveOp op;
  op.id = id;
  op.kind = kind;
  op.attrs = std::move(attrs);
  op.activation = act;
  op.inputs = std::move(inputs);
  graph_.ops.push_back(std::move(op));
  return id;
}

namespace {
std::vector<std::string> single(const std::string& in) {
  if (in.empty()) return {};
  return {in};
}
}  // namespace

std::string ModelGraphBuilder::conv(const std::string& in, std::int64_t cout,
                                    std::int64_t ks, std::int64_t stride) {
  return add(OpKind::kConv, single(in), {{"cout", cout}, {"ks", ks}, {"stride", stride}});
}

std::string ModelGraphBuilder::dwconv(const std::string& in, std::int64_t ks,
                                      std::int64_t stride) {
  return add(OpKind::kDwconv, single(in), {{"ks", ks}, {"stride", stride}});
}

std::string ModelGraphBuilder::pool(OpKind kind, const std::string& in,
                                    std::int64_t ks, std::int64_t stride) {
  return add(kind, single(in), {{"ks", ks}, {"stride", stride}});
}

std::string ModelGraphBuilder::fc(const std::string& in, std::int64_t cout) {
  return add(OpKind::kFc, single(in), {{"cout", cout}});
}

std::string ModelGraphBuilder::unary(OpKind kind, const std::string& in) {
  return add(kind, single(in));
}

ModelGraph ModelGraphBuilder::build() const {
  validate(graph_);
  return graph_;
}

}  // namespace edgewatt
