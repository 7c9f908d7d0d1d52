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

// Declarative DNN model graphs: primitive operators with integer attributes,
// parsed from a JSON model file, validated, and annotated with tensor shapes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgewatt {

enum class OpKind {
  kConv,
  kDwconv,
  kBn,
  kRelu,
  kRelu6,
  kAvgpool,
  kMaxpool,
  kGlobalpool,
  kFc,
  kConcat,
  kAdd,
  kReshape,
  kSoftmax,
  kSplit,
  kSigmoid,
  kHswish,
};

/// Activation folded into an operator, as model converters emit it
/// (e.g. a conv carrying a fused relu).
enum class Activation { kNone, kRelu, kRelu6 };

enum class Padding { kSame, kValid };

std::string_view to_string(OpKind kind);
std::optional<OpKind> op_kind_from_string(std::string_view name);
std::string_view to_string(Activation act);
std::optional<Activation> activation_from_string(std::string_view name);
std::string_view to_string(Padding padding);
std::optional<Padding> padding_from_string(std::string_view name);

bool is_compute(OpKind kind);  // conv, dwconv, fc

/// Spatial size (height == width) and channel count of an activation tensor.
struct TensorShape {
  std::int64_t hw = 1;
  std::int64_t channels = 1;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct PrimitiveOp {
  std::string id;
  OpKind kind = OpKind::kRelu;
  /// Integer attributes keyed by "ks", "stride", "cout".
  std::map<std::string, std::int64_t> attrs;
  Activation activation = Activation::kNone;
  std::vector<std::string> inputs;
  /// Declared input size; overrides inference when present.
  std::optional<std::int64_t> hw_override;
  std::optional<std::int64_t> cin_override;

  bool has_attr(std::string_view key) const;
  /// Throws ValidationError when the attribute is missing.
  std::int64_t attr(std::string_view key) const;

  friend bool operator==(const PrimitiveOp&, const PrimitiveOp&) = default;
};

struct ModelGraph {
  std::string name;
  TensorShape input_shape;
  /// When false, exactly one op may consume the graph input.
  bool multi_input = false;
  /// Kept in topological order by the parser and builder.
  std::vector<PrimitiveOp> ops;

  const PrimitiveOp* find(std::string_view id) const;

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

/// Checks every structural invariant; throws ValidationError.
void validate(const ModelGraph& graph);

/// Op ids such that each op follows all of its inputs. Ties are broken by
/// declaration order. Throws ValidationError on a cycle.
std::vector<std::string> topological_order(const ModelGraph& graph);

/// Parses the JSON model file format. The result is validated and its ops
/// are reordered topologically. Syntax errors carry a byte offset.
ModelGraph parse_model_graph(std::string_view text);
ModelGraph load_model_graph(const std::filesystem::path& path);
std::string serialize_model_graph(const ModelGraph& graph);

/// Output spatial size of a windowed op. Throws DomainError when valid
/// padding would underflow (ks > hw).
std::int64_t windowed_output_hw(std::int64_t hw, std::int64_t ks,
                                std::int64_t stride, Padding padding);

struct OpShapes {
  TensorShape input;   // effective input (after declared overrides)
  TensorShape output;
  std::vector<std::int64_t> input_channels;  // one entry per input edge
};

struct ShapeInference {
  Padding padding = Padding::kSame;
  std::map<std::string, OpShapes, std::less<>> ops;
  /// Mismatches between declared and inferred shapes.
  std::vector<std::string> warnings;

  const OpShapes& at(std::string_view id) const;
  const TensorShape& output(std::string_view id) const { return at(id).output; }
};

ShapeInference infer_shapes(const ModelGraph& graph,
                            Padding padding = Padding::kSame);

/// Convenience for assembling graphs in code. Ids are generated as
/// `<kind><n>` unless given.
class ModelGraphBuilder {
 public:
  ModelGraphBuilder(std::string name, TensorShape input);

  std::string add(OpKind kind, std::vector<std::string> inputs,
                  std::map<std::string, std::int64_t> attrs = {},
                  Activation act = Activation::kNone, std::string id = {});

  std::string conv(const std::string& in, std::int64_t cout, std::int64_t ks,
                   std::int64_t stride);
  std::string dwconv(const std::string& in, std::int64_t ks, std::int64_t stride);
  std::string pool(OpKind kind, const std::string& in, std::int64_t ks,
                   std::int64_t stride);
  std::string fc(const std::string& in, std::int64_t cout);
  std::string unary(OpKind kind, const std::string& in);

  /// Validates and returns the graph.
  ModelGraph build() const;

 private:
  ModelGraph graph_;
  std::map<std::string, int> counters_;
};

}  // namespace edgewatt
