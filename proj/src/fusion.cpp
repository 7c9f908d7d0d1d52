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

#include "edgewatt/fusion.hpp"

#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "edgewatt/error.hpp"

namespace edgewatt {

namespace {

constexpr std::array<std::pair<KernelType, std::string_view>, 16> kKernelNames = {{
    {KernelType::kConvBnRelu, "conv_bn_relu"},
    {KernelType::kConvRelu, "conv_relu"},
    {KernelType::kConv, "conv"},
    {KernelType::kDwconvBnRelu, "dwconv_bn_relu"},
    {KernelType::kDwconvRelu, "dwconv_relu"},
    {KernelType::kDwconv, "dwconv"},
    {KernelType::kBnRelu, "bn_relu"},
    {KernelType::kBn, "bn"},
    {KernelType::kRelu, "relu"},
    {KernelType::kAvgpool, "avgpool"},
    {KernelType::kMaxpool, "maxpool"},
    {KernelType::kGlobalpool, "globalpool"},
    {KernelType::kFc, "fc"},
    {KernelType::kConcat, "concat"},
    {KernelType::kAdd, "add"},
    {KernelType::kOthers, "others"},
}};

// Positions in kConfigColumns used by each layout, in tuple order.
std::vector<std::size_t> column_slots(ConfigLayout layout) {
  switch (layout) {
    case ConfigLayout::kConvFamily:
      return {0, 1, 2, 3, 4};
    case ConfigLayout::kDwconvFamily:
    case ConfigLayout::kPool:
      return {0, 1, 3, 4};
    case ConfigLayout::kSpatial:
      return {0, 1};
    case ConfigLayout::kFc:
      return {1, 2};
    case ConfigLayout::kConcat:
      return {0, 1, 5, 6, 7};
  }
  return {};
}

bool is_relu_like(OpKind kind) { return kind == OpKind::kRelu || kind == OpKind::kRelu6; }

}  // namespace

std::string_view to_string(KernelType type) {
  for (const auto& [t, name] : kKernelNames)
    if (t == type) return name;
  return "?";
}

std::optional<KernelType> kernel_type_from_string(std::string_view name) {
  for (const auto& [t, n] : kKernelNames)
    if (n == name) return t;
  return std::nullopt;
}

ConfigLayout layout_of(KernelType type) {
  switch (type) {
    case KernelType::kConvBnRelu:
    case KernelType::kConvRelu:
    case KernelType::kConv:
      return ConfigLayout::kConvFamily;
    case KernelType::kDwconvBnRelu:
    case KernelType::kDwconvRelu:
    case KernelType::kDwconv:
      return ConfigLayout::kDwconvFamily;
    case KernelType::kAvgpool:
    case KernelType::kMaxpool:
      return ConfigLayout::kPool;
    case KernelType::kFc:
      return ConfigLayout::kFc;
    case KernelType::kConcat:
      return ConfigLayout::kConcat;
    default:
      return ConfigLayout::kSpatial;
  }
}

std::size_t config_arity(KernelType type) { return column_slots(layout_of(type)).size(); }

ConfigColumns to_config_columns(KernelType type, std::span<const std::int64_t> config) {
  const auto slots = column_slots(layout_of(type));
  if (config.size() != slots.size())
    throw ValidationError("config arity " + std::to_string(config.size()) +
                          " does not match kernel type '" +
                          std::string(to_string(type)) + "'");
  ConfigColumns columns{};
  for (std::size_t i = 0; i < slots.size(); ++i) columns[slots[i]] = config[i];
  return columns;
}

std::vector<std::int64_t> from_config_columns(KernelType type,
                                              const ConfigColumns& columns) {
  const ConfigLayout layout = layout_of(type);
  const auto slots = column_slots(layout);
  std::vector<std::int64_t> config;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& value = columns[slots[i]];
    if (!value) {
      // Trailing concat inputs may be left blank.
      if (layout == ConfigLayout::kConcat && i >= 3) {
        config.push_back(0);
        continue;
      }
      throw ValidationError("kernel type '" + std::string(to_string(type)) +
                            "' requires column '" +
                            std::string(kConfigColumns[slots[i]]) + "'");
    }
    config.push_back(*value);
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    bool used = false;
    for (auto s : slots) used = used || s == c;
    if (!used && columns[c])
      throw ValidationError("kernel type '" + std::string(to_string(type)) +
                            "' does not use column '" + std::string(kConfigColumns[c]) +
                            "'");
  }
  return config;
}

std::int64_t implied_out_hw(KernelType type, std::span<const std::int64_t> config,
                            Padding padding) {
  switch (layout_of(type)) {
    case ConfigLayout::kConvFamily:
      return windowed_output_hw(config[0], config[3], config[4], padding);
    case ConfigLayout::kDwconvFamily:
    case ConfigLayout::kPool:
      return windowed_output_hw(config[0], config[2], config[3], padding);
    case ConfigLayout::kFc:
      return 1;
    case ConfigLayout::kConcat:
      return config[0];
    case ConfigLayout::kSpatial:
      return type == KernelType::kGlobalpool ? 1 : config[0];
  }
  return 1;
}

void validate_kernel(const KernelInstance& kernel) {
  const std::string name(to_string(kernel.type));
  if (kernel.config.size() != config_arity(kernel.type))
    throw ValidationError("kernel '" + name + "' expects " +
                          std::to_string(config_arity(kernel.type)) +
                          " config entries, got " + std::to_string(kernel.config.size()));
  for (auto v : kernel.config)
    if (v < 0) throw ValidationError("kernel '" + name + "' has a negative config entry");
  const ConfigLayout layout = layout_of(kernel.type);
  if (layout == ConfigLayout::kConcat) {
    if (kernel.config[0] < 1) throw ValidationError("concat kernel needs HW >= 1");
    int nonzero = 0;
    for (std::size_t i = 1; i < 5; ++i) nonzero += kernel.config[i] > 0 ? 1 : 0;
    if (nonzero < 2 || kernel.config[1] < 1)
      throw ValidationError("concat kernel needs at least two input channel entries");
  } else {
    // Every remaining dimension is a size, stride or channel count.
    for (auto v : kernel.config)
      if (v < 1)
        throw ValidationError("kernel '" + name + "' config entries must be >= 1");
  }
  if (kernel.out_hw < 1) throw ValidationError("kernel '" + name + "' needs out_hw >= 1");
}

KernelInstance make_kernel(KernelType type, std::vector<std::int64_t> config,
                           Padding padding) {
  KernelInstance k;
  k.type = type;
  k.config = std::move(config);
  if (k.config.size() != config_arity(type))
    throw ValidationError("kernel '" + std::string(to_string(type)) + "' expects " +
                          std::to_string(config_arity(type)) + " config entries");
  validate_kernel(k);
  k.out_hw = implied_out_hw(type, k.config, padding);
  return k;
}

std::string kernel_signature(KernelType type, std::span<const std::int64_t> config) {
  std::string out(to_string(type));
  out += '(';
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(config[i]);
  }
  out += ')';
  return out;
}

std::string kernel_signature(const KernelInstance& kernel) {
  return kernel_signature(kernel.type, kernel.config);
}

KernelSequence fuse_kernels(const ModelGraph& graph, const ShapeInference& shapes) {
  std::map<std::string, std::vector<const PrimitiveOp*>, std::less<>> consumers;
  for (const auto& op : graph.ops)
    for (const auto& in : op.inputs) consumers[in].push_back(&op);

  std::set<std::string, std::less<>> assigned;
  // The next op of a fusable chain: the sole consumer of `op`, itself
  // single-input and not yet part of a kernel.
  auto sole_consumer = [&](const PrimitiveOp& op) -> const PrimitiveOp* {
    auto it = consumers.find(op.id);
    if (it == consumers.end() || it->second.size() != 1) return nullptr;
    const PrimitiveOp* next = it->second.front();
    if (next->inputs.size() != 1 || assigned.count(next->id)) return nullptr;
    return next;
  };

  KernelSequence seq;
  seq.model_name = graph.name;
  for (const auto& id : topological_order(graph)) {
    if (assigned.count(id)) continue;
    const PrimitiveOp& lead = *graph.find(id);
    const OpShapes& in_shapes = shapes.at(lead.id);
    std::vector<const PrimitiveOp*> chain{&lead};
    KernelInstance k;

    const bool conv_like = lead.kind == OpKind::kConv || lead.kind == OpKind::kDwconv;
    if (conv_like) {
      const bool dw = lead.kind == OpKind::kDwconv;
      k.type = dw ? KernelType::kDwconv : KernelType::kConv;
      if (lead.activation != Activation::kNone) {
        k.type = dw ? KernelType::kDwconvRelu : KernelType::kConvRelu;
      } else if (const PrimitiveOp* next = sole_consumer(lead)) {
        if (next->kind == OpKind::kBn) {
          const PrimitiveOp* act = nullptr;
          if (next->activation == Activation::kNone) {
            const PrimitiveOp* after = sole_consumer(*next);
            if (after && is_relu_like(after->kind)) act = after;
          }
          if (next->activation != Activation::kNone || act) {
            k.type = dw ? KernelType::kDwconvBnRelu : KernelType::kConvBnRelu;
            chain.push_back(next);
            if (act) chain.push_back(act);
          }
        } else if (is_relu_like(next->kind)) {
          k.type = dw ? KernelType::kDwconvRelu : KernelType::kConvRelu;
          chain.push_back(next);
        }
      }
      const std::int64_t ks = lead.attr("ks");
      const std::int64_t stride = lead.attr("stride");
      if (dw) {
        k.config = {in_shapes.input.hw, in_shapes.input.channels, ks, stride};
      } else {
        k.config = {in_shapes.input.hw, in_shapes.input.channels, lead.attr("cout"), ks,
                    stride};
      }
      k.out_hw = in_shapes.output.hw;
    } else if (lead.kind == OpKind::kBn) {
      k.type = KernelType::kBn;
      if (lead.activation != Activation::kNone) {
        k.type = KernelType::kBnRelu;
      } else if (const PrimitiveOp* next = sole_consumer(lead);
                 next && is_relu_like(next->kind)) {
        k.type = KernelType::kBnRelu;
        chain.push_back(next);
      }
      k.config = {in_shapes.input.hw, in_shapes.input.channels};
      k.out_hw = in_shapes.output.hw;
    } else {
      switch (lead.kind) {
        case OpKind::kRelu:
        case OpKind::kRelu6:
          k.type = KernelType::kRelu;
          break;
        case OpKind::kAvgpool:
          k.type = KernelType::kAvgpool;
          break;
        case OpKind::kMaxpool:
          k.type = KernelType::kMaxpool;
          break;
        case OpKind::kGlobalpool:
          k.type = KernelType::kGlobalpool;
          break;
        case OpKind::kFc:
          k.type = KernelType::kFc;
          break;
        case OpKind::kConcat:
          k.type = KernelType::kConcat;
          break;
        case OpKind::kAdd:
          k.type = KernelType::kAdd;
          break;
        default:
          k.type = KernelType::kOthers;
          break;
      }
      const TensorShape in = in_shapes.input;
      switch (layout_of(k.type)) {
        case ConfigLayout::kPool:
          k.config = {in.hw, in.channels, lead.attr("ks"), lead.attr("stride")};
          break;
        case ConfigLayout::kFc:
          k.config = {in.hw * in.hw * in.channels, lead.attr("cout")};
          break;
        case ConfigLayout::kConcat:
          k.config = {in.hw, 0, 0, 0, 0};
          for (std::size_t i = 0; i < in_shapes.input_channels.size(); ++i)
            k.config[i + 1] = in_shapes.input_channels[i];
          break;
        default:
          k.config = {in.hw, in.channels};
          break;
      }
      k.out_hw = in_shapes.output.hw;
    }

    for (const PrimitiveOp* op : chain) {
      assigned.insert(op->id);
      k.source_ops.push_back(op->id);
    }
    validate_kernel(k);
    seq.kernels.push_back(std::move(k));
  }
  return seq;
}

KernelSequence fuse_kernels(const ModelGraph& graph, Padding padding) {
  return fuse_kernels(graph, infer_shapes(graph, padding));
}

std::string kernel_sequence_to_csv(const KernelSequence& sequence) {
  std::ostringstream out;
  out << "index,kernel_type";
  for (auto c : kConfigColumns) out << ',' << c;
  out << ",out_hw,signature\n";
  for (std::size_t i = 0; i < sequence.kernels.size(); ++i) {
    const auto& k = sequence.kernels[i];
    out << i << ',' << to_string(k.type);
    for (const auto& col : to_config_columns(k.type, k.config)) {
      out << ',';
      if (col) out << *col;
    }
    // Signatures contain commas, so the field is quoted.
    out << ',' << k.out_hw << ",\"" << kernel_signature(k) << "\"\n";
  }
  return out.str();
}

}  // namespace edgewatt
