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

// Kernel fusion: the executed kernel sequence of a model graph and the
// configuration tuple of every kernel.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgewatt/model_ir.hpp"

namespace edgewatt {

enum class KernelType {
  kConvBnRelu,
  kConvRelu,
  kConv,
  kDwconvBnRelu,
  kDwconvRelu,
  kDwconv,
  kBnRelu,
  kBn,
  kRelu,
  kAvgpool,
  kMaxpool,
  kGlobalpool,
  kFc,
  kConcat,
  kAdd,
  kOthers,
};

inline constexpr std::array<KernelType, 16> kAllKernelTypes = {
    KernelType::kConvBnRelu, KernelType::kConvRelu,   KernelType::kConv,
    KernelType::kDwconvBnRelu, KernelType::kDwconvRelu, KernelType::kDwconv,
    KernelType::kBnRelu,     KernelType::kBn,         KernelType::kRelu,
    KernelType::kAvgpool,    KernelType::kMaxpool,    KernelType::kGlobalpool,
    KernelType::kFc,         KernelType::kConcat,     KernelType::kAdd,
    KernelType::kOthers,
};

/// Shape of a kernel type's configuration tuple.
enum class ConfigLayout {
  kConvFamily,    // (HW, Cin, Cout, KS, S)
  kDwconvFamily,  // (HW, Cin, KS, S)
  kPool,          // (HW, Cin, KS, S)
  kSpatial,       // (HW, Cin)
  kFc,            // (Cin, Cout)
  kConcat,        // (HW, Cin1, Cin2, Cin3, Cin4), unused inputs are 0
};

std::string_view to_string(KernelType type);
std::optional<KernelType> kernel_type_from_string(std::string_view name);
ConfigLayout layout_of(KernelType type);
std::size_t config_arity(KernelType type);

/// Column names of the flat tabular config encoding shared by the kernel
/// dataset and kernel-sequence tables.
inline constexpr std::array<std::string_view, 8> kConfigColumns = {
    "hw", "cin", "cout", "ks", "stride", "cin2", "cin3", "cin4"};
using ConfigColumns = std::array<std::optional<std::int64_t>, 8>;

ConfigColumns to_config_columns(KernelType type, std::span<const std::int64_t> config);
/// Inverse of to_config_columns. Throws ValidationError when a required
/// column is empty or an unused one is set.
std::vector<std::int64_t> from_config_columns(KernelType type,
                                              const ConfigColumns& columns);

struct KernelInstance {
  KernelType type = KernelType::kOthers;
  std::vector<std::int64_t> config;
  /// Spatial size of the kernel's output; 1 for fc and globalpool.
  std::int64_t out_hw = 1;
  std::vector<std::string> source_ops;

  friend bool operator==(const KernelInstance&, const KernelInstance&) = default;
};

/// Throws ValidationError if arity or value invariants are violated.
void validate_kernel(const KernelInstance& kernel);

/// Builds a standalone kernel (no source ops), deriving out_hw from the
/// config under `padding`.
KernelInstance make_kernel(KernelType type, std::vector<std::int64_t> config,
                           Padding padding = Padding::kSame);

/// Output size implied by a kernel's config under `padding`.
std::int64_t implied_out_hw(KernelType type, std::span<const std::int64_t> config,
                            Padding padding);

struct KernelSequence {
  std::string model_name;
  std::vector<KernelInstance> kernels;
};

/// Canonical `type(c1,c2,...)` text; injective over (type, config).
std::string kernel_signature(const KernelInstance& kernel);
std::string kernel_signature(KernelType type, std::span<const std::int64_t> config);

/// Applies the fixed fusion rule table:
///   conv|dwconv [+ bn] + relu|relu6  -> *_bn_relu / *_relu
///   bn + relu|relu6                  -> bn_relu
/// Every intermediate tensor inside a fused kernel must have exactly one
/// consumer. Kernels are ordered by the topological position of their
/// first op.
KernelSequence fuse_kernels(const ModelGraph& graph, const ShapeInference& shapes);
KernelSequence fuse_kernels(const ModelGraph& graph, Padding padding = Padding::kSame);

/// One row per kernel: index, kernel_type, config columns, out_hw, signature.
std::string kernel_sequence_to_csv(const KernelSequence& sequence);

}  // namespace edgewatt
