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

#include "edgewatt/cost.hpp"

#include <string>

#include "edgewatt/error.hpp"

namespace edgewatt {

namespace {

// Elementwise passes (bn, relu) fused after the compute part.
std::int64_t fused_passes(KernelType type) {
  switch (type) {
    case KernelType::kConvBnRelu:
    case KernelType::kDwconvBnRelu:
      return 2;
    case KernelType::kConvRelu:
    case KernelType::kDwconvRelu:
      return 1;
    default:
      return 0;
  }
}

void check_out_hw(const KernelInstance& k, std::int64_t out_hw) {
  bool ok = false;
  switch (layout_of(k.type)) {
    case ConfigLayout::kConvFamily:
    case ConfigLayout::kDwconvFamily:
    case ConfigLayout::kPool: {
      const std::int64_t hw = k.config[0];
      const std::int64_t ks = k.config[layout_of(k.type) == ConfigLayout::kConvFamily ? 3 : 2];
      const std::int64_t s = k.config[layout_of(k.type) == ConfigLayout::kConvFamily ? 4 : 3];
      ok = out_hw == windowed_output_hw(hw, ks, s, Padding::kSame) ||
           (ks <= hw && out_hw == windowed_output_hw(hw, ks, s, Padding::kValid));
      break;
    }
    case ConfigLayout::kFc:
      ok = out_hw == 1;
      break;
    case ConfigLayout::kConcat:
      ok = out_hw == k.config[0];
      break;
    case ConfigLayout::kSpatial:
      ok = out_hw == (k.type == KernelType::kGlobalpool ? 1 : k.config[0]);
      break;
  }
  if (!ok)
    throw DomainError("out_hw " + std::to_string(out_hw) + " is inconsistent with " +
                      kernel_signature(k));
}

}  // namespace

KernelCost& KernelCost::operator+=(const KernelCost& other) {
  flops += other.flops;
  params += other.params;
  input_volume += other.input_volume;
  output_volume += other.output_volume;
  return *this;
}

KernelCost kernel_cost(const KernelInstance& k, std::int64_t out_hw) {
  validate_kernel(k);
  check_out_hw(k, out_hw);
  const auto& c = k.config;
  const std::int64_t o2 = out_hw * out_hw;
  KernelCost cost;
  switch (layout_of(k.type)) {
    case ConfigLayout::kConvFamily: {
      const std::int64_t hw = c[0], cin = c[1], cout = c[2], ks = c[3];
      cost.flops = 2 * o2 * ks * ks * cin * cout + fused_passes(k.type) * o2 * cout;
      cost.params = ks * ks * cin * cout;
      cost.input_volume = hw * hw * cin;
      cost.output_volume = o2 * cout;
      break;
    }
    case ConfigLayout::kDwconvFamily: {
      const std::int64_t hw = c[0], cin = c[1], ks = c[2];
      cost.flops = 2 * o2 * ks * ks * cin + fused_passes(k.type) * o2 * cin;
      cost.params = ks * ks * cin;
      cost.input_volume = hw * hw * cin;
      cost.output_volume = o2 * cin;
      break;
    }
    case ConfigLayout::kPool: {
      const std::int64_t hw = c[0], cin = c[1], ks = c[2];
      cost.flops = o2 * ks * ks * cin;
      cost.input_volume = hw * hw * cin;
      cost.output_volume = o2 * cin;
      break;
    }
    case ConfigLayout::kFc:
      cost.flops = 2 * c[0] * c[1];
      cost.params = c[0] * c[1];
      cost.input_volume = c[0];
      cost.output_volume = c[1];
      break;
    case ConfigLayout::kConcat: {
      const std::int64_t hw = c[0];
      const std::int64_t channels = c[1] + c[2] + c[3] + c[4];
      cost.input_volume = hw * hw * channels;
      cost.output_volume = hw * hw * channels;
      break;
    }
    case ConfigLayout::kSpatial: {
      const std::int64_t hw = c[0], cin = c[1];
      const std::int64_t volume = hw * hw * cin;
      cost.input_volume = volume;
      cost.output_volume = o2 * cin;
      switch (k.type) {
        case KernelType::kBnRelu:
          cost.flops = 2 * volume;
          cost.params = 2 * cin;
          break;
        case KernelType::kBn:
          cost.flops = volume;
          cost.params = 2 * cin;
          break;
        case KernelType::kRelu:
        case KernelType::kAdd:
        case KernelType::kGlobalpool:
          cost.flops = volume;
          break;
        default:  // others: op semantics unknown, no FLOPs attributed
          break;
      }
      break;
    }
  }
  return cost;
}

KernelCost model_cost(const KernelSequence& sequence) {
  KernelCost total;
  for (const auto& k : sequence.kernels) total += kernel_cost(k, k.out_hw);
  return total;
}

}  // namespace edgewatt
