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

#pragma once

#include <cstdint>

#include "edgewatt/fusion.hpp"

namespace edgewatt {

/// Static cost counts of a kernel. A multiply-accumulate is two FLOPs,
/// elementwise passes are one FLOP per element, biases are ignored.
struct KernelCost {
  std::int64_t flops = 0;
  std::int64_t params = 0;
  std::int64_t input_volume = 0;
  std::int64_t output_volume = 0;

  KernelCost& operator+=(const KernelCost& other);
  friend KernelCost operator+(KernelCost a, const KernelCost& b) { return a += b; }
  friend bool operator==(const KernelCost&, const KernelCost&) = default;
};

/// Throws DomainError when `out_hw` cannot result from the kernel's config
/// under either padding mode.
KernelCost kernel_cost(const KernelInstance& kernel, std::int64_t out_hw);
inline KernelCost kernel_cost(const KernelInstance& kernel) {
  return kernel_cost(kernel, kernel.out_hw);
}

/// Componentwise sum over the sequence, in kernel order.
KernelCost model_cost(const KernelSequence& sequence);

}  // namespace edgewatt
