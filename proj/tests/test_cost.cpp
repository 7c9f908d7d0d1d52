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

#include <doctest.h>

#include "edgewatt/cost.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/fusion.hpp"
#include "test_support.hpp"

using namespace edgewatt;

TEST_CASE("kernel cost formulas") {
  const KernelInstance conv = make_kernel(KernelType::kConvRelu, {224, 3, 70, 7, 4}, Padding::kValid);
  CHECK(conv.out_hw == 55);
  // 2 * 55^2 * 7^2 * 3 * 70 for the convolution plus one relu pass over the output.
  CHECK(kernel_cost(conv).flops == 62254500 + 55 * 55 * 70);
  CHECK(kernel_cost(make_kernel(KernelType::kConv, {224, 3, 70, 7, 4}, Padding::kValid)).flops ==
        62254500);
  CHECK(kernel_cost(conv).params == 7 * 7 * 3 * 70);

  CHECK(kernel_cost(make_kernel(KernelType::kConcat, {14, 32, 64, 0, 0})).flops == 0);
  CHECK(kernel_cost(make_kernel(KernelType::kConcat, {14, 32, 64, 16, 8})).output_volume ==
        14 * 14 * 120);
  CHECK(kernel_cost(make_kernel(KernelType::kFc, {204, 3686})).flops == 1503888);

  const KernelInstance dw = make_kernel(KernelType::kDwconv, {56, 32, 3, 2});
  CHECK(kernel_cost(dw).flops == 2 * 28 * 28 * 9 * 32);
  const KernelInstance pool = make_kernel(KernelType::kMaxpool, {28, 16, 3, 2});
  CHECK(kernel_cost(pool).flops == 14 * 14 * 9 * 16);
  CHECK(kernel_cost(make_kernel(KernelType::kRelu, {8, 10})).flops == 640);
  CHECK(kernel_cost(make_kernel(KernelType::kBnRelu, {8, 10})).flops == 2 * 640);
}

TEST_CASE("inconsistent out_hw is rejected") {
  const KernelInstance conv = make_kernel(KernelType::kConv, {224, 3, 70, 7, 4});
  CHECK_NOTHROW(kernel_cost(conv, 55));
  CHECK_NOTHROW(kernel_cost(conv, 56));
  CHECK_THROWS_AS(kernel_cost(conv, 100), DomainError);
}

TEST_CASE("model cost") {
  CHECK(model_cost(KernelSequence{}) == KernelCost{});
  KernelSequence one{"one", {make_kernel(KernelType::kFc, {10, 20})}};
  CHECK(model_cost(one) == kernel_cost(one.kernels[0]));

  // Hand accumulation over the AlexNet 1 layers, same padding.
  const KernelSequence seq = fuse_kernels(testing::alexnet_fixture(1));
  auto conv = [](std::int64_t hw, std::int64_t cin, std::int64_t cout, std::int64_t ks,
                 std::int64_t s) {
    const std::int64_t o = (hw + s - 1) / s;
    return 2 * o * o * ks * ks * cin * cout + o * o * cout;  // fused relu pass
  };
  auto pool = [](std::int64_t hw, std::int64_t c, std::int64_t ks, std::int64_t s) {
    const std::int64_t o = (hw + s - 1) / s;
    return o * o * ks * ks * c;
  };
  const std::int64_t expected = conv(224, 3, 89, 5, 4) + pool(224, 89, 3, 2) +
                                conv(28, 89, 153, 7, 1) + pool(28, 153, 3, 2) +
                                conv(13, 153, 460, 5, 1) + conv(13, 460, 230, 1, 1) +
                                conv(13, 230, 204, 7, 1) + pool(13, 204, 3, 2) + 1 * 204 +
                                2 * 204 * 3686 + 2 * 3686 * 6144 + 2 * 3686 * 1000;
  CHECK(model_cost(seq).flops == expected);
}

TEST_CASE("cost properties") {
  const KernelSequence a = fuse_kernels(testing::alexnet_fixture(1));
  const KernelSequence b = fuse_kernels(testing::alexnet_fixture(2));
  KernelSequence ab = a;
  ab.kernels.insert(ab.kernels.end(), b.kernels.begin(), b.kernels.end());
  CHECK(model_cost(ab) == model_cost(a) + model_cost(b));

  for (std::int64_t k : {1, 2, 3, 4}) {
    const auto small = kernel_cost(make_kernel(KernelType::kConv, {32, 16, 24, k, 1}));
    const auto big = kernel_cost(make_kernel(KernelType::kConv, {32, 16, 24, 2 * k, 1}));
    CHECK(big.flops == 4 * small.flops);
  }

  std::int64_t prev = 0;
  for (std::int64_t cin : {1, 2, 8, 64}) {
    const auto c = kernel_cost(make_kernel(KernelType::kConv, {32, cin, 24, 3, 1})).flops;
    CHECK(c >= prev);
    prev = c;
  }
}
