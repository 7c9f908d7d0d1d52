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

#include <algorithm>
#include <map>
#include <string>

#include "edgewatt/dataset.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/fusion.hpp"
#include "edgewatt/synthetic.hpp"
#include "test_support.hpp"

using namespace edgewatt;

namespace {

std::vector<KernelType> types_of(const KernelSequence& seq) {
  std::vector<KernelType> out;
  for (const auto& k : seq.kernels) out.push_back(k.type);
  return out;
}

void check_partition(const ModelGraph& g) {
  const KernelSequence seq = fuse_kernels(g);
  std::vector<std::string> covered;
  for (const auto& k : seq.kernels) {
    covered.insert(covered.end(), k.source_ops.begin(), k.source_ops.end());
    int compute = 0;
    for (const auto& id : k.source_ops) compute += is_compute(g.find(id)->kind);
    CHECK(compute <= 1);
    CHECK(k.config.size() == config_arity(k.type));
  }
  std::vector<std::string> all;
  for (const auto& op : g.ops) all.push_back(op.id);
  std::sort(covered.begin(), covered.end());
  std::sort(all.begin(), all.end());
  CHECK(covered == all);
}

}  // namespace

TEST_CASE("conv bn relu chain fuses into one kernel") {
  ModelGraphBuilder b("m", {112, 64});
  const auto c = b.conv("", 128, 3, 1);
  b.unary(OpKind::kRelu, b.unary(OpKind::kBn, c));
  const KernelSequence seq = fuse_kernels(b.build());
  REQUIRE(seq.kernels.size() == 1);
  CHECK(seq.kernels[0].type == KernelType::kConvBnRelu);
  CHECK(seq.kernels[0].config == std::vector<std::int64_t>{112, 64, 128, 3, 1});
  CHECK(seq.kernels[0].source_ops == std::vector<std::string>{"conv1", "bn1", "relu1"});
}

TEST_CASE("alexnet fixtures fuse into twelve kernels") {
  for (int which : {1, 2}) {
    const KernelSequence seq = fuse_kernels(testing::alexnet_fixture(which));
    REQUIRE(seq.kernels.size() == 12);
    std::map<KernelType, int> counts;
    for (auto t : types_of(seq)) ++counts[t];
    CHECK(counts == std::map<KernelType, int>{{KernelType::kConvRelu, 5},
                                              {KernelType::kMaxpool, 3},
                                              {KernelType::kGlobalpool, 1},
                                              {KernelType::kFc, 3}});
  }
  const KernelSequence seq = fuse_kernels(testing::alexnet_fixture(1));
  CHECK(kernel_signature(seq.kernels[0]) == "conv_relu(224,3,89,5,4)");
  CHECK(kernel_signature(seq.kernels[1]) == "maxpool(224,89,3,2)");
  CHECK(kernel_signature(seq.kernels[8]) == "globalpool(1,204)");
  CHECK(kernel_signature(seq.kernels[11]) == "fc(3686,1000)");
}

TEST_CASE("a second consumer of an intermediate tensor blocks fusion") {
  ModelGraphBuilder b("m", {16, 8});
  const auto c = b.conv("", 8, 3, 1);
  const auto bn = b.unary(OpKind::kBn, c);
  const auto r = b.unary(OpKind::kRelu, bn);
  b.add(OpKind::kConcat, {bn, r});
  const KernelSequence seq = fuse_kernels(b.build());
  CHECK(types_of(seq) == std::vector<KernelType>{KernelType::kConv, KernelType::kBn,
                                                 KernelType::kRelu, KernelType::kConcat});
}

TEST_CASE("fusion rule table") {
  SUBCASE("relu6 fuses like relu") {
    ModelGraphBuilder b("m", {16, 8});
    b.unary(OpKind::kRelu6, b.conv("", 8, 3, 1));
    CHECK(types_of(fuse_kernels(b.build())) == std::vector<KernelType>{KernelType::kConvRelu});
  }
  SUBCASE("depthwise chain") {
    ModelGraphBuilder b("m", {16, 8});
    b.unary(OpKind::kRelu, b.unary(OpKind::kBn, b.dwconv("", 3, 1)));
    b.unary(OpKind::kRelu, b.dwconv("relu1", 3, 2));
    b.dwconv("relu2", 3, 1);
    CHECK(types_of(fuse_kernels(b.build())) ==
          std::vector<KernelType>{KernelType::kDwconvBnRelu, KernelType::kDwconvRelu,
                                  KernelType::kDwconv});
  }
  SUBCASE("standalone bn relu") {
    ModelGraphBuilder b("m", {16, 8});
    b.unary(OpKind::kRelu, b.unary(OpKind::kBn, b.pool(OpKind::kMaxpool, "", 2, 2)));
    CHECK(types_of(fuse_kernels(b.build())) ==
          std::vector<KernelType>{KernelType::kMaxpool, KernelType::kBnRelu});
  }
  SUBCASE("fc is never fused") {
    ModelGraphBuilder b("m", {1, 8});
    b.unary(OpKind::kRelu, b.fc("", 4));
    CHECK(types_of(fuse_kernels(b.build())) ==
          std::vector<KernelType>{KernelType::kFc, KernelType::kRelu});
  }
  SUBCASE("unsupported op kinds become others") {
    ModelGraphBuilder b("m", {7, 12});
    b.unary(OpKind::kSoftmax, "");
    const KernelSequence seq = fuse_kernels(b.build());
    REQUIRE(seq.kernels.size() == 1);
    CHECK(seq.kernels[0].type == KernelType::kOthers);
    CHECK(seq.kernels[0].config == std::vector<std::int64_t>{7, 12});
  }
}

TEST_CASE("folded activation attribute fuses like an explicit relu") {
  ModelGraphBuilder explicit_relu("m", {28, 16});
  explicit_relu.unary(OpKind::kRelu, explicit_relu.conv("", 32, 3, 1));
  ModelGraphBuilder folded("m", {28, 16});
  folded.add(OpKind::kConv, {}, {{"cout", 32}, {"ks", 3}, {"stride", 1}}, Activation::kRelu);
  const auto a = fuse_kernels(explicit_relu.build());
  const auto b = fuse_kernels(folded.build());
  REQUIRE(a.kernels.size() == b.kernels.size());
  CHECK(kernel_signature(a.kernels[0]) == kernel_signature(b.kernels[0]));
}

TEST_CASE("kernel signatures") {
  CHECK(kernel_signature(make_kernel(KernelType::kConvBnRelu, {112, 64, 128, 3, 1})) ==
        "conv_bn_relu(112,64,128,3,1)");
  CHECK(kernel_signature(make_kernel(KernelType::kRelu, {1, 1})) == "relu(1,1)");
  CHECK(kernel_signature(make_kernel(KernelType::kFc, {3, 4})) ==
        kernel_signature(make_kernel(KernelType::kFc, {3, 4})));
  CHECK(kernel_signature(make_kernel(KernelType::kFc, {3, 4})) !=
        kernel_signature(make_kernel(KernelType::kFc, {34, 1})));
  CHECK_THROWS_AS(make_kernel(KernelType::kConv, {8, 8, 8}), ValidationError);
}

TEST_CASE("every op lands in exactly one kernel and no kernel holds two compute ops") {
  check_partition(testing::alexnet_fixture(1));
  check_partition(testing::alexnet_fixture(2));
  for (const auto& base : synthetic_family_bases()) {
    check_partition(base);
    for (const auto& v : generate_model_variants(base, 3, 7)) check_partition(v);
  }
}

TEST_CASE("kernel sequence table") {
  const std::string csv = kernel_sequence_to_csv(fuse_kernels(testing::alexnet_fixture(2)));
  CHECK(csv.rfind("index,kernel_type,hw,cin,cout,ks,stride,cin2,cin3,cin4,out_hw,signature\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(csv.find("\"conv_relu(224,3,70,7,4)\"") != std::string::npos);
}
