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
#include <set>
#include <string>

#include "edgewatt/dataset.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/fusion.hpp"
#include "edgewatt/synthetic.hpp"

using namespace edgewatt;

namespace {

const std::string kHeader =
    "device,processor,kernel_type,hw,cin,cout,ks,stride,cin2,cin3,cin4,energy_mj,latency_ms,"
    "avg_power_mw\n";

}  // namespace

TEST_CASE("kernel dataset rows") {
  const auto ok = parse_kernel_dataset(kHeader +
                                       "pixel4,cpu,conv_bn_relu,112,64,128,3,1,,,,125.232,,\n"
                                       "pixel4,cpu,conv_bn_relu,28,22,22,1,1,,,,0.064,0.032,2000\n");
  REQUIRE(ok.size() == 2);
  CHECK(ok[0].config == std::vector<std::int64_t>{112, 64, 128, 3, 1});
  CHECK(ok[0].energy_mj == 125.232);
  CHECK_FALSE(ok[0].latency_ms.has_value());
  CHECK(ok[1].energy_mj == 0.064);

  CHECK_THROWS_AS(parse_kernel_dataset(kHeader + "d,cpu,conv_bn_relu,112,64,128,3,1,,,,0,,\n"), Error);
  // 2000 mW for 0.05 ms is 0.1 mJ, more than 1% away from 0.064.
  CHECK_THROWS_AS(parse_kernel_dataset(kHeader + "d,cpu,conv,28,22,22,1,1,,,,0.064,0.05,2000\n"), Error);
  CHECK_THROWS_AS(parse_kernel_dataset(kHeader + "d,cpu,conv,28,22,22,1,1,5,,,0.064,,\n"), Error);
  CHECK_THROWS_AS(parse_kernel_dataset(kHeader + "d,tpu,conv,28,22,22,1,1,,,,0.064,,\n"), ParseError);
  CHECK_THROWS_AS(parse_kernel_dataset(kHeader + "d,cpu,conv2,28,22,22,1,1,,,,0.064,,\n"), ParseError);
  try {
    parse_kernel_dataset(kHeader + "d,cpu,fc,,8,8,,,,,,1,,\n" + "d,cpu,fc,,8,8,,,,,,2,,\n");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);
  }
  // Same signature on another processor is a different record.
  CHECK(parse_kernel_dataset(kHeader + "d,cpu,fc,,8,8,,,,,,1,,\n" + "d,gpu,fc,,8,8,,,,,,2,,\n").size() == 2);
}

TEST_CASE("kernel dataset round trip") {
  const auto oracle = SyntheticOracle::make_default(0.03, 11);
  std::vector<std::pair<KernelType, std::size_t>> mix;
  for (KernelType t : kAllKernelTypes) mix.emplace_back(t, 20);
  const auto records = synth_kernel_records(oracle, "dev", Processor::kGpu, mix, 11);
  CHECK(records.size() == 20 * kAllKernelTypes.size());
  CHECK(parse_kernel_dataset(kernel_dataset_to_csv(records)) == records);
}

TEST_CASE("model and application datasets round trip") {
  const auto oracle = SyntheticOracle::make_default();
  const auto bases = synthetic_family_bases();
  const auto set = synth_model_dataset(oracle, "dev", Processor::kCpu, bases, 2, 1);
  CHECK(set.records.size() == 8);
  CHECK(parse_model_dataset(model_dataset_to_csv(set.records)) == set.records);

  const auto apps = synth_app_records("dev", 1.0, 1.0, 1);
  CHECK(apps.size() == 35);
  CHECK(parse_app_dataset(app_dataset_to_csv(apps)) == apps);

  AppEnergyRecord bad = apps.front();
  bad.dnn_id = 10;
  bad.application = Application::kSegmentation;
  bad.delegate = Delegate::kGpu;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("delegate support matrix") {
  int supported = 0;
  for (int dnn = 1; dnn <= kReferenceDnnCount; ++dnn)
    for (Delegate d : kAllDelegates) supported += delegate_supported(dnn, d);
  CHECK(supported == 35);
  CHECK(application_of_dnn(1) == Application::kDetection);
  CHECK(application_of_dnn(12) == Application::kSpeechRecognition);
}

TEST_CASE("sample_kernel_configs") {
  const auto configs = sample_kernel_configs(KernelType::kConvBnRelu, 1032, 42);
  CHECK(configs.size() == 1032);
  CHECK(std::set<std::vector<std::int64_t>>(configs.begin(), configs.end()).size() == 1032);
  CHECK(sample_kernel_configs(KernelType::kConv, 1, 5) == sample_kernel_configs(KernelType::kConv, 1, 5));
  CHECK(sample_kernel_configs(KernelType::kConv, 50, 5) != sample_kernel_configs(KernelType::kConv, 50, 6));

  for (KernelType type : kAllKernelTypes) {
    for (const auto& c : sample_kernel_configs(type, 200, 3)) {
      CHECK(c.size() == config_arity(type));
      CHECK_NOTHROW(make_kernel(type, c));
      const ConfigLayout layout = layout_of(type);
      if (layout == ConfigLayout::kFc) {
        CHECK(c[0] >= kMinChannels);
        CHECK(c[1] <= kMaxFcUnits);
        continue;
      }
      CHECK(std::find(kSampledHw.begin(), kSampledHw.end(), c[0]) != kSampledHw.end());
      if (layout == ConfigLayout::kConvFamily || layout == ConfigLayout::kDwconvFamily ||
          layout == ConfigLayout::kPool) {
        const std::int64_t ks = c[c.size() - 2], s = c[c.size() - 1];
        CHECK(ks <= c[0]);
        CHECK(s <= c[0]);
        if (c[0] == 1) CHECK(ks == 1);
      }
      if (layout != ConfigLayout::kConcat) {
        CHECK(c[1] >= kMinChannels);
        CHECK(c[1] <= kMaxChannels);
      }
    }
  }
  CHECK_THROWS_AS(sample_kernel_configs(KernelType::kGlobalpool,
                                        static_cast<std::size_t>(config_domain_size(KernelType::kGlobalpool)) + 1, 1),
                  DomainError);
  CHECK_THROWS_AS(sample_kernel_configs(KernelType::kConv, 0, 1), DomainError);
}

TEST_CASE("generate_model_variants") {
  ModelGraphBuilder b("base", {56, 16});
  const auto c1 = b.conv("", 64, 3, 1);
  const auto r1 = b.unary(OpKind::kRelu, c1);
  const auto c2 = b.conv(r1, 32, 3, 2);
  b.fc(b.unary(OpKind::kGlobalpool, c2), 10);
  const ModelGraph base = b.build();

  const auto variants = generate_model_variants(base, 50, 9);
  REQUIRE(variants.size() == 50);
  std::set<std::int64_t> seen;
  for (const auto& v : variants) {
    const std::int64_t cout = v.find("conv1")->attr("cout");
    CHECK(cout >= 13);
    CHECK(cout <= 115);
    seen.insert(cout);
    for (const char* id : {"conv1", "conv2"}) {
      const std::int64_t ks = v.find(id)->attr("ks");
      CHECK((ks == 1 || ks == 3 || ks == 5 || ks == 7 || ks == 9));
    }
    CHECK_NOTHROW(fuse_kernels(v));
  }
  CHECK(seen.size() > 10);
  CHECK(variants[7].name == "base_v7");
  CHECK(generate_model_variants(base, 50, 9) == variants);

  auto mobilenet = synthetic_family_bases()[2];
  CHECK(generate_model_variants(mobilenet, 50, 1).size() == 50);

  ModelGraphBuilder nc("noconv", {14, 8});
  nc.fc(nc.unary(OpKind::kGlobalpool, nc.pool(OpKind::kMaxpool, "", 2, 2)), 4);
  const ModelGraph plain = nc.build();
  for (const auto& v : generate_model_variants(plain, 3, 1)) CHECK(v.ops == plain.ops);
}
