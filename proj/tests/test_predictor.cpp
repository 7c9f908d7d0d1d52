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
#include <cmath>
#include <filesystem>
#include <fstream>

#include "edgewatt/cost.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/eval.hpp"
#include "edgewatt/predictor.hpp"
#include "edgewatt/synthetic.hpp"
#include "edgewatt/table.hpp"
#include "test_support.hpp"

using namespace edgewatt;

namespace {

std::vector<KernelEnergyRecord> default_records(double noise = 0.0, std::uint64_t seed = 42) {
  const auto oracle = SyntheticOracle::make_default(noise, seed);
  const auto mix = default_training_mix();
  return synth_kernel_records(oracle, "dev", Processor::kCpu, mix, seed);
}

const PredictorBundle& default_bundle() {
  static const PredictorBundle bundle = train_bundle(default_records(), Processor::kCpu, {}, 42);
  return bundle;
}

ForestParams small_forest() {
  ForestParams p;
  p.n_trees = 20;
  return p;
}

}  // namespace

TEST_CASE("feature vectors") {
  const auto conv = make_kernel(KernelType::kConvBnRelu, {56, 32, 64, 3, 2});
  const auto f = kernel_features(conv);
  CHECK(f.size() == feature_names(KernelType::kConvBnRelu).size());
  CHECK(feature_names(KernelType::kConvBnRelu) ==
        std::vector<std::string>{"hw", "cin", "cout", "ks", "stride", "flops", "params",
                                 "input_volume", "output_volume"});
  CHECK(f[5] == static_cast<double>(kernel_cost(conv).flops));
  for (KernelType t : kAllKernelTypes) CHECK(feature_names(t).size() == config_arity(t) + 4);
}

TEST_CASE("constant energies are reproduced") {
  std::vector<KernelEnergyRecord> recs;
  for (int i = 0; i < 5; ++i) {
    KernelEnergyRecord r;
    r.device = "d";
    r.kernel_type = KernelType::kFc;
    r.config = {64, 32};
    r.energy_mj = 7.0;
    recs.push_back(r);
  }
  const PredictorBundle b = train_bundle(recs, Processor::kCpu, small_forest(), 1);
  CHECK(predict_kernel_energy(b, make_kernel(KernelType::kFc, {64, 32})) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("training configs are predicted close to the oracle") {
  const auto oracle = SyntheticOracle::make_default();
  const PredictorBundle& b = default_bundle();
  std::vector<double> errors;
  for (const auto& r : default_records()) {
    if (r.kernel_type != KernelType::kConvBnRelu) continue;
    const double truth = synth_energy(oracle, kernel_of(r), Processor::kCpu);
    errors.push_back(std::abs(predict_kernel_energy(b, kernel_of(r)) - truth) / truth);
  }
  REQUIRE(errors.size() == 800);
  // Bootstrap leaves each row out of about a third of the trees, so the bound
  // is asserted on the bulk of the distribution rather than on every row.
  std::sort(errors.begin(), errors.end());
  CHECK(errors[errors.size() / 2] <= 0.05);
  CHECK(errors[errors.size() * 3 / 4] <= 0.05);
}

TEST_CASE("unknown kernel types") {
  CHECK_FALSE(kernel_type_from_string("others2").has_value());
  const PredictorBundle& b = default_bundle();
  CHECK_FALSE(b.has(KernelType::kConcat));
  const auto cat = make_kernel(KernelType::kConcat, {14, 16, 16, 0, 0});
  CHECK_THROWS_AS(predict_kernel_energy(b, cat), UnknownKernelTypeError);
  KernelSequence seq{"m", {make_kernel(KernelType::kFc, {64, 32}), cat}};
  CHECK_THROWS_AS(predict_model_energy(b, seq), UnknownKernelTypeError);
  const ModelPrediction p = predict_model_energy(b, seq, true);
  CHECK(p.unknown_kernels == 1);
  CHECK(p.per_kernel_mj[1] == 0.0);
  CHECK(p.total_mj == p.per_kernel_mj[0]);
}

TEST_CASE("model prediction sums kernel predictions in order") {
  const PredictorBundle& b = default_bundle();
  CHECK(predict_model_energy(b, KernelSequence{}).total_mj == 0.0);
  const auto k = make_kernel(KernelType::kMaxpool, {56, 64, 3, 2});
  CHECK(predict_model_energy(b, KernelSequence{"one", {k}}).total_mj == predict_kernel_energy(b, k));

  const KernelSequence seq = fuse_kernels(testing::alexnet_fixture(1));
  const ModelPrediction p = predict_model_energy(b, seq);
  REQUIRE(p.per_kernel_mj.size() == 12);
  double sum = 0.0;
  for (std::size_t i = 0; i < seq.kernels.size(); ++i) {
    CHECK(p.per_kernel_mj[i] == predict_kernel_energy(b, seq.kernels[i]));
    sum += p.per_kernel_mj[i];
  }
  CHECK(p.total_mj == sum);
  const double truth = synth_model_energy(SyntheticOracle::make_default(), seq, Processor::kCpu);
  CHECK(std::abs(p.total_mj - truth) <= 0.15 * truth);
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(train_bundle({}, Processor::kCpu, {}, 1), DomainError);
  const auto recs = default_records();
  CHECK_THROWS_AS(train_bundle(recs, Processor::kGpu, {}, 1), DomainError);
  std::vector<KernelEnergyRecord> one(recs.begin(), recs.begin() + 1);
  CHECK_THROWS_AS(train_bundle(one, Processor::kCpu, {}, 1), DomainError);
}

TEST_CASE("bundle determinism across thread counts") {
  const auto recs = default_records();
  ForestParams serial = small_forest();
  ForestParams parallel = small_forest();
  parallel.threads = 4;
  const std::string a = serialize_bundle(train_bundle(recs, Processor::kCpu, serial, 7));
  CHECK(a == serialize_bundle(train_bundle(recs, Processor::kCpu, parallel, 7)));
  CHECK(a != serialize_bundle(train_bundle(recs, Processor::kCpu, serial, 8)));
}

TEST_CASE("bundle save and load") {
  testing::TempDir dir("bundle");
  const auto oracle = SyntheticOracle::make_default();
  std::vector<std::pair<KernelType, std::size_t>> mix;
  for (KernelType t : kAllKernelTypes) mix.emplace_back(t, 30);
  const auto recs = synth_kernel_records(oracle, "dev", Processor::kCpu, mix, 3);
  const PredictorBundle b = train_bundle(recs, Processor::kCpu, small_forest(), 3);
  CHECK(b.forests.size() == 16);
  save_bundle(b, dir / "b.json");
  const PredictorBundle back = load_bundle(dir / "b.json");
  CHECK(back.forests.size() == 16);
  for (KernelType t : kAllKernelTypes) CHECK(back.has(t));
  CHECK(back.forests == b.forests);
  CHECK(back.training_fingerprint == b.training_fingerprint);
  CHECK(serialize_bundle(back) == serialize_bundle(b));

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const KernelType t = kAllKernelTypes[static_cast<std::size_t>(rng.uniform_int(0, 15))];
    const auto cfg = sample_kernel_configs(t, 1, static_cast<std::uint64_t>(i))[0];
    const auto k = make_kernel(t, cfg);
    CHECK(predict_kernel_energy(back, k) == predict_kernel_energy(b, k));
  }

  const std::string text = read_text_file(dir / "b.json");
  CHECK_THROWS_AS(parse_bundle(text.substr(0, text.size() / 2)), CorruptionError);
  std::string future = text;
  const auto pos = future.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  future.replace(pos, 19, "\"format_version\": 9");
  CHECK_THROWS_AS(parse_bundle(future), VersionError);
  CHECK_THROWS_AS(load_bundle(dir / "missing.json"), Error);
}

TEST_CASE("flops baseline") {
  std::vector<std::pair<double, double>> exact;
  for (double f : {1e6, 3e6, 8e6, 2e7}) exact.emplace_back(f, 2e-6 * f);
  const FlopsBaseline a = train_flops_baseline(exact);
  CHECK(a.slope == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(std::abs(a.intercept) <= 1e-12 * 40.0);

  const std::vector<std::pair<double, double>> two = {{1e6, 3.0}, {2e6, 5.0}};
  const FlopsBaseline b = train_flops_baseline(two);
  CHECK(b.slope == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(b.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.predict(-1e9) == 0.0);

  const std::vector<std::pair<double, double>> flat = {{1e6, 3.0}, {1e6, 5.0}};
  CHECK_THROWS_AS(train_flops_baseline(flat), DomainError);
  CHECK_THROWS_AS(train_flops_baseline(std::vector<std::pair<double, double>>{{1.0, 1.0}}), DomainError);
}

TEST_CASE("built-in sensor relabeling") {
  const auto recs = default_records();
  SUBCASE("full-rate sensor keeps labels within a sample quantum") {
    BicSensorOptions o;
    o.sensor_period_s = 1.0 / o.sample_rate;
    const auto relabeled = bic_relabel(recs, o);
    REQUIRE(relabeled.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double peak_mw = o.ramp_gain * *recs[i].avg_power_mw;
      CHECK(std::abs(relabeled[i].energy_mj - recs[i].energy_mj) <= peak_mw / o.sample_rate + 1e-9);
    }
  }
  SUBCASE("flat traces give true labels") {
    BicSensorOptions o;
    o.ramp_gain = 1.0;
    const auto relabeled = bic_relabel(recs, o);
    for (std::size_t i = 0; i < recs.size(); ++i)
      CHECK(relabeled[i].energy_mj == doctest::Approx(recs[i].energy_mj).epsilon(1e-9));
    const PredictorBundle full = train_bundle(recs, Processor::kCpu, small_forest(), 1);
    const PredictorBundle bic = train_bic_baseline(recs, Processor::kCpu, small_forest(), 1, o);
    CHECK(bic.label_source == "bic");
    const KernelSequence seq = fuse_kernels(testing::alexnet_fixture(2));
    CHECK(predict_model_energy(bic, seq).total_mj ==
          doctest::Approx(predict_model_energy(full, seq).total_mj).epsilon(1e-6));
  }
  SUBCASE("ramped traces at 100 ms bias labels upward") {
    BicSensorOptions o;
    const auto relabeled = bic_relabel(recs, o);
    int raised = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double latency_s = *recs[i].latency_ms / 1000.0;
      CHECK(relabeled[i].energy_mj >= recs[i].energy_mj * (1.0 - 1e-9));
      if (latency_s > o.ramp_duration_s && latency_s < o.sensor_period_s) {
        CHECK(relabeled[i].energy_mj > recs[i].energy_mj);
        ++raised;
      }
    }
    CHECK(raised > 0);
  }
  SUBCASE("records without latency are rejected") {
    auto copy = recs;
    copy[0].latency_ms.reset();
    CHECK_THROWS_AS(bic_relabel(copy, {}), DomainError);
  }
}

TEST_CASE("more training data does not hurt held-out accuracy") {
  const auto bases = synthetic_family_bases();
  double gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto oracle = SyntheticOracle::make_default(0.0, seed);
    auto mix = default_training_mix();
    auto half = mix;
    for (auto& [type, n] : half) n /= 2;
    const auto eval_set = synth_model_dataset(oracle, "dev", Processor::kCpu, bases, 5, seed + 100);
    auto accuracy = [&](const std::vector<std::pair<KernelType, std::size_t>>& m) {
      const auto recs = synth_kernel_records(oracle, "dev", Processor::kCpu, m, seed);
      const PredictorBundle b = train_bundle(recs, Processor::kCpu, small_forest(), seed);
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t i = 0; i < eval_set.graphs.size(); ++i)
        pairs.emplace_back(predict_model_energy(b, fuse_kernels(eval_set.graphs[i])).total_mj,
                           eval_set.records[i].energy_mj);
      return metrics(pairs).acc15_pct;
    };
    gap += accuracy(half) - accuracy(mix);
  }
  CHECK(gap / 5.0 <= 5.0);
}
