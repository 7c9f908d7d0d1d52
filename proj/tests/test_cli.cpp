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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "edgewatt/cli.hpp"
#include "edgewatt/dataset.hpp"
#include "edgewatt/eval.hpp"
#include "edgewatt/model_ir.hpp"
#include "edgewatt/predictor.hpp"
#include "edgewatt/table.hpp"
#include "edgewatt/trace.hpp"
#include "test_support.hpp"

using namespace edgewatt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::size_t data_rows(const std::string& csv) {
  return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char ch : line) {
    if (ch == ',')
      out.emplace_back();
    else
      out.back() += ch;
  }
  return out;
}

double last_field(const std::string& line) { return std::stod(line.substr(line.rfind(',') + 1)); }

}  // namespace

TEST_CASE("cli help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"train", "--help"}).code == cli::kExitOk);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"predict", "--bundle", "/nonexistent/b.json", "--model", "/nonexistent/m.json"}).code ==
        cli::kExitUsage);
}

TEST_CASE("cli binary exit codes") {
  const std::string bin = EDGEWATT_CLI_PATH;
  CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
  const int rc = std::system((bin + " trace --trace /nonexistent > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == cli::kExitUsage);
}

TEST_CASE("cli synth") {
  testing::TempDir dir("cli_synth");
  REQUIRE(run({"synth", "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"synth", "--out", (dir / "b").string()}).code == 0);
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir / "a");
    CHECK_MESSAGE(slurp(entry.path()) == slurp(dir / "b" / rel), rel.string());
  }
  CHECK(data_rows(slurp(dir / "a" / "kernels.csv")) == 2000);
  CHECK(data_rows(slurp(dir / "a" / "models.csv")) == 20);
  CHECK(data_rows(slurp(dir / "a" / "apps.csv")) == 35);

  REQUIRE(run({"synth", "--out", (dir / "c").string(), "--seed", "7"}).code == 0);
  CHECK(slurp(dir / "a" / "kernels.csv") != slurp(dir / "c" / "kernels.csv"));

  REQUIRE(run({"synth", "--out", (dir / "conv").string(), "--kernel-type", "conv", "--count", "1032"})
              .code == 0);
  const auto conv = load_kernel_dataset(dir / "conv" / "kernels.csv");
  CHECK(conv.size() == 1032);
  for (const auto& r : conv) CHECK(r.kernel_type == KernelType::kConv);

  CHECK(run({"synth", "--out", (dir / "d").string(), "--kernel-type", "nope", "--count", "3"}).code ==
        cli::kExitError);
  // A regular file in the way of the output directory.
  write(dir / "blocker", "x");
  CHECK(run({"synth", "--out", (dir / "blocker" / "sub").string()}).code == cli::kExitError);
}

TEST_CASE("cli train and predict") {
  testing::TempDir dir("cli_train");
  REQUIRE(run({"synth", "--out", dir.path().string()}).code == 0);
  const std::string data = (dir / "kernels.csv").string();
  const Result trained = run({"train", "--data", data, "--out", (dir / "b1.json").string()});
  REQUIRE(trained.code == 0);
  CHECK(trained.out.find("conv_bn_relu: 800 rows") != std::string::npos);
  REQUIRE(run({"train", "--data", data, "--out", (dir / "b2.json").string(), "--threads", "4"}).code ==
          0);
  CHECK(slurp(dir / "b1.json") == slurp(dir / "b2.json"));
  REQUIRE(run({"train", "--data", data, "--out", (dir / "b3.json").string(), "--seed", "9"}).code == 0);
  CHECK(slurp(dir / "b1.json") != slurp(dir / "b3.json"));

  write(dir / "empty.csv", std::string(kernel_dataset_to_csv({})));
  CHECK(run({"train", "--data", (dir / "empty.csv").string(), "--out", (dir / "e.json").string()})
            .code == cli::kExitError);
  CHECK(run({"train", "--data", data, "--out", (dir / "g.json").string(), "--processor", "gpu"}).code ==
        cli::kExitError);

  const PredictorBundle bundle = load_bundle(dir / "b1.json");

  SUBCASE("a training config round-trips through predict") {
    const auto records = load_kernel_dataset(dir / "kernels.csv");
    const KernelEnergyRecord& r = records.front();
    REQUIRE(r.kernel_type == KernelType::kConvBnRelu);
    ModelGraphBuilder b("single", {r.config[0], r.config[1]});
    b.unary(OpKind::kRelu, b.unary(OpKind::kBn, b.conv("", r.config[2], r.config[3], r.config[4])));
    write(dir / "single.json", serialize_model_graph(b.build()));
    const Result res = run({"predict", "--bundle", (dir / "b1.json").string(), "--model",
                            (dir / "single.json").string()});
    REQUIRE(res.code == 0);
    const auto ls = lines(res.out);
    CHECK(ls[0] == "index,kernel_type,signature,energy_mj,share_pct");
    CHECK(ls[1].rfind("0,conv_bn_relu,", 0) == 0);
    const double total = last_field(ls.back());
    const KernelSequence seq = fuse_kernels(b.build());
    CHECK(total == doctest::Approx(predict_model_energy(bundle, seq).total_mj).epsilon(1e-6));
    CHECK(relative_error(total, r.energy_mj) <= 15.0);
  }

  SUBCASE("alexnet breakdown") {
    const Result res = run({"predict", "--bundle", (dir / "b1.json").string(), "--model",
                            (testing::data_dir() / "models" / "alexnet1.json").string()});
    REQUIRE(res.code == 0);
    const auto ls = lines(res.out);
    std::size_t kernel_rows = 0;
    while (kernel_rows + 1 < ls.size() && !ls[kernel_rows + 1].empty()) ++kernel_rows;
    CHECK(kernel_rows == 12);
    CHECK(ls.back().rfind("alexnet1,12,", 0) == 0);
    CHECK(last_field(ls.back()) > 0.0);
  }

  SUBCASE("an empty model predicts zero") {
    write(dir / "empty.json", R"({"name":"empty","input_hw":32,"input_channels":3,"ops":[]})");
    const Result res = run({"predict", "--bundle", (dir / "b1.json").string(), "--model",
                            (dir / "empty.json").string()});
    REQUIRE(res.code == 0);
    CHECK(lines(res.out).back().rfind("empty,0,", 0) == 0);
    CHECK(last_field(lines(res.out).back()) == 0.0);
  }

  SUBCASE("unknown kernel types") {
    REQUIRE(run({"synth", "--out", (dir / "fc").string(), "--kernel-type", "fc", "--count", "50"}).code ==
            0);
    REQUIRE(run({"train", "--data", (dir / "fc" / "kernels.csv").string(), "--out",
                 (dir / "fc.json").string()})
                .code == 0);
    const std::string model = (testing::data_dir() / "models" / "alexnet1.json").string();
    CHECK(run({"predict", "--bundle", (dir / "fc.json").string(), "--model", model}).code ==
          cli::kExitError);
    const Result res =
        run({"predict", "--bundle", (dir / "fc.json").string(), "--model", model, "--allow-unknown"});
    CHECK(res.code == 0);
    CHECK(res.err.find("warning") != std::string::npos);
  }
}

TEST_CASE("cli evaluate") {
  testing::TempDir dir("cli_eval");
  REQUIRE(run({"synth", "--out", dir.path().string()}).code == 0);
  const std::string models = (dir / "models.csv").string();

  const Result oracle = run({"evaluate", "--models", models, "--estimator", "oracle"});
  REQUIRE(oracle.code == 0);
  const auto ls = lines(oracle.out);
  CHECK(ls[0] == "family,rmse_mj,rmspe_pct,acc10_pct,acc15_pct,n_models");
  CHECK(ls.size() == 6);
  CHECK(ls.back().rfind("overall,", 0) == 0);
  const auto overall = split_csv_line(ls.back());
  CHECK(std::stod(overall[4]) == 100.0);
  CHECK(overall[5] == "20");

  const Result flops = run({"evaluate", "--models", models, "--estimator", "flops", "--predictions",
                            (dir / "pred.csv").string()});
  REQUIRE(flops.code == 0);
  CHECK(data_rows(slurp(dir / "pred.csv")) == 20);

  REQUIRE(run({"train", "--data", (dir / "kernels.csv").string(), "--out", (dir / "b.json").string()})
              .code == 0);
  const Result kernel = run({"evaluate", "--models", models, "--bundle", (dir / "b.json").string(),
                             "--data", (dir / "kernels.csv").string()});
  REQUIRE(kernel.code == 0);
  CHECK(kernel.out.find("config_overlap_pct,") != std::string::npos);
  CHECK(run({"evaluate", "--models", models}).code == cli::kExitError);

  // Two families only: each fold trains on the other one.
  const auto all = slurp(dir / "models.csv");
  std::string two;
  for (const auto& l : lines(all))
    if (l.find("alexnet_like") != std::string::npos || l.find("vgg_like") != std::string::npos ||
        l.rfind("device,", 0) == 0)
      two += l + "\n";
  write(dir / "two.csv", two);
  const Result pair = run({"evaluate", "--models", (dir / "two.csv").string(), "--estimator", "flops"});
  REQUIRE(pair.code == 0);
  CHECK(lines(pair.out).size() == 4);
}

TEST_CASE("cli trace") {
  testing::TempDir dir("cli_trace");
  PowerTrace constant{5000.0, std::vector<double>(5000, 1200.0), 0.0};
  write(dir / "c.csv", trace_to_csv(constant));
  const std::vector<KernelWindow> cw = {{0, 0.1, 0.3}, {1, 0.4, 0.5}};
  write(dir / "cw.csv", windows_to_csv(cw));
  const Result c = run({"trace", "--trace", (dir / "c.csv").string(), "--windows", (dir / "cw.csv").string()});
  REQUIRE(c.code == 0);
  const auto cl = lines(c.out);
  REQUIRE(cl.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) {
    const auto f = split_csv_line(cl[i]);
    CHECK(std::stod(f[10]) == 0.0);
    CHECK(f[8] == "yes");
  }

  PowerTrace step{5000.0, std::vector<double>(25, 2000.0), 0.0};
  step.samples_mw.insert(step.samples_mw.end(), 25, 1000.0);
  write(dir / "s.csv", trace_to_csv(step));
  const std::vector<KernelWindow> sw = {{0, 0.0, 0.01}};
  write(dir / "sw.csv", windows_to_csv(sw));
  const Result s = run({"trace", "--trace", (dir / "s.csv").string(), "--windows", (dir / "sw.csv").string()});
  REQUIRE(s.code == 0);
  const auto f = split_csv_line(lines(s.out)[1]);
  CHECK(std::stod(f[3]) == doctest::Approx(15.0));
  CHECK(std::stod(f[9]) == doctest::Approx(20.0));
  CHECK(std::stod(f[10]) == doctest::Approx(33.3333).epsilon(1e-4));

  CHECK(run({"trace", "--trace", (dir / "s.csv").string(), "--windows", (dir / "missing.csv").string()})
            .code == cli::kExitUsage);
  write(dir / "bad.csv", "kernel_index,start_s,duration_s\n0,0,0.2\n");
  CHECK(run({"trace", "--trace", (dir / "s.csv").string(), "--windows", (dir / "bad.csv").string()})
            .code == cli::kExitError);
}

TEST_CASE("cli score") {
  testing::TempDir dir("cli_score");
  write(dir / "apps.csv",
        "device,application,dnn_id,delegate,avg_power_mw,latency_ms,energy_mj\n"
        "a,classification,DNN5,cpu1,2500,40,100\n"
        "b,classification,DNN5,cpu1,4000,30,120\n");
  write(dir / "devices.csv", "device,tdp_mw\na,5000\nb,5000\n");
  const Result r = run({"score", "--records", (dir / "apps.csv").string(), "--profiles",
                        (dir / "devices.csv").string(), "--components", (dir / "comp.csv").string()});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() >= 3);
  const auto a = split_csv_line(ls[1]);
  const auto b = split_csv_line(ls[2]);
  CHECK(a[0] == "a");
  CHECK(std::stod(a[2]) == 50.0);
  CHECK(std::stod(a[3]) == 10.0);
  CHECK(std::stod(b[2]) == doctest::Approx(20.0));
  CHECK(std::stod(a[2]) > std::stod(b[2]));
  CHECK(r.out.find("# pcs averages") != std::string::npos);
  CHECK(data_rows(slurp(dir / "comp.csv")) == 2);

  write(dir / "one.csv", "device,tdp_mw\na,5000\n");
  CHECK(run({"score", "--records", (dir / "apps.csv").string(), "--profiles", (dir / "one.csv").string()})
            .code == cli::kExitError);
}
