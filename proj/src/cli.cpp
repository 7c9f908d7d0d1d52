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

#include "edgewatt/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "edgewatt/cost.hpp"
#include "edgewatt/dataset.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/eval.hpp"
#include "edgewatt/fusion.hpp"
#include "edgewatt/model_ir.hpp"
#include "edgewatt/predictor.hpp"
#include "edgewatt/scoring.hpp"
#include "edgewatt/synthetic.hpp"
#include "edgewatt/table.hpp"
#include "edgewatt/trace.hpp"

namespace edgewatt::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFlopsFormat = "edgewatt-flops-baseline";

struct CommonOptions {
  std::uint64_t seed = 42;
  std::string processor = "cpu";
  std::string padding = "same";
  std::string out;
  int threads = 1;

  Processor proc() const { return *processor_from_string(processor); }
  Padding pad() const { return *padding_from_string(padding); }
};

struct SynthOptions {
  std::string device = "synthetic";
  double noise = 0.0;
  std::string kernel_type;
  std::size_t count = 0;
  std::size_t variants = 5;
  double sample_rate = 5000.0;
  double ramp_ms = 10.5;
  double ramp_gain = 1.6;
};

struct TrainOptions {
  std::string data;
  std::string kind = "kernel";
  std::string labels = "full_rate";
  ForestParams forest;
  BicSensorOptions sensor;
};

struct PredictOptions {
  std::string bundle;
  std::string model;
  bool allow_unknown = false;
};

struct EvaluateOptions {
  std::string models;
  std::string estimator = "bundle";
  std::string bundle;
  std::string data;
  std::string predictions;
  double noise = 0.0;
};

struct TraceOptions {
  std::string trace;
  std::string windows;
  double sensor_period = 0.1;
  double phase = 0.0;
  double tolerance = 0.05;
  double settle_span = 0.005;
};

struct ScoreOptions {
  std::string records;
  std::string profiles;
  std::string components;
};

void add_common(CLI::App* cmd, CommonOptions& c, bool out_required) {
  cmd->add_option("--seed", c.seed, "Master seed for all derived randomness")->capture_default_str();
  cmd->add_option("--processor", c.processor, "Processor of the records to use")
      ->check(CLI::IsMember({"cpu", "gpu"}))
      ->capture_default_str();
  cmd->add_option("--padding", c.padding, "Padding convention for shape inference")
      ->check(CLI::IsMember({"same", "valid"}))
      ->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (never changes results)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

// Writes `text` to the path when given, otherwise leaves stdout as the only sink.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  out << text;
  if (!path.empty()) write_text_file_atomic(path, text);
}

fs::path resolve_model_file(const fs::path& dataset, const std::string& model_file) {
  fs::path p(model_file);
  return p.is_absolute() ? p : dataset.parent_path() / p;
}

int cmd_synth(const CommonOptions& c, const SynthOptions& o, std::ostream& out) {
  const fs::path dir(c.out);
  fs::create_directories(dir / "models");
  fs::create_directories(dir / "traces");
  const SyntheticOracle oracle = SyntheticOracle::make_default(o.noise, c.seed);
  const Processor proc = c.proc();

  std::vector<std::pair<KernelType, std::size_t>> mix;
  if (!o.kernel_type.empty()) {
    auto type = kernel_type_from_string(o.kernel_type);
    if (!type) throw UnknownKernelTypeError("unknown kernel type '" + o.kernel_type + "'");
    mix.emplace_back(*type, o.count);
  } else {
    mix = default_training_mix();
  }
  const auto kernels = synth_kernel_records(oracle, o.device, proc, mix, c.seed);
  write_text_file_atomic(dir / "kernels.csv", kernel_dataset_to_csv(kernels));
  out << "kernels.csv: " << kernels.size() << " rows\n";

  const auto bases = synthetic_family_bases();
  SyntheticModelSet models = synth_model_dataset(oracle, o.device, proc, bases, o.variants, c.seed);
  for (std::size_t i = 0; i < models.graphs.size(); ++i) {
    write_text_file_atomic(dir / "models" / models.records[i].model_file,
                           serialize_model_graph(models.graphs[i]));
    models.records[i].model_file = "models/" + models.records[i].model_file;
  }
  write_text_file_atomic(dir / "models.csv", model_dataset_to_csv(models.records));
  out << "models.csv: " << models.records.size() << " rows\n";

  for (const auto& base : bases) {
    const SynthTrace t = synth_trace(oracle, fuse_kernels(base, c.pad()), proc, o.sample_rate,
                                     o.ramp_ms / 1000.0, o.ramp_gain);
    write_text_file_atomic(dir / "traces" / (base.name + "_trace.csv"), trace_to_csv(t.trace));
    write_text_file_atomic(dir / "traces" / (base.name + "_windows.csv"), windows_to_csv(t.windows));
    out << "traces/" << base.name << ": " << t.trace.samples_mw.size() << " samples, "
        << t.windows.size() << " windows\n";
  }

  auto apps = synth_app_records(o.device, 1.0, 1.0, c.seed);
  write_text_file_atomic(dir / "apps.csv", app_dataset_to_csv(apps));
  out << "apps.csv: " << apps.size() << " rows\n";
  write_text_file_atomic(dir / "devices.csv", "device,tdp_mw\n" + o.device + ",5000\n");
  out << "devices.csv: 1 rows\n";
  return kExitOk;
}

std::string flops_baseline_json(const FlopsBaseline& b) {
  nlohmann::ordered_json doc;
  doc["format"] = kFlopsFormat;
  doc["format_version"] = 1;
  doc["slope"] = b.slope;
  doc["intercept"] = b.intercept;
  return doc.dump(1) + "\n";
}

int cmd_train(const CommonOptions& c, TrainOptions o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (o.kind == "flops") {
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : load_model_dataset(o.data))
      if (r.processor == c.proc()) rows.emplace_back(static_cast<double>(r.flops), r.energy_mj);
    const FlopsBaseline b = train_flops_baseline(rows);
    write_text_file_atomic(c.out, flops_baseline_json(b));
    out << "flops baseline: " << rows.size() << " models, slope " << format_number(b.slope)
        << ", intercept " << format_number(b.intercept) << "\n";
    return kExitOk;
  }

  const auto records = load_kernel_dataset(o.data);
  o.forest.threads = c.threads;
  const PredictorBundle bundle =
      o.labels == "bic" ? train_bic_baseline(records, c.proc(), o.forest, c.seed, o.sensor)
                        : train_bundle(records, c.proc(), o.forest, c.seed);
  save_bundle(bundle, c.out);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& [type, rows] : bundle.training_rows)
    out << to_string(type) << ": " << rows << " rows\n";
  out << "trained " << bundle.forests.size() << " forests (" << bundle.label_source
      << " labels) in " << format_fixed(seconds, 2) << " s\n";
  return kExitOk;
}

int cmd_predict(const CommonOptions& c, const PredictOptions& o, std::ostream& out,
                std::ostream& err) {
  const PredictorBundle bundle = load_bundle(o.bundle);
  const ModelGraph graph = load_model_graph(o.model);
  const KernelSequence seq = fuse_kernels(graph, c.pad());
  const ModelPrediction pred = predict_model_energy(bundle, seq, o.allow_unknown);

  std::ostringstream text;
  text << "index,kernel_type,signature,energy_mj,share_pct\n";
  for (std::size_t i = 0; i < seq.kernels.size(); ++i) {
    const double e = pred.per_kernel_mj[i];
    const double share = pred.total_mj > 0.0 ? 100.0 * e / pred.total_mj : 0.0;
    text << i << ',' << to_string(seq.kernels[i].type) << ','
         << quoted(kernel_signature(seq.kernels[i])) << ',' << format_number(e) << ','
         << format_fixed(share, 4) << '\n';
  }
  text << "\nkernel_type,share_pct\n";
  if (pred.total_mj > 0.0)
    for (const auto& [type, pct] : breakdown_by_kernel_type(seq, pred.per_kernel_mj))
      text << to_string(type) << ',' << format_fixed(pct, 4) << '\n';
  text << "\nmodel,kernels,total_mj\n"
       << graph.name << ',' << seq.kernels.size() << ',' << format_number(pred.total_mj) << '\n';
  if (pred.unknown_kernels > 0)
    err << "warning: " << pred.unknown_kernels
        << " kernel(s) of types missing from the bundle were predicted as 0 mJ\n";
  emit(c.out, text.str(), out);
  return kExitOk;
}

std::vector<ModelFamily> load_families(const fs::path& dataset, Processor proc, Padding padding) {
  std::vector<ModelFamily> families;
  std::map<std::string, std::size_t> index;
  for (const auto& r : load_model_dataset(dataset)) {
    if (r.processor != proc) continue;
    const ModelGraph graph = load_model_graph(resolve_model_file(dataset, r.model_file));
    EvalModel m{graph.name, fuse_kernels(graph, padding), static_cast<double>(r.flops),
                r.energy_mj};
    auto [it, inserted] = index.emplace(r.model_family, families.size());
    if (inserted) families.push_back({r.model_family, {}});
    families[it->second].models.push_back(std::move(m));
  }
  return families;
}

int cmd_evaluate(const CommonOptions& c, const EvaluateOptions& o, std::ostream& out) {
  const auto families = load_families(o.models, c.proc(), c.pad());
  EstimatorFactory factory;
  if (o.estimator == "bundle") {
    if (o.bundle.empty()) throw DomainError("--estimator bundle needs --bundle");
    auto bundle = std::make_shared<PredictorBundle>(load_bundle(o.bundle));
    if (bundle->processor != c.proc())
      throw DomainError("bundle was trained for processor '" +
                        std::string(to_string(bundle->processor)) + "'");
    factory.make = [bundle](std::span<const EvalModel>) -> ModelEstimator {
      return [bundle](const EvalModel& m) { return predict_model_energy(*bundle, m.sequence).total_mj; };
    };
  } else if (o.estimator == "flops") {
    factory.needs_model_data = true;
    factory.make = [](std::span<const EvalModel> training) -> ModelEstimator {
      std::vector<std::pair<double, double>> rows;
      for (const auto& m : training) rows.emplace_back(m.flops, m.energy_mj);
      const FlopsBaseline b = train_flops_baseline(rows);
      return [b](const EvalModel& m) { return b.predict(m.flops); };
    };
  } else {
    const auto oracle = std::make_shared<SyntheticOracle>(SyntheticOracle::make_default(o.noise, c.seed));
    const Processor proc = c.proc();
    factory.make = [oracle, proc](std::span<const EvalModel>) -> ModelEstimator {
      return [oracle, proc](const EvalModel& m) { return synth_model_energy(*oracle, m.sequence, proc); };
    };
  }
  const EvalReport report = leave_one_out(families, factory);
  emit(c.out, eval_report_to_csv(report), out);
  if (!o.predictions.empty()) write_text_file_atomic(o.predictions, predictions_to_csv(report));
  if (!o.data.empty()) {
    std::vector<KernelEnergyRecord> train;
    for (auto& r : load_kernel_dataset(o.data))
      if (r.processor == c.proc()) train.push_back(std::move(r));
    std::vector<KernelSequence> seqs;
    for (const auto& f : families)
      for (const auto& m : f.models) seqs.push_back(m.sequence);
    out << "config_overlap_pct," << format_fixed(config_overlap(train, seqs), 4) << "\n";
  }
  return kExitOk;
}

int cmd_trace(const CommonOptions& c, const TraceOptions& o, std::ostream& out, std::ostream& err) {
  const PowerTrace trace = parse_trace_csv(read_text_file(o.trace));
  const auto windows = parse_windows_csv(read_text_file(o.windows));
  const auto energies = segment_kernels(trace, windows);
  const PowerTrace sensor = simulate_bic_sensor(trace, o.sensor_period, o.phase);

  std::ostringstream text;
  text << "kernel_index,start_s,duration_s,energy_mj,avg_power_mw,ramp_s,ramp_power_mw,"
          "flat_power_mw,settled,bic_energy_mj,bic_error_pct\n";
  std::size_t no_reading = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const KernelWindow& w = windows[i];
    const KernelEnergy& e = energies[i];
    text << w.kernel_index << ',' << format_number(w.start_s) << ',' << format_number(w.duration_s)
         << ',' << format_fixed(e.energy_mj, 6) << ',' << format_fixed(e.avg_power_mw, 3) << ',';
    if (w.duration_s + 1e-9 >= o.settle_span) {
      const RampUpReport r = detect_ramp_up(trace, w, o.tolerance, o.settle_span);
      text << format_fixed(r.ramp_duration_s, 6) << ',' << format_fixed(r.ramp_mean_power_mw, 3)
           << ',' << format_fixed(r.flat_mean_power_mw, 3) << ',' << (r.settled ? "yes" : "no");
    } else {
      text << ",,,";
    }
    text << ',';
    try {
      const double bic = sensor_energy_estimate(sensor, w.start_s, w.duration_s);
      text << format_fixed(bic, 6) << ',';
      if (e.energy_mj > 0.0) text << format_fixed(relative_error(bic, e.energy_mj), 4);
    } catch (const DomainError&) {
      ++no_reading;
      text << ',';
    }
    text << '\n';
  }
  if (no_reading > 0)
    err << "warning: no sensor reading landed in " << no_reading << " window(s)\n";
  emit(c.out, text.str(), out);
  return kExitOk;
}

int cmd_score(const CommonOptions& c, const ScoreOptions& o, std::ostream& out, std::ostream& err) {
  const auto records = load_app_dataset(o.records);
  const auto profiles = load_device_profiles(o.profiles);
  std::vector<std::string> order;
  std::map<std::string, std::vector<AppEnergyRecord>> by_device;
  for (const auto& r : records) {
    if (!by_device.count(r.device)) order.push_back(r.device);
    by_device[r.device].push_back(r);
  }
  std::vector<ScoreCard> cards;
  for (const auto& device : order) {
    auto it = std::find_if(profiles.begin(), profiles.end(),
                           [&](const DeviceProfile& p) { return p.device == device; });
    if (it == profiles.end()) throw ValidationError("no TDP profile for device '" + device + "'");
    cards.push_back(benchmark_device(by_device[device], *it));
    for (const auto& w : cards.back().warnings) err << "warning: " << device << ": " << w << "\n";
  }
  emit(c.out, scorecards_to_csv(cards), out);
  out << "# pcs averages power efficiency over every (dnn, delegate) record\n";
  if (!o.components.empty()) write_text_file_atomic(o.components, score_components_to_csv(cards));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel-level DNN energy prediction, power-trace analysis and device scoring",
               "edgewatt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CommonOptions common;
  SynthOptions synth;
  TrainOptions train;
  PredictOptions predict;
  EvaluateOptions evaluate;
  TraceOptions trace;
  ScoreOptions score;

  auto* s = app.add_subcommand("synth", "Generate synthetic kernel, model, trace and app datasets");
  add_common(s, common, true);
  s->add_option("--device", synth.device, "Device name written into records")->capture_default_str();
  s->add_option("--noise", synth.noise, "Label noise fraction")->check(CLI::NonNegativeNumber)->capture_default_str();
  auto* type_opt = s->add_option("--kernel-type", synth.kernel_type, "Sample one kernel type only");
  s->add_option("--count", synth.count, "Configs to sample with --kernel-type")->needs(type_opt);
  s->add_option("--variants", synth.variants, "Model variants per family")->capture_default_str();
  s->add_option("--sample-rate", synth.sample_rate, "Trace sample rate (Hz)")->capture_default_str();
  s->add_option("--ramp-ms", synth.ramp_ms, "Ramp-up duration of rendered traces")->capture_default_str();
  s->add_option("--ramp-gain", synth.ramp_gain, "Ramp power over flat power")->capture_default_str();

  auto* t = app.add_subcommand("train", "Train a predictor bundle or the FLOPs baseline");
  add_common(t, common, true);
  t->add_option("--data", train.data, "Kernel dataset (model dataset with --kind flops)")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--kind", train.kind, "What to train")->check(CLI::IsMember({"kernel", "flops"}))->capture_default_str();
  t->add_option("--labels", train.labels, "Label source for kernel forests")
      ->check(CLI::IsMember({"full_rate", "bic"}))
      ->capture_default_str();
  t->add_option("--trees", train.forest.n_trees, "Trees per forest")->capture_default_str();
  t->add_option("--max-depth", train.forest.max_depth, "Maximum tree depth")->capture_default_str();
  t->add_option("--min-leaf", train.forest.min_samples_leaf, "Minimum rows per leaf")->capture_default_str();
  t->add_option("--mtry", train.forest.mtry, "Features per split (0 = ceil(p/3))")->capture_default_str();
  t->add_option("--sensor-period", train.sensor.sensor_period_s, "BIC sensor period (s)")->capture_default_str();
  t->add_option("--phase", train.sensor.phase_s, "BIC sensor phase (s)")->capture_default_str();
  t->add_option("--sample-rate", train.sensor.sample_rate, "Full-rate trace sample rate (Hz)")->capture_default_str();
  t->add_option("--ramp-ms", train.sensor.ramp_duration_s, "Ramp-up duration (ms) of rendered traces")
      ->transform([](std::string v) { return std::to_string(std::stod(v) / 1000.0); })
      ->default_str("10.5");
  t->add_option("--ramp-gain", train.sensor.ramp_gain, "Ramp power over flat power")->capture_default_str();

  auto* p = app.add_subcommand("predict", "Predict a model's energy from its graph");
  add_common(p, common, false);
  p->add_option("--bundle", predict.bundle, "Predictor bundle")->required()->check(CLI::ExistingFile);
  p->add_option("--model", predict.model, "Model graph file")->required()->check(CLI::ExistingFile);
  p->add_flag("--allow-unknown", predict.allow_unknown, "Predict 0 mJ for kernel types missing from the bundle");

  auto* e = app.add_subcommand("evaluate", "Leave-one-family-out evaluation on a model dataset");
  add_common(e, common, false);
  e->add_option("--models", evaluate.models, "Model dataset")->required()->check(CLI::ExistingFile);
  e->add_option("--estimator", evaluate.estimator, "Estimator to evaluate")
      ->check(CLI::IsMember({"bundle", "flops", "oracle"}))
      ->capture_default_str();
  e->add_option("--bundle", evaluate.bundle, "Predictor bundle")->check(CLI::ExistingFile);
  e->add_option("--data", evaluate.data, "Kernel dataset, to report config overlap")->check(CLI::ExistingFile);
  e->add_option("--predictions", evaluate.predictions, "Per-model prediction table");
  e->add_option("--noise", evaluate.noise, "Oracle label noise (oracle estimator)")->capture_default_str();

  auto* r = app.add_subcommand("trace", "Per-kernel energy, ramp-up and sensor error from a trace");
  add_common(r, common, false);
  r->add_option("--trace", trace.trace, "Trace file (time_s,power_mw)")->required()->check(CLI::ExistingFile);
  r->add_option("--windows", trace.windows, "Window file (kernel_index,start_s,duration_s)")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--sensor-period", trace.sensor_period, "Simulated sensor period (s)")->capture_default_str();
  r->add_option("--phase", trace.phase, "Simulated sensor phase (s)")->capture_default_str();
  r->add_option("--tolerance", trace.tolerance, "Ramp settle tolerance (fraction)")->capture_default_str();
  r->add_option("--settle-span", trace.settle_span, "Ramp settle span (s)")->capture_default_str();

  auto* sc = app.add_subcommand("score", "PCS and IECS per device");
  add_common(sc, common, false);
  sc->add_option("--records", score.records, "Application dataset")->required()->check(CLI::ExistingFile);
  sc->add_option("--profiles", score.profiles, "Device profiles (device,tdp_mw)")->required()->check(CLI::ExistingFile);
  sc->add_option("--components", score.components, "Per-record component table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(common, synth, out);
    if (t->parsed()) return cmd_train(common, train, out);
    if (p->parsed()) return cmd_predict(common, predict, out, err);
    if (e->parsed()) return cmd_evaluate(common, evaluate, out);
    if (r->parsed()) return cmd_trace(common, trace, out, err);
    if (sc->parsed()) return cmd_score(common, score, out, err);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace edgewatt::cli
