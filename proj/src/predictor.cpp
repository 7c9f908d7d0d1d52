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

#include "edgewatt/predictor.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "edgewatt/cost.hpp"
#include "edgewatt/error.hpp"
#include "edgewatt/rng.hpp"
#include "edgewatt/synthetic.hpp"
#include "edgewatt/table.hpp"
#include "edgewatt/trace.hpp"

namespace edgewatt {

using nlohmann::json;

namespace {

constexpr std::string_view kBundleFormat = "edgewatt-predictor-bundle";
// Forests regress ln(energy_mj / work) with work = flops + output_volume, i.e.
// the log energy per unit of work; output_volume keeps zero-FLOP kernels
// well defined.
constexpr std::string_view kBundleTarget = "ln_energy_per_work";

double work_of(const KernelInstance& kernel) {
  const KernelCost cost = kernel_cost(kernel);
  return static_cast<double>(cost.flops) + static_cast<double>(cost.output_volume);
}

std::vector<std::string> config_names(KernelType type) {
  switch (layout_of(type)) {
    case ConfigLayout::kConvFamily: return {"hw", "cin", "cout", "ks", "stride"};
    case ConfigLayout::kDwconvFamily:
    case ConfigLayout::kPool: return {"hw", "cin", "ks", "stride"};
    case ConfigLayout::kSpatial: return {"hw", "cin"};
    case ConfigLayout::kFc: return {"cin", "cout"};
    case ConfigLayout::kConcat: return {"hw", "cin1", "cin2", "cin3", "cin4"};
  }
  return {};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json tree_to_json(const RegressionTree& tree, std::size_t i) {
  const TreeNode& node = tree.nodes[i];
  if (node.is_leaf()) return json{{"v", node.value}};
  return json{{"f", node.feature},
              {"t", node.threshold},
              {"l", tree_to_json(tree, static_cast<std::size_t>(node.left))},
              {"r", tree_to_json(tree, static_cast<std::size_t>(node.right))}};
}

std::int32_t tree_from_json(const json& j, RegressionTree& tree, int depth) {
  if (depth > 256) throw CorruptionError("tree nesting too deep");
  if (!j.is_object()) throw CorruptionError("tree node is not an object");
  const auto index = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("v")) {
    if (j.size() != 1 || !j["v"].is_number()) throw CorruptionError("malformed leaf node");
    tree.nodes[static_cast<std::size_t>(index)].value = j["v"].get<double>();
    return index;
  }
  if (j.size() != 4 || !j.contains("f") || !j.contains("t") || !j.contains("l") ||
      !j.contains("r") || !j["f"].is_number_integer() || !j["t"].is_number())
    throw CorruptionError("malformed split node");
  const std::int32_t left = tree_from_json(j["l"], tree, depth + 1);
  const std::int32_t right = tree_from_json(j["r"], tree, depth + 1);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = j["f"].get<std::int32_t>();
  node.threshold = j["t"].get<double>();
  node.left = left;
  node.right = right;
  return index;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw CorruptionError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw CorruptionError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<std::string> feature_names(KernelType type) {
  auto names = config_names(type);
  for (const char* derived : {"flops", "params", "input_volume", "output_volume"})
    names.emplace_back(derived);
  return names;
}

std::vector<double> kernel_features(const KernelInstance& kernel) {
  const KernelCost cost = kernel_cost(kernel);
  std::vector<double> f;
  f.reserve(kernel.config.size() + 4);
  for (auto c : kernel.config) f.push_back(static_cast<double>(c));
  f.push_back(static_cast<double>(cost.flops));
  f.push_back(static_cast<double>(cost.params));
  f.push_back(static_cast<double>(cost.input_volume));
  f.push_back(static_cast<double>(cost.output_volume));
  return f;
}

PredictorBundle train_bundle(std::span<const KernelEnergyRecord> records, Processor processor,
                             const ForestParams& params, std::uint64_t seed) {
  validate(params);
  std::vector<KernelEnergyRecord> used;
  std::map<KernelType, TrainingSet> sets;
  for (const auto& r : records) {
    if (r.processor != processor) continue;
    validate(r);
    TrainingSet& set = sets[r.kernel_type];
    set.n_features = feature_names(r.kernel_type).size();
    const KernelInstance k = kernel_of(r);
    set.add(kernel_features(k), std::log(r.energy_mj / work_of(k)));
    used.push_back(r);
  }
  if (used.empty())
    throw DomainError("no " + std::string(to_string(processor)) + " records to train on");

  PredictorBundle bundle;
  bundle.processor = processor;
  bundle.params = params;
  bundle.seed = seed;
  bundle.training_fingerprint = hex64(fnv1a64(kernel_dataset_to_csv(used)));
  for (const auto& [type, set] : sets) {
    if (set.rows() < 2)
      throw DomainError("kernel type " + std::string(to_string(type)) + " has only " +
                        std::to_string(set.rows()) + " training row(s), need >= 2");
    bundle.forests[type] =
        train_forest(set, params, derive_seed(seed, "forest:" + std::string(to_string(type))));
    bundle.training_rows[type] = set.rows();
  }
  return bundle;
}

double predict_kernel_energy(const PredictorBundle& bundle, const KernelInstance& kernel) {
  const auto it = bundle.forests.find(kernel.type);
  if (it == bundle.forests.end())
    throw UnknownKernelTypeError("predictor bundle has no model for kernel type '" +
                                 std::string(to_string(kernel.type)) + "'");
  return work_of(kernel) * std::exp(it->second.predict(kernel_features(kernel)));
}

ModelPrediction predict_model_energy(const PredictorBundle& bundle, const KernelSequence& seq,
                                     bool allow_unknown) {
  ModelPrediction out;
  out.per_kernel_mj.reserve(seq.kernels.size());
  for (const auto& k : seq.kernels) {
    double e = 0.0;
    if (bundle.has(k.type) || !allow_unknown) {
      e = predict_kernel_energy(bundle, k);
    } else {
      ++out.unknown_kernels;
    }
    out.per_kernel_mj.push_back(e);
    out.total_mj += e;
  }
  return out;
}

std::string serialize_bundle(const PredictorBundle& bundle) {
  json forests = json::object();
  for (const auto& [type, forest] : bundle.forests) {
    json trees = json::array();
    for (const auto& t : forest.trees) trees.push_back(tree_to_json(t, 0));
    const auto rows = bundle.training_rows.find(type);
    forests[std::string(to_string(type))] = {
        {"feature_names", feature_names(type)},
        {"n_features", forest.n_features},
        {"training_rows", rows == bundle.training_rows.end() ? 0 : rows->second},
        {"trees", std::move(trees)}};
  }
  const json doc = {
      {"format", kBundleFormat},
      {"format_version", kBundleFormatVersion},
      {"feature_schema_version", bundle.feature_schema_version},
      {"target", kBundleTarget},
      {"processor", to_string(bundle.processor)},
      {"label_source", bundle.label_source},
      {"training_fingerprint", bundle.training_fingerprint},
      {"seed", bundle.seed},
      {"hyperparameters",
       {{"n_trees", bundle.params.n_trees},
        {"max_depth", bundle.params.max_depth},
        {"min_samples_leaf", bundle.params.min_samples_leaf},
        {"mtry", bundle.params.mtry}}},
      {"forests", std::move(forests)}};
  return doc.dump(1) + "\n";
}

PredictorBundle parse_bundle(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorruptionError("bundle is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
  if (!doc.is_object() || field<std::string>(doc, "format") != kBundleFormat)
    throw CorruptionError("not a predictor bundle");
  const int version = field<int>(doc, "format_version");
  if (version != kBundleFormatVersion)
    throw VersionError("bundle format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kBundleFormatVersion) + ")");
  PredictorBundle b;
  b.feature_schema_version = field<int>(doc, "feature_schema_version");
  if (b.feature_schema_version != kFeatureSchemaVersion)
    throw VersionError("feature schema version " + std::to_string(b.feature_schema_version) +
                       " is not supported");
  if (field<std::string>(doc, "target") != kBundleTarget)
    throw VersionError("bundle target '" + field<std::string>(doc, "target") + "' is not supported");
  const auto proc = processor_from_string(field<std::string>(doc, "processor"));
  if (!proc) throw CorruptionError("unknown processor in bundle");
  b.processor = *proc;
  b.label_source = field<std::string>(doc, "label_source");
  if (b.label_source != "full_rate" && b.label_source != "bic")
    throw CorruptionError("unknown label source '" + b.label_source + "'");
  b.training_fingerprint = field<std::string>(doc, "training_fingerprint");
  b.seed = field<std::uint64_t>(doc, "seed");
  const json& hp = doc["hyperparameters"];
  b.params.n_trees = field<int>(hp, "n_trees");
  b.params.max_depth = field<int>(hp, "max_depth");
  b.params.min_samples_leaf = field<int>(hp, "min_samples_leaf");
  b.params.mtry = field<int>(hp, "mtry");
  try {
    validate(b.params);
  } catch (const DomainError& e) {
    throw CorruptionError(std::string("bad hyperparameters: ") + e.what());
  }

  const json& forests = doc["forests"];
  if (!forests.is_object()) throw CorruptionError("missing forests");
  for (const auto& [name, fj] : forests.items()) {
    const auto type = kernel_type_from_string(name);
    if (!type) throw CorruptionError("unknown kernel type '" + name + "' in bundle");
    RegressionForest forest;
    forest.n_features = field<std::size_t>(fj, "n_features");
    if (forest.n_features != feature_names(*type).size() ||
        field<std::vector<std::string>>(fj, "feature_names") != feature_names(*type))
      throw CorruptionError("feature schema mismatch for kernel type '" + name + "'");
    const json& trees = fj["trees"];
    if (!trees.is_array() || trees.empty()) throw CorruptionError("forest '" + name + "' has no trees");
    for (const auto& tj : trees) {
      RegressionTree tree;
      tree_from_json(tj, tree, 0);
      tree.validate(forest.n_features);
      forest.trees.push_back(std::move(tree));
    }
    b.training_rows[*type] = field<std::size_t>(fj, "training_rows");
    b.forests[*type] = std::move(forest);
  }
  return b;
}

void save_bundle(const PredictorBundle& bundle, const std::filesystem::path& path) {
  write_text_file_atomic(path, serialize_bundle(bundle));
}

PredictorBundle load_bundle(const std::filesystem::path& path) {
  return parse_bundle(read_text_file(path));
}

double FlopsBaseline::predict(double flops) const {
  return std::max(0.0, slope * flops + intercept);
}

FlopsBaseline train_flops_baseline(std::span<const std::pair<double, double>> rows) {
  if (rows.size() < 2) throw DomainError("FLOPs baseline needs at least two rows");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : rows) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("non-finite FLOPs row");
    mx += x;
    my += y;
  }
  const double n = static_cast<double>(rows.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : rows) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw DomainError("FLOPs baseline needs non-constant flops");
  FlopsBaseline b;
  b.slope = sxy / sxx;
  b.intercept = my - b.slope * mx;
  return b;
}

std::vector<KernelEnergyRecord> bic_relabel(std::span<const KernelEnergyRecord> records,
                                            const BicSensorOptions& options) {
  std::vector<KernelEnergyRecord> out;
  out.reserve(records.size());
  const double dt = 1.0 / options.sample_rate;
  for (const auto& r : records) {
    if (!r.latency_ms)
      throw DomainError("BIC relabeling needs latency_ms for " +
                        kernel_signature(r.kernel_type, r.config));
    const double latency_s = *r.latency_ms / 1000.0;
    const auto repeats =
        latency_s < 2.0 * dt ? static_cast<std::size_t>(std::ceil(2.0 * dt / latency_s)) : 1;
    const std::vector<TraceSegment> segments(repeats, TraceSegment{r.energy_mj, latency_s});
    const SynthTrace rendered = render_trace(segments, options.sample_rate,
                                             options.ramp_duration_s, options.ramp_gain);
    const PowerTrace sensor =
        simulate_bic_sensor(rendered.trace, options.sensor_period_s, options.phase_s);
    KernelEnergyRecord relabeled = r;
    relabeled.energy_mj = sensor_energy_estimate(sensor, 0.0, latency_s);
    relabeled.avg_power_mw = 1000.0 * relabeled.energy_mj / *r.latency_ms;
    out.push_back(std::move(relabeled));
  }
  return out;
}

PredictorBundle train_bic_baseline(std::span<const KernelEnergyRecord> records,
                                   Processor processor, const ForestParams& params,
                                   std::uint64_t seed, const BicSensorOptions& options) {
  const auto relabeled = bic_relabel(records, options);
  PredictorBundle bundle = train_bundle(relabeled, processor, params, seed);
  bundle.label_source = "bic";
  return bundle;
}

}  // namespace edgewatt
