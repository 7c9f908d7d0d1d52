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

// Kernel-level energy predictor: one forest per kernel type, summed over a
// model's kernels. Also the FLOPs regression and BIC-label baselines.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgewatt/dataset.hpp"
#include "edgewatt/forest.hpp"
#include "edgewatt/fusion.hpp"

namespace edgewatt {

inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr int kBundleFormatVersion = 1;

/// Raw config columns followed by flops, params, input_volume, output_volume.
std::vector<std::string> feature_names(KernelType type);
std::vector<double> kernel_features(const KernelInstance& kernel);

struct PredictorBundle {
  Processor processor = Processor::kCpu;
  int feature_schema_version = kFeatureSchemaVersion;
  /// "full_rate" or "bic".
  std::string label_source = "full_rate";
  /// FNV-1a of the canonical training table, as 16 hex digits.
  std::string training_fingerprint;
  ForestParams params;
  std::uint64_t seed = 0;
  std::map<KernelType, RegressionForest> forests;
  std::map<KernelType, std::size_t> training_rows;

  bool has(KernelType type) const { return forests.count(type) != 0; }
};

/// Trains a forest for every kernel type present among the records of the
/// given processor. Forests regress ln(energy_mj / work), work being flops +
/// output_volume; a prediction is work * exp(forest mean), so it is strictly
/// positive. The forest for type T is seeded with derive_seed(seed, "forest:<T>").
/// Throws DomainError when no record matches or a type has fewer than two rows.
PredictorBundle train_bundle(std::span<const KernelEnergyRecord> records, Processor processor,
                             const ForestParams& params, std::uint64_t seed);

/// Throws UnknownKernelTypeError when the bundle has no forest for the type.
double predict_kernel_energy(const PredictorBundle& bundle, const KernelInstance& kernel);

struct ModelPrediction {
  double total_mj = 0.0;
  std::vector<double> per_kernel_mj;
  /// Kernels predicted as 0 because their type is missing from the bundle.
  std::size_t unknown_kernels = 0;
};

/// Sums per-kernel predictions in kernel order. With allow_unknown, kernels of
/// types missing from the bundle contribute 0 and are counted.
ModelPrediction predict_model_energy(const PredictorBundle& bundle, const KernelSequence& seq,
                                     bool allow_unknown = false);

std::string serialize_bundle(const PredictorBundle& bundle);
/// Throws CorruptionError on malformed content, VersionError on a format or
/// feature-schema version this build does not read.
PredictorBundle parse_bundle(std::string_view text);
void save_bundle(const PredictorBundle& bundle, const std::filesystem::path& path);
PredictorBundle load_bundle(const std::filesystem::path& path);

struct FlopsBaseline {
  double slope = 0.0;
  double intercept = 0.0;

  double predict(double flops) const;  // clamped at >= 0
};

/// Ordinary least squares on (model flops, energy mJ) rows. Throws
/// DomainError on fewer than two rows or constant flops.
FlopsBaseline train_flops_baseline(std::span<const std::pair<double, double>> rows);

struct BicSensorOptions {
  double sensor_period_s = 0.1;
  double phase_s = 0.0;
  double sample_rate = 5000.0;
  double ramp_duration_s = 0.0105;
  double ramp_gain = 1.6;
};

/// Re-labels records as a built-in sensor would see them: each kernel is
/// rendered to a full-rate trace (repeated back to back when shorter than two
/// samples), point-sampled by the simulated sensor, and labeled with the mean
/// reading times the ground-truth latency. Records need latency_ms.
std::vector<KernelEnergyRecord> bic_relabel(std::span<const KernelEnergyRecord> records,
                                            const BicSensorOptions& options);

/// train_bundle on bic_relabel(records); label_source is "bic".
PredictorBundle train_bic_baseline(std::span<const KernelEnergyRecord> records,
                                   Processor processor, const ForestParams& params,
                                   std::uint64_t seed, const BicSensorOptions& options);

}  // namespace edgewatt
