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

// Kernel-, model- and application-level energy records, their tabular file
// formats, and the configuration sampler / model variant generator.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgewatt/fusion.hpp"
#include "edgewatt/model_ir.hpp"

namespace edgewatt {

enum class Processor { kCpu, kGpu };

std::string_view to_string(Processor processor);
std::optional<Processor> processor_from_string(std::string_view name);

struct KernelEnergyRecord {
  std::string device;
  Processor processor = Processor::kCpu;
  KernelType kernel_type = KernelType::kOthers;
  std::vector<std::int64_t> config;
  double energy_mj = 0.0;
  std::optional<double> latency_ms;
  std::optional<double> avg_power_mw;

  friend bool operator==(const KernelEnergyRecord&, const KernelEnergyRecord&) = default;
};

/// Relative tolerance of the energy = power * latency consistency check.
inline constexpr double kRecordConsistencyTolerance = 0.01;

void validate(const KernelEnergyRecord& record);

/// Dataset kernels are materialized with same padding.
KernelInstance kernel_of(const KernelEnergyRecord& record);

/// Rejects schema violations (with the offending line), invariant violations
/// and duplicate (device, processor, signature) rows.
std::vector<KernelEnergyRecord> parse_kernel_dataset(std::string_view text);
std::vector<KernelEnergyRecord> load_kernel_dataset(const std::filesystem::path& path);
std::string kernel_dataset_to_csv(std::span<const KernelEnergyRecord> records);

struct ModelEnergyRecord {
  std::string device;
  Processor processor = Processor::kCpu;
  std::string model_family;
  std::int64_t variant_id = 0;
  double energy_mj = 0.0;
  std::int64_t flops = 0;
  /// Model file, relative to the dataset file's directory unless absolute.
  std::string model_file;

  friend bool operator==(const ModelEnergyRecord&, const ModelEnergyRecord&) = default;
};

void validate(const ModelEnergyRecord& record);
std::vector<ModelEnergyRecord> parse_model_dataset(std::string_view text);
std::vector<ModelEnergyRecord> load_model_dataset(const std::filesystem::path& path);
std::string model_dataset_to_csv(std::span<const ModelEnergyRecord> records);

enum class Application {
  kDetection,
  kClassification,
  kSuperResolution,
  kSegmentation,
  kQuestionAnswering,
  kSpeechRecognition,
};

enum class Delegate { kCpu1, kCpu4, kGpu, kNnapi };

inline constexpr std::array<Delegate, 4> kAllDelegates = {
    Delegate::kCpu1, Delegate::kCpu4, Delegate::kGpu, Delegate::kNnapi};
inline constexpr int kReferenceDnnCount = 12;

std::string_view to_string(Application application);
std::optional<Application> application_from_string(std::string_view name);
std::string_view to_string(Delegate delegate);
std::optional<Delegate> delegate_from_string(std::string_view name);

/// Application served by reference model DNN<dnn_id> (1..12).
Application application_of_dnn(int dnn_id);
/// Delegate support matrix of the reference applications.
bool delegate_supported(int dnn_id, Delegate delegate);

struct AppEnergyRecord {
  std::string device;
  Application application = Application::kClassification;
  int dnn_id = 1;
  Delegate delegate = Delegate::kCpu1;
  double avg_power_mw = 0.0;
  double latency_ms = 0.0;
  double energy_mj = 0.0;

  friend bool operator==(const AppEnergyRecord&, const AppEnergyRecord&) = default;
};

void validate(const AppEnergyRecord& record);
/// `dnn_id` is written as DNN<n>.
std::vector<AppEnergyRecord> parse_app_dataset(std::string_view text);
std::vector<AppEnergyRecord> load_app_dataset(const std::filesystem::path& path);
std::string app_dataset_to_csv(std::span<const AppEnergyRecord> records);

// Sampling domains.
inline constexpr std::array<std::int64_t, 11> kSampledHw = {1, 7, 8, 13, 14, 27,
                                                            28, 32, 56, 112, 224};
inline constexpr std::array<std::int64_t, 5> kSampledKs = {1, 3, 5, 7, 9};
inline constexpr std::array<std::int64_t, 3> kSampledStride = {1, 2, 4};
inline constexpr std::int64_t kMinChannels = 8;
inline constexpr std::int64_t kMaxChannels = 1024;
/// fc dimensions are flattened feature counts, so they get a wider range.
inline constexpr std::int64_t kMaxFcUnits = 8192;

/// Number of distinct configurations the sampler can produce for a type.
double config_domain_size(KernelType type);

/// `n` distinct configs drawn from the type's domain. Throws DomainError
/// when n exceeds the domain.
std::vector<std::vector<std::int64_t>> sample_kernel_configs(KernelType type,
                                                             std::size_t n,
                                                             std::uint64_t seed);

/// Re-samples Cout of every conv layer in [ceil(0.2 Cout), floor(1.8 Cout)]
/// and KS of every conv / dwconv layer from {1,3,5,7,9} capped at the layer's
/// input size. Declared cin overrides whose upstream channels changed are
/// dropped. Variant i is named <base>_v<i>.
std::vector<ModelGraph> generate_model_variants(const ModelGraph& base,
                                                std::size_t count,
                                                std::uint64_t seed);

}  // namespace edgewatt
