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

// Device scores from application-level records: the power consumption score
// (mean power efficiency against TDP) and the inference energy consumption
// score (summed inferences per joule).

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgewatt/dataset.hpp"

namespace edgewatt {

struct DeviceProfile {
  std::string device;
  double tdp_mw = 0.0;
  std::string soc;           // optional
  std::string device_class;  // optional
};

/// Columns device,tdp_mw with optional soc and class. Throws ParseError on
/// malformed rows and ValidationError on tdp_mw <= 0 or a repeated device.
std::vector<DeviceProfile> parse_device_profiles(std::string_view text);
std::vector<DeviceProfile> load_device_profiles(const std::filesystem::path& path);

/// (1 - apc / tdp) * 100. Negative when apc exceeds tdp. Throws DomainError
/// on tdp <= 0 or apc < 0.
double power_efficiency(double apc_mw, double tdp_mw);

/// Mean power efficiency over every record; n is the record count. Throws
/// DomainError on an empty set and ValidationError on records of another
/// device.
double pcs(std::span<const AppEnergyRecord> records, const DeviceProfile& profile);

/// Inferences per joule: 1000 / energy_mj. Throws DomainError when
/// energy_mj <= 0.
double iec(const AppEnergyRecord& record);

/// Sum of iec over the records. Throws DomainError on an empty set.
double iecs(std::span<const AppEnergyRecord> records);

struct ScoreComponent {
  Application application = Application::kClassification;
  int dnn_id = 1;
  Delegate delegate = Delegate::kCpu1;
  double apc_mw = 0.0;
  double energy_mj = 0.0;
  double pe = 0.0;
  double iec = 0.0;
};

struct ScoreCard {
  std::string device;
  double tdp_mw = 0.0;
  double pcs = 0.0;
  double iecs = 0.0;
  std::vector<ScoreComponent> components;  // in record order
  /// One entry per record whose APC exceeds the TDP.
  std::vector<std::string> warnings;

  bool has_warning() const { return !warnings.empty(); }
};

ScoreCard benchmark_device(std::span<const AppEnergyRecord> records, const DeviceProfile& profile);

/// device,tdp_mw,pcs,iecs,n_records,warnings
std::string scorecards_to_csv(std::span<const ScoreCard> cards);
/// device,application,dnn_id,delegate,apc_mw,energy_mj,pe,iec
std::string score_components_to_csv(std::span<const ScoreCard> cards);

}  // namespace edgewatt
