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

#include "edgewatt/scoring.hpp"

#include <cmath>
#include <set>

#include "edgewatt/error.hpp"
#include "edgewatt/table.hpp"

namespace edgewatt {

namespace {

// Correctly rounded sum (Shewchuk's partials), so the result does not depend
// on record order and a duplicated record set sums to exactly twice as much.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  double value() const {
    if (partials_.empty()) return 0.0;
    std::size_t n = partials_.size() - 1;
    double hi = partials_[n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    // Half-way case: round in the direction of the remaining partials.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

}  // namespace

std::vector<DeviceProfile> parse_device_profiles(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t device_col = table.require_column("device");
  const std::size_t tdp_col = table.require_column("tdp_mw");
  const auto soc_col = table.column("soc");
  const auto class_col = table.column("class");
  std::vector<DeviceProfile> profiles;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    DeviceProfile p;
    p.device = row.fields[device_col];
    if (p.device.empty()) throw ParseError("empty device name", row.line);
    p.tdp_mw = parse_double_field(row.fields[tdp_col], row.line, "tdp_mw");
    if (!(p.tdp_mw > 0.0))
      throw ValidationError("tdp_mw must be positive for device '" + p.device + "' (line " +
                            std::to_string(row.line) + ")");
    if (soc_col) p.soc = row.fields[*soc_col];
    if (class_col) p.device_class = row.fields[*class_col];
    if (!seen.insert(p.device).second)
      throw ValidationError("device '" + p.device + "' listed twice (line " +
                            std::to_string(row.line) + ")");
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<DeviceProfile> load_device_profiles(const std::filesystem::path& path) {
  return parse_device_profiles(read_text_file(path));
}

double power_efficiency(double apc_mw, double tdp_mw) {
  if (!(tdp_mw > 0.0)) throw DomainError("TDP must be positive");
  if (!(apc_mw >= 0.0)) throw DomainError("average power must be nonnegative");
  return (1.0 - apc_mw / tdp_mw) * 100.0;
}

namespace {

void check_device(std::span<const AppEnergyRecord> records, const DeviceProfile& profile) {
  if (records.empty()) throw DomainError("no application records for device '" + profile.device + "'");
  for (const auto& r : records)
    if (r.device != profile.device)
      throw ValidationError("record of device '" + r.device + "' scored against profile '" +
                            profile.device + "'");
}

}  // namespace

double pcs(std::span<const AppEnergyRecord> records, const DeviceProfile& profile) {
  check_device(records, profile);
  ExactSum sum;
  for (const auto& r : records) sum.add(power_efficiency(r.avg_power_mw, profile.tdp_mw));
  return sum.value() / static_cast<double>(records.size());
}

double iec(const AppEnergyRecord& record) {
  if (!(record.energy_mj > 0.0)) throw DomainError("inference energy must be positive");
  return 1000.0 / record.energy_mj;
}

double iecs(std::span<const AppEnergyRecord> records) {
  if (records.empty()) throw DomainError("no application records");
  ExactSum sum;
  for (const auto& r : records) sum.add(iec(r));
  return sum.value();
}

ScoreCard benchmark_device(std::span<const AppEnergyRecord> records, const DeviceProfile& profile) {
  check_device(records, profile);
  ScoreCard card;
  card.device = profile.device;
  card.tdp_mw = profile.tdp_mw;
  for (const auto& r : records) {
    ScoreComponent c;
    c.application = r.application;
    c.dnn_id = r.dnn_id;
    c.delegate = r.delegate;
    c.apc_mw = r.avg_power_mw;
    c.energy_mj = r.energy_mj;
    c.pe = power_efficiency(r.avg_power_mw, profile.tdp_mw);
    c.iec = iec(r);
    if (r.avg_power_mw > profile.tdp_mw)
      card.warnings.push_back("DNN" + std::to_string(r.dnn_id) + "/" +
                              std::string(to_string(r.delegate)) + " draws " +
                              format_number(r.avg_power_mw) + " mW, above the TDP");
    card.components.push_back(c);
  }
  card.pcs = pcs(records, profile);
  card.iecs = iecs(records);
  return card;
}

std::string scorecards_to_csv(std::span<const ScoreCard> cards) {
  std::string out = "device,tdp_mw,pcs,iecs,n_records,warnings\n";
  for (const auto& c : cards)
    out += join({c.device, format_number(c.tdp_mw), format_fixed(c.pcs, 6),
                 format_fixed(c.iecs, 6), std::to_string(c.components.size()),
                 std::to_string(c.warnings.size())},
                ",") +
           "\n";
  return out;
}

std::string score_components_to_csv(std::span<const ScoreCard> cards) {
  std::string out = "device,application,dnn_id,delegate,apc_mw,energy_mj,pe,iec\n";
  for (const auto& card : cards)
    for (const auto& c : card.components)
      out += join({card.device, std::string(to_string(c.application)),
                   "DNN" + std::to_string(c.dnn_id), std::string(to_string(c.delegate)),
                   format_number(c.apc_mw), format_number(c.energy_mj), format_fixed(c.pe, 6),
                   format_fixed(c.iec, 6)},
                  ",") +
             "\n";
  return out;
}

}  // namespace edgewatt
