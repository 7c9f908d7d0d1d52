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

// Power trace analysis. Sample i of a trace holds the power over
// [t0 + i/rate, t0 + (i+1)/rate); energies are in mJ when power is in mW and
// time in seconds.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgewatt {

struct PowerTrace {
  double sample_rate = 5000.0;  // Hz
  std::vector<double> samples_mw;
  double t0 = 0.0;  // seconds

  double duration() const { return static_cast<double>(samples_mw.size()) / sample_rate; }
  double end_time() const { return t0 + duration(); }
  /// Energy of one full sample at `power_mw`.
  double quantum_mj(double power_mw) const { return power_mw / sample_rate; }
};

/// Throws ValidationError unless rate > 0, samples non-empty and >= 0.
void validate(const PowerTrace& trace);

struct KernelWindow {
  std::int64_t kernel_index = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
};

/// Throws ValidationError on nonpositive durations or overlapping /
/// out-of-order windows.
void validate_windows(std::span<const KernelWindow> windows);

struct KernelEnergy {
  std::int64_t kernel_index = 0;
  double energy_mj = 0.0;
  double avg_power_mw = 0.0;
};

struct RampUpReport {
  double ramp_duration_s = 0.0;
  /// Mean power before the settle point (equals the flat mean when there is
  /// no ramp; the whole-window mean when the window never settles).
  double ramp_mean_power_mw = 0.0;
  /// Mean power from the settle point to the window end (the final settle
  /// span when the window never settles).
  double flat_mean_power_mw = 0.0;
  bool settled = true;
};

/// Rectangular integration with fractional weighting of boundary samples.
/// Throws DomainError when the window leaves the trace extent.
double integrate_energy(const PowerTrace& trace, double start_s, double duration_s);

std::vector<KernelEnergy> segment_kernels(const PowerTrace& trace,
                                          std::span<const KernelWindow> windows);

/// Earliest offset t (on the sample grid) such that every sample in
/// [t, t + settle_span) lies within +-settle_tolerance of the median of the
/// window's final settle span.
RampUpReport detect_ramp_up(const PowerTrace& trace, const KernelWindow& window,
                            double settle_tolerance = 0.05,
                            double settle_span_s = 0.005);

/// Point-samples the trace (nearest sample) at t0 + phase + k * period,
/// producing the low-rate reading sequence of a built-in current sensor.
PowerTrace simulate_bic_sensor(const PowerTrace& trace, double sensor_period_s,
                               double phase_s = 0.0);

/// Energy estimated from sensor readings: mean of the readings taken inside
/// [start, start + duration) times the duration. Throws DomainError when no
/// reading lands in the window.
double sensor_energy_estimate(const PowerTrace& sensor, double start_s,
                              double duration_s);

/// `time_s,power_mw` table with monotone time and a constant step.
PowerTrace parse_trace_csv(std::string_view text);
std::string trace_to_csv(const PowerTrace& trace);
/// `kernel_index,start_s,duration_s` table.
std::vector<KernelWindow> parse_windows_csv(std::string_view text);
std::string windows_to_csv(std::span<const KernelWindow> windows);

}  // namespace edgewatt
