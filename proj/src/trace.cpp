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

#include "edgewatt/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edgewatt/error.hpp"
#include "edgewatt/table.hpp"

namespace edgewatt {

namespace {

// Slack for comparing positions measured in samples.
constexpr double kGridSlack = 1e-9;
// Slack for comparing window boundaries in seconds.
constexpr double kTimeSlack = 1e-9;

struct SampleRange {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
};

// Samples whose start time lies in [start, start + duration).
SampleRange samples_starting_in(const PowerTrace& trace, double start_s,
                                double duration_s) {
  const double ua = (start_s - trace.t0) * trace.sample_rate;
  const double ub = (start_s + duration_s - trace.t0) * trace.sample_rate;
  const double n = static_cast<double>(trace.samples_mw.size());
  SampleRange r;
  r.first = static_cast<std::size_t>(std::clamp(std::ceil(ua - kGridSlack), 0.0, n));
  r.last = static_cast<std::size_t>(std::clamp(std::ceil(ub - kGridSlack), 0.0, n));
  return r;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

void validate(const PowerTrace& trace) {
  if (!(trace.sample_rate > 0.0) || !std::isfinite(trace.sample_rate))
    throw ValidationError("power trace sample rate must be positive");
  if (trace.samples_mw.empty()) throw ValidationError("power trace is empty");
  for (double p : trace.samples_mw)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("power trace samples must be finite and >= 0");
}

void validate_windows(std::span<const KernelWindow> windows) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (!(w.duration_s > 0.0))
      throw ValidationError("window " + std::to_string(w.kernel_index) +
                            " has nonpositive duration");
    if (i > 0) {
      const auto& prev = windows[i - 1];
      if (w.start_s < prev.start_s + prev.duration_s - kTimeSlack)
        throw ValidationError("window " + std::to_string(w.kernel_index) +
                              " overlaps or precedes window " +
                              std::to_string(prev.kernel_index));
    }
  }
}

double integrate_energy(const PowerTrace& trace, double start_s, double duration_s) {
  validate(trace);
  if (!(duration_s >= 0.0)) throw DomainError("window duration must be >= 0");
  const double n = static_cast<double>(trace.samples_mw.size());
  double ua = (start_s - trace.t0) * trace.sample_rate;
  double ub = (start_s + duration_s - trace.t0) * trace.sample_rate;
  const double slack = kGridSlack * std::max(1.0, n);
  if (ua < -slack || ub > n + slack)
    throw DomainError("window [" + format_number(start_s) + ", " +
                      format_number(start_s + duration_s) +
                      "] s lies outside the trace extent");
  ua = std::clamp(ua, 0.0, n);
  ub = std::clamp(ub, 0.0, n);
  if (ub <= ua) return 0.0;

  const auto first = static_cast<std::size_t>(std::floor(ua));
  const auto last = std::min(trace.samples_mw.size(),
                             static_cast<std::size_t>(std::ceil(ub)));
  double weighted = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double lo = std::max(ua, static_cast<double>(i));
    const double hi = std::min(ub, static_cast<double>(i + 1));
    if (hi > lo) weighted += trace.samples_mw[i] * (hi - lo);
  }
  return weighted / trace.sample_rate;
}

std::vector<KernelEnergy> segment_kernels(const PowerTrace& trace,
                                          std::span<const KernelWindow> windows) {
  validate_windows(windows);
  std::vector<KernelEnergy> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const double e = integrate_energy(trace, w.start_s, w.duration_s);
    out.push_back(KernelEnergy{w.kernel_index, e, e / w.duration_s});
  }
  return out;
}

RampUpReport detect_ramp_up(const PowerTrace& trace, const KernelWindow& window,
                            double settle_tolerance, double settle_span_s) {
  validate(trace);
  if (!(settle_tolerance >= 0.0)) throw DomainError("settle tolerance must be >= 0");
  if (!(settle_span_s > 0.0)) throw DomainError("settle span must be positive");
  if (window.duration_s + kTimeSlack < settle_span_s)
    throw DomainError("window is shorter than the settle span");
  const SampleRange range = samples_starting_in(trace, window.start_s, window.duration_s);
  const std::span<const double> w(trace.samples_mw.data() + range.first,
                                  range.last - range.first);
  const std::size_t span =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(settle_span_s * trace.sample_rate)));
  if (w.size() < span) throw DomainError("window holds fewer samples than the settle span");

  std::vector<double> tail(w.end() - static_cast<std::ptrdiff_t>(span), w.end());
  std::sort(tail.begin(), tail.end());
  const double reference = span % 2 ? tail[span / 2]
                                    : 0.5 * (tail[span / 2 - 1] + tail[span / 2]);
  const double band = settle_tolerance * reference * (1.0 + 1e-12);

  RampUpReport report;
  std::size_t run = 0;
  std::size_t settle_at = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    run = std::abs(w[i] - reference) <= band ? run + 1 : 0;
    if (run == span) {
      settle_at = i + 1 - span;
      break;
    }
  }
  if (settle_at == w.size()) {
    report.settled = false;
    report.ramp_duration_s = window.duration_s;
    report.ramp_mean_power_mw = mean_of(w);
    report.flat_mean_power_mw = mean_of(std::span<const double>(tail));
    return report;
  }
  const double settle_time =
      trace.t0 + static_cast<double>(range.first + settle_at) / trace.sample_rate;
  report.ramp_duration_s =
      settle_at == 0 ? 0.0
                     : std::clamp(settle_time - window.start_s, 0.0, window.duration_s);
  report.flat_mean_power_mw = mean_of(w.subspan(settle_at));
  report.ramp_mean_power_mw =
      settle_at == 0 ? report.flat_mean_power_mw : mean_of(w.first(settle_at));
  return report;
}

PowerTrace simulate_bic_sensor(const PowerTrace& trace, double sensor_period_s,
                               double phase_s) {
  validate(trace);
  const double dt = 1.0 / trace.sample_rate;
  if (!(sensor_period_s >= dt * (1.0 - 1e-9)))
    throw DomainError("sensor period must be at least one trace sample");
  if (!(phase_s >= 0.0) || !(phase_s < sensor_period_s))
    throw DomainError("sensor phase must lie in [0, period)");
  PowerTrace sensor;
  sensor.sample_rate = 1.0 / sensor_period_s;
  sensor.t0 = trace.t0 + phase_s;
  const double extent = trace.duration();
  const auto n = static_cast<long long>(trace.samples_mw.size());
  for (long long k = 0;; ++k) {
    const double t = phase_s + static_cast<double>(k) * sensor_period_s;
    if (t >= extent - kTimeSlack * dt) break;
    const long long idx = std::clamp<long long>(std::llround(t * trace.sample_rate), 0, n - 1);
    sensor.samples_mw.push_back(trace.samples_mw[static_cast<std::size_t>(idx)]);
  }
  if (sensor.samples_mw.empty())
    throw DomainError("no sensor reading falls inside the trace");
  return sensor;
}

double sensor_energy_estimate(const PowerTrace& sensor, double start_s,
                              double duration_s) {
  validate(sensor);
  if (!(duration_s > 0.0)) throw DomainError("window duration must be positive");
  const SampleRange r = samples_starting_in(sensor, start_s, duration_s);
  if (r.last <= r.first)
    throw DomainError("no sensor reading lands in window starting at " +
                      format_number(start_s) + " s");
  const std::span<const double> readings(sensor.samples_mw.data() + r.first,
                                         r.last - r.first);
  return mean_of(readings) * duration_s;
}

PowerTrace parse_trace_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t tcol = table.require_column("time_s");
  const std::size_t pcol = table.require_column("power_mw");
  if (table.rows.size() < 2)
    throw ParseError("trace needs at least two samples to define its rate", 1);
  std::vector<double> times;
  PowerTrace trace;
  for (const auto& row : table.rows) {
    times.push_back(parse_double_field(row.fields[tcol], row.line, "time_s"));
    const double p = parse_double_field(row.fields[pcol], row.line, "power_mw");
    if (p < 0.0) throw ParseError("negative power", row.line);
    trace.samples_mw.push_back(p);
  }
  const double step =
      (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(step > 0.0)) throw ParseError("trace time must increase", table.rows[1].line);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double d = times[i] - times[i - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step)
      throw ParseError("trace time step is not constant", table.rows[i].line);
  }
  trace.sample_rate = 1.0 / step;
  trace.t0 = times.front();
  return trace;
}

std::string trace_to_csv(const PowerTrace& trace) {
  std::ostringstream out;
  out << "time_s,power_mw\n";
  for (std::size_t i = 0; i < trace.samples_mw.size(); ++i) {
    out << format_number(trace.t0 + static_cast<double>(i) / trace.sample_rate) << ','
        << format_number(trace.samples_mw[i]) << '\n';
  }
  return out.str();
}

std::vector<KernelWindow> parse_windows_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t icol = table.require_column("kernel_index");
  const std::size_t scol = table.require_column("start_s");
  const std::size_t dcol = table.require_column("duration_s");
  std::vector<KernelWindow> windows;
  for (const auto& row : table.rows) {
    windows.push_back(KernelWindow{
        parse_int_field(row.fields[icol], row.line, "kernel_index"),
        parse_double_field(row.fields[scol], row.line, "start_s"),
        parse_double_field(row.fields[dcol], row.line, "duration_s")});
  }
  validate_windows(windows);
  return windows;
}

std::string windows_to_csv(std::span<const KernelWindow> windows) {
  std::ostringstream out;
  out << "kernel_index,start_s,duration_s\n";
  for (const auto& w : windows)
    out << w.kernel_index << ',' << format_number(w.start_s) << ','
        << format_number(w.duration_s) << '\n';
  return out.str();
}

}  // namespace edgewatt
