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

// Desk-scale stand-ins for measured data: a deterministic energy oracle,
// trace rendering, reference model families and application records.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgewatt/dataset.hpp"
#include "edgewatt/fusion.hpp"
#include "edgewatt/model_ir.hpp"
#include "edgewatt/rng.hpp"
#include "edgewatt/trace.hpp"

namespace edgewatt {

/// E = a * o^p * KS^2 * Cin * Cout + b * o^p * Cout + c for the conv family;
/// other layouts use the reduced forms documented in synthetic.cpp.
struct OracleCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// (input HW, energy mJ) pairs of a conv_bn_relu sweep at Cin 20, Cout 120,
/// stride 1 on a mobile CPU. The kernel size is taken to be 3.
inline constexpr std::array<std::pair<double, double>, 5> kReferenceHwSweep = {{
    {14.0, 0.077}, {28.0, 0.22}, {56.0, 0.93}, {112.0, 5.0}, {224.0, 21.81}}};
inline constexpr std::array<std::int64_t, 3> kReferenceSweepConfig = {20, 120, 3};

struct HwCurveFit {
  double exponent = 2.0;
  double scale = 0.0;   // energy = scale * hw^exponent + offset
  double offset = 0.0;
};

/// Grid search over the exponent with a weighted least-squares (scale, offset)
/// solve per candidate, minimizing squared relative error. offset >= 0.
HwCurveFit fit_hw_curve(std::span<const std::pair<double, double>> points);

struct SyntheticOracle {
  double hw_exponent = 2.0;
  std::map<KernelType, OracleCoefficients> cpu;
  std::map<KernelType, OracleCoefficients> gpu;
  /// Multiplicative label noise, factor 1 + noise_fraction * N(0, 1).
  double noise_fraction = 0.0;
  std::uint64_t seed = 42;

  /// Coefficients for every kernel type, calibrated on kReferenceHwSweep.
  static SyntheticOracle make_default(double noise_fraction = 0.0, std::uint64_t seed = 42);

  /// Throws UnknownKernelTypeError when the type has no coefficients.
  const OracleCoefficients& coefficients(KernelType type, Processor processor) const;
};

/// Noise-free energy (mJ). Deterministic and strictly positive.
double synth_energy(const SyntheticOracle& oracle, const KernelInstance& kernel,
                    Processor processor);
/// Mean power (mW) the oracle assigns to a kernel's execution.
double synth_power_mw(const SyntheticOracle& oracle, const KernelInstance& kernel,
                      Processor processor);
double synth_latency_ms(const SyntheticOracle& oracle, const KernelInstance& kernel,
                        Processor processor);
/// Applies the oracle's label noise to `energy_mj`.
double apply_label_noise(const SyntheticOracle& oracle, double energy_mj, Rng& rng);

/// Sum of noise-free kernel energies, in kernel order.
double synth_model_energy(const SyntheticOracle& oracle, const KernelSequence& sequence,
                          Processor processor);

/// Default per-type sample counts of the synthetic kernel dataset (2000).
std::vector<std::pair<KernelType, std::size_t>> default_training_mix();

/// Sampled configs labeled by the oracle. Latency is noise-free; energy
/// carries the label noise and avg power is derived from both.
std::vector<KernelEnergyRecord> synth_kernel_records(
    const SyntheticOracle& oracle, const std::string& device, Processor processor,
    std::span<const std::pair<KernelType, std::size_t>> counts, std::uint64_t seed);

struct TraceSegment {
  double energy_mj = 0.0;
  double latency_s = 0.0;
};

struct SynthTrace {
  PowerTrace trace;
  std::vector<KernelWindow> windows;
};

/// Back-to-back kernel executions starting at t = 0. Segments longer than the
/// ramp start at ramp_gain times their flat power for ramp_duration_s, with
/// the flat power lowered so each segment's energy is preserved. Samples are
/// box averages of the piecewise-constant signal.
SynthTrace render_trace(std::span<const TraceSegment> segments, double sample_rate,
                        double ramp_duration_s, double ramp_gain);

SynthTrace synth_trace(const SyntheticOracle& oracle, const KernelSequence& sequence,
                       Processor processor, double sample_rate, double ramp_duration_s,
                       double ramp_gain);

/// Reference graphs: alexnet_like, vgg_like, mobilenet_like, preact_like.
std::vector<ModelGraph> synthetic_family_bases();

struct SyntheticModelSet {
  std::vector<ModelGraph> graphs;
  std::vector<ModelEnergyRecord> records;  // model_file = <graph name>.json
};

/// `variants_per_family` variants of each base, labeled with noise-free
/// oracle sums under same padding.
SyntheticModelSet synth_model_dataset(const SyntheticOracle& oracle,
                                      const std::string& device, Processor processor,
                                      std::span<const ModelGraph> bases,
                                      std::size_t variants_per_family, std::uint64_t seed);

/// One record per supported (DNN, delegate) pair. `power_scale` and
/// `energy_scale` shift the device's APC and per-inference energy.
std::vector<AppEnergyRecord> synth_app_records(const std::string& device, double power_scale,
                                               double energy_scale, std::uint64_t seed);

}  // namespace edgewatt
