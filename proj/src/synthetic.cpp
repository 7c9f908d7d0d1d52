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

#include "edgewatt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgewatt/cost.hpp"
#include "edgewatt/error.hpp"

namespace edgewatt {

namespace {

// Per-layout energy forms. With o the output size, h the input size and
// g = o^2 h^(p-2) (equal to o^p at stride 1):
//   conv     a g KS^2 Cin Cout + b g Cout + c
//   dwconv   a g KS^2 Cin      + b g Cin  + c
//   pool     a g KS^2 Cin      + b h^p Cin + c
//   spatial                      b h^p Cin + c
//   fc       a Cin Cout        + b Cout    + c
//   concat                       b h^p sum(Cin) + c
double oracle_energy(const OracleCoefficients& k, double p, const KernelInstance& kernel) {
  const auto& c = kernel.config;
  auto d = [&](std::size_t i) { return static_cast<double>(c[i]); };
  const double o = static_cast<double>(kernel.out_hw);
  const double g = o * o * std::pow(d(0), p - 2.0);
  switch (layout_of(kernel.type)) {
    case ConfigLayout::kConvFamily:
      return k.a * g * d(3) * d(3) * d(1) * d(2) + k.b * g * d(2) + k.c;
    case ConfigLayout::kDwconvFamily:
      return k.a * g * d(2) * d(2) * d(1) + k.b * g * d(1) + k.c;
    case ConfigLayout::kPool:
      return k.a * g * d(2) * d(2) * d(1) + k.b * std::pow(d(0), p) * d(1) + k.c;
    case ConfigLayout::kSpatial:
      return k.b * std::pow(d(0), p) * d(1) + k.c;
    case ConfigLayout::kFc:
      return k.a * d(0) * d(1) + k.b * d(1) + k.c;
    case ConfigLayout::kConcat:
      return k.b * std::pow(d(0), p) * (d(1) + d(2) + d(3) + d(4)) + k.c;
  }
  return k.c;
}

double base_power_mw(KernelType type) {
  switch (layout_of(type)) {
    case ConfigLayout::kConvFamily: return 2200.0;
    case ConfigLayout::kDwconvFamily: return 1900.0;
    case ConfigLayout::kPool: return 1700.0;
    case ConfigLayout::kSpatial: return 1600.0;
    case ConfigLayout::kFc: return 2000.0;
    case ConfigLayout::kConcat: return 1500.0;
  }
  return 1500.0;
}

constexpr double kGpuPowerScale = 0.55;

}  // namespace

HwCurveFit fit_hw_curve(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("curve fit needs at least two points");
  for (const auto& [x, e] : points)
    if (!(x > 0.0) || !(e > 0.0)) throw DomainError("curve fit points must be positive");

  HwCurveFit best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= 2000; ++step) {
    const double p = 1.0 + 0.001 * step;
    double sxx = 0, sx = 0, s1 = 0, sxe = 0, se = 0;
    for (const auto& [h, e] : points) {
      const double x = std::pow(h, p);
      const double w = 1.0 / (e * e);
      sxx += w * x * x;
      sx += w * x;
      s1 += w;
      sxe += w * x * e;
      se += w * e;
    }
    const double det = sxx * s1 - sx * sx;
    double scale = (sxe * s1 - sx * se) / det;
    double offset = (sxx * se - sx * sxe) / det;
    if (!(offset >= 0.0) || !std::isfinite(det) || det == 0.0) {
      offset = 0.0;
      scale = sxe / sxx;
    }
    double loss = 0.0;
    for (const auto& [h, e] : points) {
      const double r = (scale * std::pow(h, p) + offset) / e - 1.0;
      loss += r * r;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = HwCurveFit{p, scale, offset};
    }
  }
  return best;
}

SyntheticOracle SyntheticOracle::make_default(double noise_fraction, std::uint64_t seed) {
  if (!(noise_fraction >= 0.0 && noise_fraction <= 0.1))
    throw DomainError("noise_fraction must lie in [0, 0.1]");
  const HwCurveFit fit = fit_hw_curve(kReferenceHwSweep);
  const double cin = static_cast<double>(kReferenceSweepConfig[0]);
  const double cout = static_cast<double>(kReferenceSweepConfig[1]);
  const double ks = static_cast<double>(kReferenceSweepConfig[2]);
  // 90% of the sweep's HW-dependent energy goes to the MAC term.
  const double a = 0.9 * fit.scale / (ks * ks * cin * cout);
  const double b = 0.1 * fit.scale / cout;
  const double c = fit.offset;

  SyntheticOracle o;
  o.hw_exponent = fit.exponent;
  o.noise_fraction = noise_fraction;
  o.seed = seed;
  o.cpu = {
      {KernelType::kConvBnRelu, {a, b, c}},
      {KernelType::kConvRelu, {a, 0.8 * b, c}},
      {KernelType::kConv, {a, 0.5 * b, 0.8 * c}},
      {KernelType::kDwconvBnRelu, {30 * a, b, 0.5 * c}},
      {KernelType::kDwconvRelu, {30 * a, 0.8 * b, 0.5 * c}},
      {KernelType::kDwconv, {30 * a, 0.5 * b, 0.4 * c}},
      {KernelType::kBnRelu, {0, 1.2 * b, 0.25 * c}},
      {KernelType::kBn, {0, 0.8 * b, 0.25 * c}},
      {KernelType::kRelu, {0, 0.6 * b, 0.25 * c}},
      {KernelType::kAvgpool, {12 * a, 0.5 * b, 0.3 * c}},
      {KernelType::kMaxpool, {10 * a, 0.5 * b, 0.3 * c}},
      {KernelType::kGlobalpool, {0, 0.6 * b, 0.25 * c}},
      {KernelType::kFc, {2.5e-7, 1e-5, 0.5 * c}},
      {KernelType::kConcat, {0, 0.3 * b, 0.25 * c}},
      {KernelType::kAdd, {0, b, 0.25 * c}},
      {KernelType::kOthers, {0, b, 0.25 * c}},
  };
  for (const auto& [type, k] : o.cpu) o.gpu[type] = {0.35 * k.a, 0.5 * k.b, 1.5 * k.c};
  return o;
}

const OracleCoefficients& SyntheticOracle::coefficients(KernelType type,
                                                        Processor processor) const {
  const auto& table = processor == Processor::kCpu ? cpu : gpu;
  const auto it = table.find(type);
  if (it == table.end())
    throw UnknownKernelTypeError("oracle has no coefficients for " +
                                 std::string(to_string(type)) + " on " +
                                 std::string(to_string(processor)));
  return it->second;
}

double synth_energy(const SyntheticOracle& oracle, const KernelInstance& kernel,
                    Processor processor) {
  validate_kernel(kernel);
  const double e = oracle_energy(oracle.coefficients(kernel.type, processor),
                                 oracle.hw_exponent, kernel);
  if (!(e > 0.0) || !std::isfinite(e))
    throw DomainError("oracle produced a nonpositive energy for " + kernel_signature(kernel));
  return e;
}

double synth_power_mw(const SyntheticOracle& oracle, const KernelInstance& kernel,
                      Processor processor) {
  oracle.coefficients(kernel.type, processor);
  const double flops = static_cast<double>(kernel_cost(kernel).flops);
  const double scale = processor == Processor::kCpu ? 1.0 : kGpuPowerScale;
  return base_power_mw(kernel.type) * scale * (1.0 + 0.15 * std::log10(1.0 + flops / 1e6));
}

double synth_latency_ms(const SyntheticOracle& oracle, const KernelInstance& kernel,
                        Processor processor) {
  return 1000.0 * synth_energy(oracle, kernel, processor) /
         synth_power_mw(oracle, kernel, processor);
}

double apply_label_noise(const SyntheticOracle& oracle, double energy_mj, Rng& rng) {
  if (oracle.noise_fraction == 0.0) return energy_mj;
  const double factor = 1.0 + oracle.noise_fraction * rng.normal();
  return energy_mj * std::max(factor, 0.05);
}

double synth_model_energy(const SyntheticOracle& oracle, const KernelSequence& sequence,
                          Processor processor) {
  double total = 0.0;
  for (const auto& k : sequence.kernels) total += synth_energy(oracle, k, processor);
  return total;
}

std::vector<std::pair<KernelType, std::size_t>> default_training_mix() {
  return {
      {KernelType::kConvBnRelu, 800}, {KernelType::kConvRelu, 150},
      {KernelType::kConv, 150},       {KernelType::kDwconvBnRelu, 350},
      {KernelType::kMaxpool, 100},    {KernelType::kAvgpool, 100},
      {KernelType::kGlobalpool, 100}, {KernelType::kFc, 150},
      {KernelType::kBnRelu, 100},
  };
}

std::vector<KernelEnergyRecord> synth_kernel_records(
    const SyntheticOracle& oracle, const std::string& device, Processor processor,
    std::span<const std::pair<KernelType, std::size_t>> counts, std::uint64_t seed) {
  std::vector<KernelEnergyRecord> records;
  for (const auto& [type, n] : counts) {
    const auto configs = sample_kernel_configs(type, n, seed);
    const std::string tag = "noise:" + std::string(to_string(type));
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const KernelInstance k = make_kernel(type, configs[i], Padding::kSame);
      Rng rng(derive_seed(oracle.seed, tag, i));
      const double truth = synth_energy(oracle, k, processor);
      const double latency = synth_latency_ms(oracle, k, processor);
      const double label = apply_label_noise(oracle, truth, rng);
      records.push_back(KernelEnergyRecord{device, processor, type, configs[i], label,
                                           latency, 1000.0 * label / latency});
    }
  }
  return records;
}

SynthTrace render_trace(std::span<const TraceSegment> segments, double sample_rate,
                        double ramp_duration_s, double ramp_gain) {
  if (!(sample_rate >= 1000.0)) throw DomainError("sample rate must be >= 1000 Hz");
  if (!(ramp_duration_s >= 0.0)) throw DomainError("ramp duration must be >= 0");
  if (!(ramp_gain > 0.0)) throw DomainError("ramp gain must be positive");

  struct Piece {
    double t0, t1, power;
  };
  std::vector<Piece> pieces;
  SynthTrace out;
  double t = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.latency_s > 0.0)) throw DomainError("segment latency must be positive");
    if (!(s.energy_mj >= 0.0)) throw DomainError("segment energy must be >= 0");
    out.windows.push_back(KernelWindow{static_cast<std::int64_t>(i), t, s.latency_s});
    const double end = t + s.latency_s;
    if (ramp_gain != 1.0 && ramp_duration_s > 0.0 && s.latency_s > ramp_duration_s) {
      const double flat =
          s.energy_mj / (ramp_gain * ramp_duration_s + s.latency_s - ramp_duration_s);
      pieces.push_back({t, t + ramp_duration_s, ramp_gain * flat});
      pieces.push_back({t + ramp_duration_s, end, flat});
    } else {
      pieces.push_back({t, end, s.energy_mj / s.latency_s});
    }
    t = end;
  }

  out.trace.sample_rate = sample_rate;
  out.trace.t0 = 0.0;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t * sample_rate - 1e-9)));
  out.trace.samples_mw.assign(n, 0.0);
  for (const auto& p : pieces) {
    const double u0 = p.t0 * sample_rate;
    const double u1 = p.t1 * sample_rate;
    const auto first = static_cast<std::size_t>(std::floor(u0));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(u1)));
    for (std::size_t i = first; i < last; ++i) {
      const double lo = std::max(u0, static_cast<double>(i));
      const double hi = std::min(u1, static_cast<double>(i + 1));
      if (hi > lo) out.trace.samples_mw[i] += p.power * (hi - lo);
    }
  }
  return out;
}

SynthTrace synth_trace(const SyntheticOracle& oracle, const KernelSequence& sequence,
                       Processor processor, double sample_rate, double ramp_duration_s,
                       double ramp_gain) {
  std::vector<TraceSegment> segments;
  segments.reserve(sequence.kernels.size());
  for (const auto& k : sequence.kernels)
    segments.push_back(TraceSegment{synth_energy(oracle, k, processor),
                                    synth_latency_ms(oracle, k, processor) / 1000.0});
  return render_trace(segments, sample_rate, ramp_duration_s, ramp_gain);
}

namespace {

std::string conv_bn_relu(ModelGraphBuilder& b, const std::string& in, std::int64_t cout,
                         std::int64_t ks, std::int64_t stride) {
  const std::string c = b.conv(in, cout, ks, stride);
  return b.unary(OpKind::kRelu, b.unary(OpKind::kBn, c));
}

std::string dw_bn_relu(ModelGraphBuilder& b, const std::string& in, std::int64_t stride) {
  const std::string d = b.dwconv(in, 3, stride);
  return b.unary(OpKind::kRelu, b.unary(OpKind::kBn, d));
}

ModelGraph alexnet_like() {
  ModelGraphBuilder b("alexnet_like", {224, 3});
  std::string x = conv_bn_relu(b, "", 96, 7, 4);
  x = b.pool(OpKind::kMaxpool, x, 3, 2);
  x = conv_bn_relu(b, x, 192, 5, 1);
  x = b.pool(OpKind::kMaxpool, x, 3, 2);
  x = conv_bn_relu(b, x, 384, 3, 1);
  x = conv_bn_relu(b, x, 256, 3, 1);
  x = conv_bn_relu(b, x, 256, 3, 1);
  x = b.pool(OpKind::kMaxpool, x, 3, 2);
  x = b.unary(OpKind::kGlobalpool, x);
  x = b.fc(x, 1024);
  x = b.fc(x, 1024);
  b.fc(x, 1000);
  return b.build();
}

ModelGraph vgg_like() {
  ModelGraphBuilder b("vgg_like", {224, 3});
  std::string x;
  const std::int64_t widths[] = {64, 0, 128, 128, 0, 256, 256, 0, 512, 512, 0, 512, 0};
  x = conv_bn_relu(b, "", 64, 3, 1);
  for (std::int64_t w : widths)
    x = w == 0 ? b.pool(OpKind::kMaxpool, x, 3, 2) : conv_bn_relu(b, x, w, 3, 1);
  x = b.unary(OpKind::kGlobalpool, x);
  x = b.fc(x, 512);
  b.fc(x, 1000);
  return b.build();
}

ModelGraph mobilenet_like() {
  ModelGraphBuilder b("mobilenet_like", {224, 3});
  std::string x = conv_bn_relu(b, "", 32, 3, 2);
  const std::pair<std::int64_t, std::int64_t> blocks[] = {
      {64, 1}, {128, 2}, {128, 1}, {256, 2}, {256, 1}, {512, 2},
      {512, 1}, {512, 1}, {1024, 2}};
  for (const auto& [width, stride] : blocks) {
    x = dw_bn_relu(b, x, stride);
    x = conv_bn_relu(b, x, width, 1, 1);
  }
  x = b.unary(OpKind::kGlobalpool, x);
  b.fc(x, 1000);
  return b.build();
}

// Pre-activation blocks: bn+relu, then a bare conv followed by pooling.
ModelGraph preact_like() {
  ModelGraphBuilder b("preact_like", {224, 3});
  std::string x = b.conv("", 64, 7, 2);
  x = b.pool(OpKind::kMaxpool, x, 3, 2);
  const std::pair<std::int64_t, OpKind> blocks[] = {
      {128, OpKind::kAvgpool}, {256, OpKind::kMaxpool}, {512, OpKind::kAvgpool}};
  for (const auto& [width, pool] : blocks) {
    x = b.unary(OpKind::kRelu, b.unary(OpKind::kBn, x));
    x = b.conv(x, width, 3, 1);
    x = b.pool(pool, x, 3, 2);
  }
  x = b.unary(OpKind::kRelu, b.unary(OpKind::kBn, x));
  x = b.unary(OpKind::kGlobalpool, x);
  b.fc(x, 1000);
  return b.build();
}

}  // namespace

std::vector<ModelGraph> synthetic_family_bases() {
  return {alexnet_like(), vgg_like(), mobilenet_like(), preact_like()};
}

SyntheticModelSet synth_model_dataset(const SyntheticOracle& oracle, const std::string& device,
                                      Processor processor, std::span<const ModelGraph> bases,
                                      std::size_t variants_per_family, std::uint64_t seed) {
  SyntheticModelSet set;
  for (const auto& base : bases) {
    auto variants = generate_model_variants(base, variants_per_family, seed);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const KernelSequence seq = fuse_kernels(variants[v], Padding::kSame);
      set.records.push_back(ModelEnergyRecord{
          device, processor, base.name, static_cast<std::int64_t>(v),
          synth_model_energy(oracle, seq, processor), model_cost(seq).flops,
          variants[v].name + ".json"});
      set.graphs.push_back(std::move(variants[v]));
    }
  }
  return set;
}

std::vector<AppEnergyRecord> synth_app_records(const std::string& device, double power_scale,
                                               double energy_scale, std::uint64_t seed) {
  if (!(power_scale > 0.0) || !(energy_scale > 0.0))
    throw DomainError("app record scales must be positive");
  constexpr double kBaseLatencyMs[kReferenceDnnCount] = {30, 18, 120, 70, 45, 25,
                                                         20, 12, 60, 90, 150, 8};
  auto speedup = [](Delegate d) {
    switch (d) {
      case Delegate::kCpu1: return 1.0;
      case Delegate::kCpu4: return 0.4;
      case Delegate::kGpu: return 0.3;
      case Delegate::kNnapi: return 0.35;
    }
    return 1.0;
  };
  auto power = [](Delegate d) {
    switch (d) {
      case Delegate::kCpu1: return 1500.0;
      case Delegate::kCpu4: return 3200.0;
      case Delegate::kGpu: return 2400.0;
      case Delegate::kNnapi: return 2000.0;
    }
    return 1500.0;
  };
  std::vector<AppEnergyRecord> records;
  Rng rng(derive_seed(seed, "apps:" + device));
  for (int dnn = 1; dnn <= kReferenceDnnCount; ++dnn) {
    for (Delegate d : kAllDelegates) {
      if (!delegate_supported(dnn, d)) continue;
      AppEnergyRecord r;
      r.device = device;
      r.application = application_of_dnn(dnn);
      r.dnn_id = dnn;
      r.delegate = d;
      r.avg_power_mw = power(d) * power_scale * rng.uniform(0.95, 1.05);
      r.latency_ms = kBaseLatencyMs[dnn - 1] * speedup(d) * (energy_scale / power_scale) *
                     rng.uniform(0.95, 1.05);
      r.energy_mj = r.avg_power_mw * r.latency_ms / 1000.0;
      records.push_back(r);
    }
  }
  return records;
}

}  // namespace edgewatt
