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

#include "edgewatt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "edgewatt/error.hpp"
#include "edgewatt/rng.hpp"
#include "edgewatt/table.hpp"

namespace edgewatt {

namespace {

constexpr std::string_view kKernelHeader =
    "device,processor,kernel_type,hw,cin,cout,ks,stride,cin2,cin3,cin4,"
    "energy_mj,latency_ms,avg_power_mw";
constexpr std::string_view kModelHeader =
    "device,processor,model_family,variant_id,energy_mj,flops,model_file";
constexpr std::string_view kAppHeader =
    "device,application,dnn_id,delegate,avg_power_mw,latency_ms,energy_mj";

void check_text_field(const std::string& value, std::string_view column) {
  if (value.find_first_of(",\"\n\r") != std::string::npos)
    throw ValidationError("field '" + std::string(column) +
                          "' may not contain commas, quotes or newlines: " + value);
}

void require_text(const std::string& value, std::string_view column) {
  if (value.empty()) throw ValidationError("field '" + std::string(column) + "' is empty");
  check_text_field(value, column);
}

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

// Rethrows a record-level error with its source line attached.
template <typename Fn>
void at_line(std::size_t line, Fn&& fn) {
  try {
    fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line);
  }
}

std::int64_t log_uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const double v = std::exp(rng.uniform(std::log(static_cast<double>(lo)),
                                        std::log(static_cast<double>(hi))));
  return std::clamp<std::int64_t>(std::llround(v), lo, hi);
}

template <std::size_t N>
std::int64_t pick(Rng& rng, const std::array<std::int64_t, N>& values, std::int64_t cap) {
  std::size_t usable = 0;
  while (usable < N && values[usable] <= cap) ++usable;
  return values[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(usable) - 1))];
}

template <std::size_t N>
double count_le(const std::array<std::int64_t, N>& values, std::int64_t cap) {
  return static_cast<double>(std::count_if(values.begin(), values.end(),
                                           [&](std::int64_t v) { return v <= cap; }));
}

}  // namespace

std::string_view to_string(Processor processor) {
  return processor == Processor::kCpu ? "cpu" : "gpu";
}

std::optional<Processor> processor_from_string(std::string_view name) {
  if (name == "cpu") return Processor::kCpu;
  if (name == "gpu") return Processor::kGpu;
  return std::nullopt;
}

void validate(const KernelEnergyRecord& r) {
  require_text(r.device, "device");
  validate_kernel(KernelInstance{r.kernel_type, r.config, 1, {}});
  if (!positive_finite(r.energy_mj))
    throw ValidationError("energy_mj must be positive, got " + format_number(r.energy_mj));
  if (r.latency_ms && !positive_finite(*r.latency_ms))
    throw ValidationError("latency_ms must be positive");
  if (r.avg_power_mw && !(*r.avg_power_mw >= 0.0 && std::isfinite(*r.avg_power_mw)))
    throw ValidationError("avg_power_mw must be >= 0");
  if (r.latency_ms && r.avg_power_mw) {
    const double implied = *r.avg_power_mw * *r.latency_ms / 1000.0;
    if (std::abs(r.energy_mj - implied) / r.energy_mj > kRecordConsistencyTolerance)
      throw ValidationError("energy_mj " + format_number(r.energy_mj) +
                            " disagrees with avg_power_mw * latency_ms = " +
                            format_number(implied));
  }
}

KernelInstance kernel_of(const KernelEnergyRecord& record) {
  return make_kernel(record.kernel_type, record.config, Padding::kSame);
}

std::vector<KernelEnergyRecord> parse_kernel_dataset(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t c_device = table.require_column("device");
  const std::size_t c_proc = table.require_column("processor");
  const std::size_t c_type = table.require_column("kernel_type");
  std::array<std::size_t, 8> c_config{};
  for (std::size_t i = 0; i < kConfigColumns.size(); ++i)
    c_config[i] = table.require_column(kConfigColumns[i]);
  const std::size_t c_energy = table.require_column("energy_mj");
  const std::size_t c_latency = table.require_column("latency_ms");
  const std::size_t c_power = table.require_column("avg_power_mw");

  std::vector<KernelEnergyRecord> records;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    KernelEnergyRecord r;
    r.device = row.fields[c_device];
    const auto proc = processor_from_string(row.fields[c_proc]);
    if (!proc) throw ParseError("unknown processor '" + row.fields[c_proc] + "'", row.line);
    r.processor = *proc;
    const auto type = kernel_type_from_string(row.fields[c_type]);
    if (!type) throw ParseError("unknown kernel type '" + row.fields[c_type] + "'", row.line);
    r.kernel_type = *type;
    ConfigColumns cols;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& f = row.fields[c_config[i]];
      if (!f.empty()) cols[i] = parse_int_field(f, row.line, kConfigColumns[i]);
    }
    at_line(row.line, [&] { r.config = from_config_columns(r.kernel_type, cols); });
    r.energy_mj = parse_double_field(row.fields[c_energy], row.line, "energy_mj");
    if (!row.fields[c_latency].empty())
      r.latency_ms = parse_double_field(row.fields[c_latency], row.line, "latency_ms");
    if (!row.fields[c_power].empty())
      r.avg_power_mw = parse_double_field(row.fields[c_power], row.line, "avg_power_mw");
    at_line(row.line, [&] { validate(r); });
    const std::string key = r.device + '|' + std::string(to_string(r.processor)) + '|' +
                            kernel_signature(r.kernel_type, r.config);
    if (!seen.insert(key).second)
      throw ParseError("duplicate record for " + key, row.line);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<KernelEnergyRecord> load_kernel_dataset(const std::filesystem::path& path) {
  return parse_kernel_dataset(read_text_file(path));
}

std::string kernel_dataset_to_csv(std::span<const KernelEnergyRecord> records) {
  std::ostringstream out;
  out << kKernelHeader << '\n';
  for (const auto& r : records) {
    validate(r);
    out << r.device << ',' << to_string(r.processor) << ',' << to_string(r.kernel_type);
    for (const auto& c : to_config_columns(r.kernel_type, r.config)) {
      out << ',';
      if (c) out << *c;
    }
    out << ',' << format_number(r.energy_mj) << ',';
    if (r.latency_ms) out << format_number(*r.latency_ms);
    out << ',';
    if (r.avg_power_mw) out << format_number(*r.avg_power_mw);
    out << '\n';
  }
  return out.str();
}

void validate(const ModelEnergyRecord& r) {
  require_text(r.device, "device");
  require_text(r.model_family, "model_family");
  check_text_field(r.model_file, "model_file");
  if (!positive_finite(r.energy_mj)) throw ValidationError("energy_mj must be positive");
  if (r.flops < 0) throw ValidationError("flops must be >= 0");
  if (r.variant_id < 0) throw ValidationError("variant_id must be >= 0");
}

std::vector<ModelEnergyRecord> parse_model_dataset(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t c_device = table.require_column("device");
  const std::size_t c_proc = table.require_column("processor");
  const std::size_t c_family = table.require_column("model_family");
  const std::size_t c_variant = table.require_column("variant_id");
  const std::size_t c_energy = table.require_column("energy_mj");
  const std::size_t c_flops = table.require_column("flops");
  const std::size_t c_file = table.require_column("model_file");
  std::vector<ModelEnergyRecord> records;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    ModelEnergyRecord r;
    r.device = row.fields[c_device];
    const auto proc = processor_from_string(row.fields[c_proc]);
    if (!proc) throw ParseError("unknown processor '" + row.fields[c_proc] + "'", row.line);
    r.processor = *proc;
    r.model_family = row.fields[c_family];
    r.variant_id = parse_int_field(row.fields[c_variant], row.line, "variant_id");
    r.energy_mj = parse_double_field(row.fields[c_energy], row.line, "energy_mj");
    r.flops = parse_int_field(row.fields[c_flops], row.line, "flops");
    r.model_file = row.fields[c_file];
    at_line(row.line, [&] { validate(r); });
    const std::string key = r.device + '|' + std::string(to_string(r.processor)) + '|' +
                            r.model_family + '|' + std::to_string(r.variant_id);
    if (!seen.insert(key).second) throw ParseError("duplicate record for " + key, row.line);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ModelEnergyRecord> load_model_dataset(const std::filesystem::path& path) {
  return parse_model_dataset(read_text_file(path));
}

std::string model_dataset_to_csv(std::span<const ModelEnergyRecord> records) {
  std::ostringstream out;
  out << kModelHeader << '\n';
  for (const auto& r : records) {
    validate(r);
    out << r.device << ',' << to_string(r.processor) << ',' << r.model_family << ','
        << r.variant_id << ',' << format_number(r.energy_mj) << ',' << r.flops << ','
        << r.model_file << '\n';
  }
  return out.str();
}

std::string_view to_string(Application application) {
  switch (application) {
    case Application::kDetection: return "detection";
    case Application::kClassification: return "classification";
    case Application::kSuperResolution: return "super_resolution";
    case Application::kSegmentation: return "segmentation";
    case Application::kQuestionAnswering: return "question_answering";
    case Application::kSpeechRecognition: return "speech_recognition";
  }
  return "unknown";
}

std::optional<Application> application_from_string(std::string_view name) {
  for (auto a : {Application::kDetection, Application::kClassification,
                 Application::kSuperResolution, Application::kSegmentation,
                 Application::kQuestionAnswering, Application::kSpeechRecognition})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

std::string_view to_string(Delegate delegate) {
  switch (delegate) {
    case Delegate::kCpu1: return "cpu1";
    case Delegate::kCpu4: return "cpu4";
    case Delegate::kGpu: return "gpu";
    case Delegate::kNnapi: return "nnapi";
  }
  return "unknown";
}

std::optional<Delegate> delegate_from_string(std::string_view name) {
  for (auto d : kAllDelegates)
    if (to_string(d) == name) return d;
  return std::nullopt;
}

Application application_of_dnn(int dnn_id) {
  if (dnn_id < 1 || dnn_id > kReferenceDnnCount)
    throw ValidationError("dnn_id must be in 1..12, got " + std::to_string(dnn_id));
  if (dnn_id <= 4) return Application::kDetection;
  if (dnn_id <= 8) return Application::kClassification;
  if (dnn_id == 9) return Application::kSuperResolution;
  if (dnn_id == 10) return Application::kSegmentation;
  if (dnn_id == 11) return Application::kQuestionAnswering;
  return Application::kSpeechRecognition;
}

bool delegate_supported(int dnn_id, Delegate delegate) {
  application_of_dnn(dnn_id);
  switch (dnn_id) {
    case 5:
    case 7:
      return true;
    case 9:
      return delegate == Delegate::kCpu1 || delegate == Delegate::kGpu;
    case 10:
      return delegate == Delegate::kCpu4;
    default:
      return delegate != Delegate::kGpu;
  }
}

void validate(const AppEnergyRecord& r) {
  require_text(r.device, "device");
  if (application_of_dnn(r.dnn_id) != r.application)
    throw ValidationError("DNN" + std::to_string(r.dnn_id) + " does not serve application " +
                          std::string(to_string(r.application)));
  if (!delegate_supported(r.dnn_id, r.delegate))
    throw ValidationError("DNN" + std::to_string(r.dnn_id) + " does not support delegate " +
                          std::string(to_string(r.delegate)));
  if (!(r.avg_power_mw >= 0.0) || !std::isfinite(r.avg_power_mw))
    throw ValidationError("avg_power_mw must be >= 0");
  if (!positive_finite(r.latency_ms)) throw ValidationError("latency_ms must be positive");
  if (!positive_finite(r.energy_mj)) throw ValidationError("energy_mj must be positive");
}

std::vector<AppEnergyRecord> parse_app_dataset(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t c_device = table.require_column("device");
  const std::size_t c_app = table.require_column("application");
  const std::size_t c_dnn = table.require_column("dnn_id");
  const std::size_t c_delegate = table.require_column("delegate");
  const std::size_t c_power = table.require_column("avg_power_mw");
  const std::size_t c_latency = table.require_column("latency_ms");
  const std::size_t c_energy = table.require_column("energy_mj");
  std::vector<AppEnergyRecord> records;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    AppEnergyRecord r;
    r.device = row.fields[c_device];
    const auto app = application_from_string(row.fields[c_app]);
    if (!app) throw ParseError("unknown application '" + row.fields[c_app] + "'", row.line);
    r.application = *app;
    const std::string& dnn = row.fields[c_dnn];
    if (dnn.rfind("DNN", 0) != 0) throw ParseError("dnn_id must look like DNN<n>", row.line);
    r.dnn_id = static_cast<int>(parse_int_field(std::string_view(dnn).substr(3), row.line, "dnn_id"));
    const auto delegate = delegate_from_string(row.fields[c_delegate]);
    if (!delegate)
      throw ParseError("unknown delegate '" + row.fields[c_delegate] + "'", row.line);
    r.delegate = *delegate;
    r.avg_power_mw = parse_double_field(row.fields[c_power], row.line, "avg_power_mw");
    r.latency_ms = parse_double_field(row.fields[c_latency], row.line, "latency_ms");
    r.energy_mj = parse_double_field(row.fields[c_energy], row.line, "energy_mj");
    at_line(row.line, [&] { validate(r); });
    const std::string key =
        r.device + '|' + dnn + '|' + std::string(to_string(r.delegate));
    if (!seen.insert(key).second) throw ParseError("duplicate record for " + key, row.line);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<AppEnergyRecord> load_app_dataset(const std::filesystem::path& path) {
  return parse_app_dataset(read_text_file(path));
}

std::string app_dataset_to_csv(std::span<const AppEnergyRecord> records) {
  std::ostringstream out;
  out << kAppHeader << '\n';
  for (const auto& r : records) {
    validate(r);
    out << r.device << ',' << to_string(r.application) << ",DNN" << r.dnn_id << ','
        << to_string(r.delegate) << ',' << format_number(r.avg_power_mw) << ','
        << format_number(r.latency_ms) << ',' << format_number(r.energy_mj) << '\n';
  }
  return out.str();
}

double config_domain_size(KernelType type) {
  const double channels = static_cast<double>(kMaxChannels - kMinChannels + 1);
  double total = 0.0;
  switch (layout_of(type)) {
    case ConfigLayout::kConvFamily:
      for (auto hw : kSampledHw)
        total += count_le(kSampledKs, hw) * count_le(kSampledStride, hw) * channels * channels;
      return total;
    case ConfigLayout::kDwconvFamily:
    case ConfigLayout::kPool:
      for (auto hw : kSampledHw)
        total += count_le(kSampledKs, hw) * count_le(kSampledStride, hw) * channels;
      return total;
    case ConfigLayout::kSpatial:
      return static_cast<double>(kSampledHw.size()) * channels;
    case ConfigLayout::kFc: {
      const double units = static_cast<double>(kMaxFcUnits - kMinChannels + 1);
      return units * units;
    }
    case ConfigLayout::kConcat:
      return static_cast<double>(kSampledHw.size()) *
             (std::pow(channels, 2) + std::pow(channels, 3) + std::pow(channels, 4));
  }
  return 0.0;
}

std::vector<std::vector<std::int64_t>> sample_kernel_configs(KernelType type,
                                                             std::size_t n,
                                                             std::uint64_t seed) {
  if (n == 0) throw DomainError("sample count must be >= 1");
  if (static_cast<double>(n) > config_domain_size(type))
    throw DomainError("requested " + std::to_string(n) + " distinct " +
                      std::string(to_string(type)) + " configs, domain holds only " +
                      format_number(config_domain_size(type)));
  Rng rng(derive_seed(seed, std::string("configs:") + std::string(to_string(type))));
  auto channels = [&] { return log_uniform_int(rng, kMinChannels, kMaxChannels); };

  std::set<std::vector<std::int64_t>> seen;
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(n);
  while (out.size() < n) {
    std::vector<std::int64_t> c;
    switch (layout_of(type)) {
      case ConfigLayout::kConvFamily: {
        const auto hw = pick(rng, kSampledHw, kSampledHw.back());
        const auto cin = channels();
        const auto cout = channels();
        const auto ks = pick(rng, kSampledKs, hw);
        const auto s = pick(rng, kSampledStride, hw);
        c = {hw, cin, cout, ks, s};
        break;
      }
      case ConfigLayout::kDwconvFamily:
      case ConfigLayout::kPool: {
        const auto hw = pick(rng, kSampledHw, kSampledHw.back());
        const auto cin = channels();
        const auto ks = pick(rng, kSampledKs, hw);
        const auto s = pick(rng, kSampledStride, hw);
        c = {hw, cin, ks, s};
        break;
      }
      case ConfigLayout::kSpatial: {
        const auto hw = pick(rng, kSampledHw, kSampledHw.back());
        c = {hw, channels()};
        break;
      }
      case ConfigLayout::kFc: {
        const auto cin = log_uniform_int(rng, kMinChannels, kMaxFcUnits);
        const auto cout = log_uniform_int(rng, kMinChannels, kMaxFcUnits);
        c = {cin, cout};
        break;
      }
      case ConfigLayout::kConcat: {
        const auto hw = pick(rng, kSampledHw, kSampledHw.back());
        const auto inputs = rng.uniform_int(2, 4);
        c = {hw, 0, 0, 0, 0};
        for (std::int64_t i = 0; i < inputs; ++i) c[static_cast<std::size_t>(1 + i)] = channels();
        break;
      }
    }
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

std::vector<ModelGraph> generate_model_variants(const ModelGraph& base, std::size_t count,
                                                std::uint64_t seed) {
  if (count == 0) throw DomainError("variant count must be >= 1");
  validate(base);
  const ShapeInference base_shapes = infer_shapes(base, Padding::kSame);

  auto upstream_channels = [](const ModelGraph& g, const ShapeInference& s,
                              const PrimitiveOp& op) {
    return op.inputs.empty() ? g.input_shape.channels : s.output(op.inputs.front()).channels;
  };

  std::vector<ModelGraph> variants;
  variants.reserve(count);
  for (std::size_t v = 0; v < count; ++v) {
    Rng rng(derive_seed(seed, "variant:" + base.name, v));
    ModelGraph g = base;
    g.name = base.name + "_v" + std::to_string(v);
    for (auto& op : g.ops) {
      if (op.kind != OpKind::kConv && op.kind != OpKind::kDwconv) continue;
      if (op.kind == OpKind::kConv) {
        const std::int64_t c0 = op.attr("cout");
        const std::int64_t lo = std::max<std::int64_t>(1, (c0 + 4) / 5);
        const std::int64_t hi = std::max(lo, 9 * c0 / 5);
        op.attrs["cout"] = rng.uniform_int(lo, hi);
      }
      op.attrs["ks"] = pick(rng, kSampledKs, base_shapes.at(op.id).input.hw);
    }
    // Drop channel overrides that no longer describe the re-sampled upstream.
    for (bool changed = true; changed;) {
      changed = false;
      const ShapeInference shapes = infer_shapes(g, Padding::kSame);
      for (auto& op : g.ops) {
        if (!op.cin_override) continue;
        const PrimitiveOp& base_op = *base.find(op.id);
        if (upstream_channels(g, shapes, op) != upstream_channels(base, base_shapes, base_op)) {
          op.cin_override.reset();
          changed = true;
          break;
        }
      }
    }
    validate(g);
    variants.push_back(std::move(g));
  }
  return variants;
}

}  // namespace edgewatt
