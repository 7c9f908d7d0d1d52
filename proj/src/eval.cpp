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

#include "edgewatt/eval.hpp"

#include <cmath>
#include <set>

#include "edgewatt/error.hpp"
#include "edgewatt/table.hpp"

namespace edgewatt {

double relative_error(double measured, double ground_truth) {
  if (!(ground_truth > 0.0)) throw DomainError("ground truth must be positive");
  return 100.0 * std::abs(measured - ground_truth) / ground_truth;
}

Metrics metrics(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw DomainError("metrics of an empty prediction set");
  double sq = 0.0;
  double sq_rel = 0.0;
  std::size_t within10 = 0;
  std::size_t within15 = 0;
  for (const auto& [predicted, actual] : pairs) {
    if (!(actual > 0.0)) throw DomainError("actual energy must be positive");
    const double diff = predicted - actual;
    const double rel = std::abs(diff) / actual;
    sq += diff * diff;
    sq_rel += rel * rel;
    within10 += rel <= 0.10;
    within15 += rel <= 0.15;
  }
  const auto n = static_cast<double>(pairs.size());
  Metrics m;
  m.n = pairs.size();
  m.rmse_mj = std::sqrt(sq / n);
  m.rmspe_pct = 100.0 * std::sqrt(sq_rel / n);
  m.acc10_pct = 100.0 * static_cast<double>(within10) / n;
  m.acc15_pct = 100.0 * static_cast<double>(within15) / n;
  return m;
}

EvalReport leave_one_out(std::span<const ModelFamily> families, const EstimatorFactory& factory) {
  if (families.size() < 2) throw DomainError("leave-one-out needs at least two families");
  for (const auto& f : families)
    if (f.models.empty()) throw DomainError("family '" + f.name + "' has no models");
  if (!factory.make) throw DomainError("estimator factory is empty");

  EvalReport report;
  ModelEstimator shared;
  if (!factory.needs_model_data) {
    shared = factory.make({});
    ++report.estimators_built;
  }
  for (std::size_t held = 0; held < families.size(); ++held) {
    ModelEstimator estimator = shared;
    if (factory.needs_model_data) {
      std::vector<EvalModel> training;
      for (std::size_t i = 0; i < families.size(); ++i)
        if (i != held)
          training.insert(training.end(), families[i].models.begin(), families[i].models.end());
      estimator = factory.make(training);
      ++report.estimators_built;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& model : families[held].models) {
      const double predicted = estimator(model);
      pairs.emplace_back(predicted, model.energy_mj);
      report.predictions.push_back({families[held].name, model.name, predicted, model.energy_mj});
    }
    report.families.push_back({families[held].name, metrics(pairs)});
  }

  Metrics& o = report.overall.metrics;
  for (const auto& row : report.families) {
    o.rmse_mj += row.metrics.rmse_mj;
    o.rmspe_pct += row.metrics.rmspe_pct;
    o.acc10_pct += row.metrics.acc10_pct;
    o.acc15_pct += row.metrics.acc15_pct;
    o.n += row.metrics.n;
  }
  const auto k = static_cast<double>(report.families.size());
  o.rmse_mj /= k;
  o.rmspe_pct /= k;
  o.acc10_pct /= k;
  o.acc15_pct /= k;
  return report;
}

namespace {

std::string family_line(const FamilyRow& row) {
  const Metrics& m = row.metrics;
  return join({row.family, format_fixed(m.rmse_mj, 6), format_fixed(m.rmspe_pct, 4),
               format_fixed(m.acc10_pct, 2), format_fixed(m.acc15_pct, 2), std::to_string(m.n)},
              ",");
}

}  // namespace

std::string eval_report_to_csv(const EvalReport& report) {
  std::string out = "family,rmse_mj,rmspe_pct,acc10_pct,acc15_pct,n_models\n";
  for (const auto& row : report.families) out += family_line(row) + "\n";
  out += family_line(report.overall) + "\n";
  return out;
}

std::string predictions_to_csv(const EvalReport& report) {
  std::string out = "family,model,predicted_mj,actual_mj,error_pct\n";
  for (const auto& p : report.predictions)
    out += join({p.family, p.model, format_number(p.predicted_mj), format_number(p.actual_mj),
                 format_fixed(relative_error(p.predicted_mj, p.actual_mj), 4)},
                ",") +
           "\n";
  return out;
}

std::map<KernelType, double> breakdown_by_kernel_type(const KernelSequence& sequence,
                                                      std::span<const double> energies_mj) {
  if (energies_mj.size() != sequence.kernels.size())
    throw DomainError("breakdown needs one energy per kernel");
  double total = 0.0;
  std::map<KernelType, double> sums;
  for (std::size_t i = 0; i < energies_mj.size(); ++i) {
    if (!(energies_mj[i] >= 0.0)) throw DomainError("kernel energies must be nonnegative");
    sums[sequence.kernels[i].type] += energies_mj[i];
    total += energies_mj[i];
  }
  if (!(total > 0.0)) throw DomainError("breakdown of a zero total");
  for (auto& [type, sum] : sums) sum = 100.0 * sum / total;
  return sums;
}

double config_overlap(std::span<const KernelEnergyRecord> train,
                      std::span<const KernelSequence> eval) {
  std::set<std::string> seen;
  for (const auto& r : train) seen.insert(kernel_signature(r.kernel_type, r.config));
  std::set<std::string> wanted;
  for (const auto& seq : eval)
    for (const auto& k : seq.kernels) wanted.insert(kernel_signature(k));
  if (seen.empty() || wanted.empty()) throw DomainError("config overlap of an empty set");
  std::size_t hits = 0;
  for (const auto& s : wanted) hits += seen.count(s);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(wanted.size());
}

}  // namespace edgewatt
