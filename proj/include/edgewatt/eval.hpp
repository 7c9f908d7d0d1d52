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

// Prediction-quality metrics and the leave-one-family-out protocol.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgewatt/dataset.hpp"
#include "edgewatt/fusion.hpp"

namespace edgewatt {

/// 100 * |measured - ground_truth| / ground_truth. Throws DomainError when
/// ground_truth <= 0.
double relative_error(double measured, double ground_truth);

struct Metrics {
  double rmse_mj = 0.0;
  double rmspe_pct = 0.0;
  double acc10_pct = 0.0;
  double acc15_pct = 0.0;
  std::size_t n = 0;
};

/// Pairs are (predicted, actual). Error bounds are inclusive. Throws
/// DomainError on empty input or a nonpositive actual value.
Metrics metrics(std::span<const std::pair<double, double>> pairs);

struct EvalModel {
  std::string name;
  KernelSequence sequence;
  double flops = 0.0;
  double energy_mj = 0.0;
};

struct ModelFamily {
  std::string name;
  std::vector<EvalModel> models;
};

using ModelEstimator = std::function<double(const EvalModel&)>;

struct EstimatorFactory {
  /// When false the estimator is built once, from no model data, and reused
  /// for every family. When true it is rebuilt per fold from the other
  /// families' models.
  bool needs_model_data = false;
  std::function<ModelEstimator(std::span<const EvalModel> training)> make;
};

struct FamilyRow {
  std::string family;
  Metrics metrics;
};

struct PredictionRow {
  std::string family;
  std::string model;
  double predicted_mj = 0.0;
  double actual_mj = 0.0;
};

struct EvalReport {
  std::vector<FamilyRow> families;
  /// Unweighted mean of the family rows; n is the total model count.
  FamilyRow overall{"overall", {}};
  std::vector<PredictionRow> predictions;
  /// Number of times the factory was invoked.
  std::size_t estimators_built = 0;
};

/// Families are evaluated in the given order. Throws DomainError with fewer
/// than two families or a family without models.
EvalReport leave_one_out(std::span<const ModelFamily> families, const EstimatorFactory& factory);

/// Columns family,rmse_mj,rmspe_pct,acc10_pct,acc15_pct,n_models; the last
/// row is the overall row.
std::string eval_report_to_csv(const EvalReport& report);
std::string predictions_to_csv(const EvalReport& report);

/// Share of the total energy per kernel type, in percent. Throws DomainError
/// on a size mismatch, a negative energy or a zero total.
std::map<KernelType, double> breakdown_by_kernel_type(const KernelSequence& sequence,
                                                      std::span<const double> energies_mj);

/// Percent of the distinct kernel signatures in `eval` that also occur in
/// `train`. Throws DomainError when either side is empty.
double config_overlap(std::span<const KernelEnergyRecord> train,
                      std::span<const KernelSequence> eval);

}  // namespace edgewatt
