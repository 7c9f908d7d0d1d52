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

// Random forest regression: bagged CART trees with per-split feature
// subsampling and squared-error splits.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edgewatt {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 16;
  int min_samples_leaf = 2;
  /// Features tried per split; 0 means ceil(p / 3).
  int mtry = 0;
  /// Worker threads for training. Never affects the result.
  int threads = 1;
};

void validate(const ForestParams& params);

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;
  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf mean

  bool is_leaf() const { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes stored flat; node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  /// Structural checks: child indices in range, finite leaves, acyclic.
  void validate(std::size_t n_features) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct RegressionForest {
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;

  /// Mean of tree predictions, summed in tree order.
  double predict(std::span<const double> x) const;
  friend bool operator==(const RegressionForest&, const RegressionForest&) = default;
};

/// Row-major training matrix.
struct TrainingSet {
  std::size_t n_features = 0;
  std::vector<double> x;  // rows * n_features
  std::vector<double> y;

  std::size_t rows() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * n_features, n_features};
  }
  void add(std::span<const double> features, double target);
};

/// Tree t draws from derive_seed(seed, "tree", t), so results do not depend
/// on params.threads. Throws DomainError on empty input or bad values.
RegressionForest train_forest(const TrainingSet& data, const ForestParams& params,
                              std::uint64_t seed);

}  // namespace edgewatt
