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

#include "edgewatt/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "edgewatt/error.hpp"
#include "edgewatt/rng.hpp"

namespace edgewatt {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sumL^2/nL + sumR^2/nR
  std::size_t n_left = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params, std::size_t mtry, Rng& rng)
      : data_(data), params_(params), mtry_(mtry), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(rows, 0, rows.size(), 0);
    return std::move(tree_);
  }

 private:
  // Grows the subtree over rows_[lo, hi) and returns its node index.
  std::int32_t grow(std::vector<std::size_t>& rows, std::size_t lo, std::size_t hi, int depth) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double sum = 0.0;
    bool constant = true;
    const double first = data_.y[rows[lo]];
    for (std::size_t i = lo; i < hi; ++i) {
      sum += data_.y[rows[i]];
      constant = constant && data_.y[rows[i]] == first;
    }
    const std::size_t n = hi - lo;
    tree_.nodes[index].value = sum / static_cast<double>(n);
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (constant || depth >= params_.max_depth || n < 2 * min_leaf) return index;

    const Split split = best_split(rows, lo, hi, sum);
    if (split.feature < 0) return index;

    const auto f = static_cast<std::size_t>(split.feature);
    const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                    rows.begin() + static_cast<std::ptrdiff_t>(hi),
                                    [&](std::size_t r) {
                                      return data_.row(r)[f] <= split.threshold;
                                    });
    const auto cut = static_cast<std::size_t>(mid - rows.begin());
    const std::int32_t left = grow(rows, lo, cut, depth + 1);
    const std::int32_t right = grow(rows, cut, hi, depth + 1);
    TreeNode& node = tree_.nodes[index];
    node.value = 0.0;  // only leaves carry a value
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t lo, std::size_t hi,
                   double total) {
    const std::size_t p = data_.n_features;
    // Partial Fisher-Yates: the first mtry entries are the candidates.
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry_; ++i) {
      const auto j = static_cast<std::size_t>(
          rng_.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(p - 1)));
      std::swap(features[i], features[j]);
    }

    const std::size_t n = hi - lo;
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const double parent = total * total / static_cast<double>(n);
    Split best;
    best.score = parent;
    std::vector<std::pair<double, double>> column(n);
    for (std::size_t fi = 0; fi < mtry_; ++fi) {
      const std::size_t f = features[fi];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = rows[lo + i];
        column[i] = {data_.row(r)[f], data_.y[r]};
      }
      std::sort(column.begin(), column.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += column[i].second;
        const std::size_t nl = i + 1;
        if (nl < min_leaf) continue;
        if (n - nl < min_leaf) break;
        if (column[i].first == column[i + 1].first) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(n - nl);
        if (score > best.score * (1.0 + 1e-12) || (best.feature < 0 && score > best.score)) {
          double threshold = 0.5 * (column[i].first + column[i + 1].first);
          if (!(threshold < column[i + 1].first)) threshold = column[i].first;
          best = Split{static_cast<int>(f), threshold, score, nl};
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng& rng_;
  RegressionTree tree_;
};

}  // namespace

void validate(const ForestParams& p) {
  if (p.n_trees < 1) throw DomainError("n_trees must be >= 1");
  if (p.max_depth < 0) throw DomainError("max_depth must be >= 0");
  if (p.min_samples_leaf < 1) throw DomainError("min_samples_leaf must be >= 1");
  if (p.mtry < 0) throw DomainError("mtry must be >= 0");
  if (p.threads < 1) throw DomainError("threads must be >= 1");
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw CorruptionError("empty regression tree");
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

void RegressionTree::validate(std::size_t n_features) const {
  if (nodes.empty()) throw CorruptionError("empty regression tree");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& node = nodes[i];
    if (node.is_leaf()) {
      if (!std::isfinite(node.value)) throw CorruptionError("non-finite leaf value");
      continue;
    }
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features)
      throw CorruptionError("split feature out of range");
    if (!std::isfinite(node.threshold)) throw CorruptionError("non-finite threshold");
    for (std::int32_t child : {node.left, node.right}) {
      if (child <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(child) >= nodes.size())
        throw CorruptionError("child index out of range");
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (parents[i] != 1) throw CorruptionError("tree node has " + std::to_string(parents[i]) + " parents");
}

double RegressionForest::predict(std::span<const double> x) const {
  if (x.size() != n_features)
    throw DomainError("feature vector has " + std::to_string(x.size()) + " entries, forest expects " +
                      std::to_string(n_features));
  if (trees.empty()) throw CorruptionError("forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

void TrainingSet::add(std::span<const double> features, double target) {
  if (features.size() != n_features)
    throw DomainError("training row has " + std::to_string(features.size()) +
                      " features, expected " + std::to_string(n_features));
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(target);
}

RegressionForest train_forest(const TrainingSet& data, const ForestParams& params,
                              std::uint64_t seed) {
  validate(params);
  if (data.rows() == 0) throw DomainError("cannot train a forest on zero rows");
  if (data.n_features == 0) throw DomainError("cannot train a forest without features");
  if (data.x.size() != data.rows() * data.n_features)
    throw DomainError("training matrix shape mismatch");
  for (double v : data.x)
    if (!std::isfinite(v)) throw DomainError("non-finite feature value");
  for (double v : data.y)
    if (!std::isfinite(v)) throw DomainError("non-finite target value");

  const std::size_t p = data.n_features;
  const std::size_t mtry =
      params.mtry > 0 ? std::min<std::size_t>(static_cast<std::size_t>(params.mtry), p)
                      : (p + 2) / 3;
  RegressionForest forest;
  forest.n_features = p;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));

  auto train_one = [&](std::size_t t) {
    Rng rng(derive_seed(seed, "tree", t));
    const std::size_t n = data.rows();
    std::vector<std::size_t> rows(n);
    for (auto& r : rows)
      r = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    TreeBuilder builder(data, params, mtry, rng);
    forest.trees[t] = builder.build(std::move(rows));
  };

  const auto workers = static_cast<std::size_t>(
      std::min(params.threads, params.n_trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) train_one(t);
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t; (t = next.fetch_add(1)) < forest.trees.size();) {
        try {
          train_one(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return forest;
}

}  // namespace edgewatt
