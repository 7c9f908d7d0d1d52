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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "edgewatt/error.hpp"
#include "edgewatt/forest.hpp"
#include "edgewatt/rng.hpp"

using namespace edgewatt;

namespace {

TrainingSet linear_set(std::size_t n, std::uint64_t seed) {
  TrainingSet set;
  set.n_features = 2;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 100.0);
    const double noise = rng.uniform(0.0, 1.0);  // irrelevant feature
    const double row[2] = {x, noise};
    set.add(row, 3.0 * x);
  }
  return set;
}

}  // namespace

TEST_CASE("constant target gives a constant forest") {
  TrainingSet set;
  set.n_features = 3;
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double row[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    set.add(row, 7.0);
  }
  const RegressionForest f = train_forest(set, {}, 42);
  for (const auto& t : f.trees) CHECK(t.nodes.size() == 1);
  for (int i = 0; i < 20; ++i) {
    const double q[3] = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CHECK(f.predict(q) == 7.0);
  }
}

TEST_CASE("forest fits a line inside the training range") {
  ForestParams params;
  params.max_depth = 12;
  const RegressionForest f = train_forest(linear_set(500, 7), params, 42);
  for (double x = 10.0; x <= 90.0; x += 0.5) {
    const double q[2] = {x, 0.5};
    CHECK(std::abs(f.predict(q) - 3.0 * x) <= 0.1 * 3.0 * x);
  }
  for (const auto& t : f.trees) {
    CHECK(t.depth() <= 12);
    CHECK_NOTHROW(t.validate(2));
  }
}

TEST_CASE("forest prediction is the mean of its trees") {
  const RegressionForest f = train_forest(linear_set(200, 3), {}, 9);
  CHECK(f.trees.size() == 100);
  const double q[2] = {42.0, 0.3};
  double sum = 0.0;
  for (const auto& t : f.trees) sum += t.predict(q);
  CHECK(f.predict(q) == sum / 100.0);
}

TEST_CASE("training is deterministic in the seed and independent of threads") {
  const TrainingSet set = linear_set(300, 11);
  ForestParams serial;
  ForestParams parallel;
  parallel.threads = 4;
  const RegressionForest a = train_forest(set, serial, 5);
  CHECK(a == train_forest(set, serial, 5));
  CHECK(a == train_forest(set, parallel, 5));
  CHECK_FALSE(a == train_forest(set, serial, 6));
}

TEST_CASE("invalid training input") {
  TrainingSet empty;
  empty.n_features = 2;
  CHECK_THROWS_AS(train_forest(empty, {}, 1), DomainError);
  ForestParams bad;
  bad.n_trees = 0;
  CHECK_THROWS_AS(train_forest(linear_set(10, 1), bad, 1), DomainError);
  TrainingSet nan = linear_set(10, 1);
  nan.y[3] = std::nan("");
  CHECK_THROWS_AS(train_forest(nan, {}, 1), DomainError);
  const RegressionForest f = train_forest(linear_set(10, 1), {}, 1);
  const double wrong[3] = {1, 2, 3};
  CHECK_THROWS_AS(f.predict(wrong), DomainError);
}

TEST_CASE("tree validation catches broken structure") {
  RegressionTree t;
  t.nodes = {TreeNode{0, 1.0, 1, 2, 0.0}, TreeNode{}, TreeNode{}};
  CHECK_NOTHROW(t.validate(1));
  CHECK_THROWS_AS(t.validate(0), CorruptionError);
  t.nodes[0].right = 1;
  CHECK_THROWS_AS(t.validate(1), CorruptionError);
  t.nodes[0].right = 0;
  CHECK_THROWS_AS(t.validate(1), CorruptionError);
}
