/*
 * Copyright 2026 The thingp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */
#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "thingp/conditioning.hpp"

using namespace thingp;

namespace {

std::vector<std::size_t> sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

} // namespace

TEST_CASE("maximin order on three collinear points") {
  RowMatrix X(3, 1);
  X << 0, 5, 10;
  const std::vector<Index> all{0, 1, 2};
  const auto ord = maximin_order_from(X, Vector::Ones(1), all, 0);
  CHECK(ord.order == std::vector<Index>{0, 2, 1});
  const auto single = maximin_order(RowMatrix::Zero(1, 2), Vector::Ones(2), 7);
  CHECK(single.order == std::vector<Index>{0});
}

TEST_CASE("maximin order is a permutation with non-increasing separation") {
  std::mt19937_64 rng(21);
  const RowMatrix X = oracle::uniform(20, 2, rng);
  const auto ord = maximin_order(X, Vector::Ones(2), 99);
  auto perm = sorted(ord.order);
  std::vector<Index> expect(20);
  std::iota(expect.begin(), expect.end(), Index{0});
  CHECK(perm == expect);
  // Brute-force minimum distance of each picked point to all earlier picks.
  std::vector<double> md;
  for (std::size_t j = 1; j < 20; ++j) {
    double best = 1e300;
    for (std::size_t i = 0; i < j; ++i)
      best = std::min(best, oracle::dist(X, ord.order[j], X, ord.order[i], Vector::Ones(2)));
    md.push_back(best);
    // Greedy: no unpicked point was farther from the picked set.
    for (std::size_t c = j; c < 20; ++c) {
      double dc = 1e300;
      for (std::size_t i = 0; i < j; ++i)
        dc = std::min(dc, oracle::dist(X, ord.order[c], X, ord.order[i], Vector::Ones(2)));
      CHECK(dc <= best + 1e-12);
    }
  }
  for (std::size_t k = 1; k < md.size(); ++k)
    CHECK(md[k] <= md[k - 1] + 1e-12);
}

TEST_CASE("maximin order is deterministic for a seed") {
  std::mt19937_64 rng(5);
  const RowMatrix X = oracle::uniform(60, 3, rng);
  CHECK(maximin_order(X, Vector::Ones(3), 4).order == maximin_order(X, Vector::Ones(3), 4).order);
}

TEST_CASE("training plan size law on a tiny block") {
  RowMatrix X(3, 1);
  X << 0.1, 0.7, 0.4;
  const auto plan = build_training_plan(partition(3, 1), X, Vector::Ones(1), 30, 1);
  REQUIRE(plan.entries.size() == 3);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(plan.entries[j].neighbors.size() == j);
}

TEST_CASE("m = 1 picks the single nearest predecessor") {
  std::mt19937_64 rng(8);
  const RowMatrix X = oracle::uniform(40, 2, rng);
  const auto plan = build_training_plan(partition(40, 1), X, Vector::Ones(2), 1, 3);
  std::vector<Index> seen;
  for (const auto &e : plan.entries) {
    if (!seen.empty()) {
      REQUIRE(e.neighbors.size() == 1);
      const auto nn = oracle::brute_knn(X, seen, X.row(e.point), Vector::Ones(2), 1);
      CHECK(e.neighbors.front() == nn.front());
    }
    seen.push_back(e.point);
  }
}

TEST_CASE("training neighbors match an exhaustive predecessor scan") {
  std::mt19937_64 rng(13);
  const RowMatrix X = oracle::uniform(50, 1, rng);
  const auto plan = build_training_plan(partition(50, 1), X, Vector::Ones(1), 5, 2);
  std::vector<Index> seen;
  for (const auto &e : plan.entries) {
    const auto expect = oracle::brute_knn(X, seen, X.row(e.point), Vector::Ones(1), 5);
    CHECK(sorted(e.neighbors) == expect);
    seen.push_back(e.point);
  }
}

TEST_CASE("thinned plans stay within blocks and respect the maximin order") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 20 + rng() % 200;
    const std::size_t T = 1 + rng() % 7;
    const std::size_t m = 1 + rng() % 10;
    const RowMatrix X = oracle::uniform(n, 2, rng);
    Vector ls(2);
    ls << 0.3 + (rng() % 10) / 10.0, 1.0;
    const auto part = partition(n, T);
    const auto plan = build_training_plan(part, X, ls, m, rng());
    std::vector<std::size_t> rank(n), count(T, 0);
    for (const auto &e : plan.entries)
      rank[e.point] = count[e.block]++;
    for (const auto &e : plan.entries) {
      CHECK(part.block_of(e.point) == e.block);
      CHECK(e.neighbors.size() == std::min(rank[e.point], m));
      for (Index c : e.neighbors) {
        CHECK(part.block_of(c) == e.block);
        CHECK(rank[c] < rank[e.point]);
      }
    }
  }
}

TEST_CASE("plans are reproducible and hash equal") {
  std::mt19937_64 rng(3);
  const RowMatrix X = oracle::uniform(100, 2, rng);
  const auto a = build_training_plan(partition(100, 4), X, Vector::Ones(2), 6, 10);
  const auto b = build_training_plan(partition(100, 4), X, Vector::Ones(2), 6, 10);
  const auto c = build_training_plan(partition(100, 4), X, Vector::Ones(2), 6, 11);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  std::ostringstream out;
  dump_plan(a, out);
  CHECK(out.str().find(" : ") != std::string::npos);
}

TEST_CASE("prediction plan sizes grow with the pool") {
  std::mt19937_64 rng(17);
  const RowMatrix train = oracle::uniform(200, 2, rng);
  const RowMatrix one = oracle::uniform(1, 2, rng);
  CHECK(prediction_plan(train, one, Vector::Ones(2), 140, 1).entries.front().neighbors.size() == 140);

  const RowMatrix small = oracle::uniform(50, 2, rng);
  const RowMatrix two = oracle::uniform(2, 2, rng);
  const auto plan = prediction_plan(small, two, Vector::Ones(2), 140, 1);
  CHECK(plan.entries[0].neighbors.size() == 50);
  CHECK(plan.entries[1].neighbors.size() == 51);
}

TEST_CASE("clustered far test points condition on earlier test points") {
  std::mt19937_64 rng(19);
  const RowMatrix train = oracle::uniform(100, 2, rng);
  RowMatrix test = oracle::uniform(5, 2, rng);
  test.array() = test.array() * 0.01 + 50.0;
  const auto plan = prediction_plan(train, test, Vector::Ones(2), 10, 4);
  // Augmented-pool oracle: training rows then test rows (ids offset by n_train).
  RowMatrix pool(105, 2);
  pool.topRows(100) = train;
  pool.bottomRows(5) = test;
  std::vector<std::size_t> cand(100);
  std::iota(cand.begin(), cand.end(), std::size_t{0});
  for (std::size_t k = 0; k < 5; ++k) {
    const auto &e = plan.entries[k];
    const auto expect = oracle::brute_knn(pool, cand, test.row(e.point), Vector::Ones(2), 10);
    CHECK(sorted(e.neighbors) == expect);
    if (k > 0) {
      const bool has_test = std::any_of(e.neighbors.begin(), e.neighbors.end(),
                                        [](Index id) { return id >= 100; });
      CHECK(has_test);
    }
    cand.push_back(100 + e.point);
  }
}
