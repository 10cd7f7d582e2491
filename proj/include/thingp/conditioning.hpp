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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "thingp/common.hpp"
#include "thingp/kernels.hpp"
#include "thingp/thinning.hpp"

namespace thingp {

struct MaximinOrder {
  /// Permutation of the input indices (positions refer to rows of X or to the
  /// supplied index subset).
  std::vector<Index> order;
  std::uint64_t seed = 0;
  /// min_dist[k] = scaled distance from order[k] to order[0..k-1];
  /// +inf for k = 0.
  std::vector<double> min_dist;
};

/// Exact greedy maximin ordering under the scaled distance. The first point is
/// drawn uniformly with a generator seeded by `seed`; ties go to the smallest
/// index.
MaximinOrder maximin_order(const RowMatrix &X, const Vector &lengthscales,
                           std::uint64_t seed);
/// Same, restricted to the rows named in `subset` (returned order holds those
/// row ids).
MaximinOrder maximin_order(const RowMatrix &X, const Vector &lengthscales,
                           std::span<const Index> subset, std::uint64_t seed);
/// Deterministic variant with a caller-chosen first row (a row id of X).
MaximinOrder maximin_order_from(const RowMatrix &X, const Vector &lengthscales,
                                std::span<const Index> subset, Index first);

struct PlanEntry {
  /// Training mode: record index. Prediction mode: test index.
  Index point = 0;
  std::size_t block = 0;
  /// Training mode: record indices. Prediction mode: pool ids, where ids below
  /// ConditioningPlan::n_train are training records and id - n_train is an
  /// already-predicted test point.
  std::vector<Index> neighbors;
};

struct ConditioningPlan {
  enum class Mode { Training, Prediction };
  Mode mode = Mode::Training;
  std::size_t n_train = 0;
  /// Training mode: entries grouped by block, each block in maximin order.
  /// Prediction mode: test points in prediction (maximin) order.
  std::vector<PlanEntry> entries;

  std::uint64_t hash() const;
};

/// For the j-th point of each block's order, its min(j-1, m) nearest
/// predecessors within the same block.
ConditioningPlan training_plan(const BlockPartition &part,
                               const std::vector<MaximinOrder> &orders,
                               const RowMatrix &X, const Vector &lengthscales,
                               std::size_t m);

/// Convenience: maximin-order every block (seeds derived from `seed` and the
/// block number) and build the training plan.
ConditioningPlan build_training_plan(const BlockPartition &part,
                                     const RowMatrix &X,
                                     const Vector &lengthscales, std::size_t m,
                                     std::uint64_t seed);

/// Sequential prediction plan on the unthinned training set: test points are
/// visited in maximin order and each conditions on its m_p nearest members of
/// the pool (training points plus earlier test points).
ConditioningPlan prediction_plan(const RowMatrix &train_X,
                                 const RowMatrix &test_X,
                                 const Vector &lengthscales, std::size_t m_p,
                                 std::uint64_t seed);

/// One line per entry: `point block : neighbor ...`.
void dump_plan(const ConditioningPlan &plan, std::ostream &out);

/// The k nearest candidates (row ids of `scaled`) to the scaled query, sorted
/// by distance then by id.
std::vector<Index> k_nearest(const RowMatrix &scaled,
                             std::span<const Index> candidates,
                             const double *query, std::size_t k);

} // namespace thingp
