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
#include "thingp/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>

namespace thingp {

namespace {

inline double sqdist(const double *a, const double *b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

/// Bounded max-heap keeping the k smallest (distance, id) pairs.
class TopK {
public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void offer(double d2, Index id) {
    if (k_ == 0)
      return;
    const std::pair<double, Index> item{d2, id};
    if (heap_.size() < k_) {
      heap_.push_back(item);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (item < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = item;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  std::vector<Index> sorted_ids() {
    std::sort(heap_.begin(), heap_.end());
    std::vector<Index> ids;
    ids.reserve(heap_.size());
    for (const auto &p : heap_)
      ids.push_back(p.second);
    return ids;
  }

private:
  std::size_t k_;
  std::vector<std::pair<double, Index>> heap_;
};

MaximinOrder maximin_impl(const RowMatrix &Xs, std::vector<Index> ids,
                          std::size_t first_pos, std::uint64_t seed) {
  MaximinOrder out;
  out.seed = seed;
  const std::size_t k = ids.size();
  if (k == 0)
    return out;
  // Local contiguous copy in the caller's id order.
  const Eigen::Index d = Xs.cols();
  RowMatrix local(static_cast<Eigen::Index>(k), d);
  for (std::size_t i = 0; i < k; ++i)
    local.row(static_cast<Eigen::Index>(i)) = Xs.row(static_cast<Eigen::Index>(ids[i]));

  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  std::vector<char> taken(k, 0);
  out.order.reserve(k);
  out.min_dist.reserve(k);

  std::size_t current = first_pos;
  out.order.push_back(ids[current]);
  out.min_dist.push_back(std::numeric_limits<double>::infinity());
  taken[current] = 1;
  for (std::size_t step = 1; step < k; ++step) {
    const double *c = local.row(static_cast<Eigen::Index>(current)).data();
    std::size_t arg = k;
    double arg_val = -1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (taken[i])
        continue;
      const double d2 = sqdist(local.row(static_cast<Eigen::Index>(i)).data(), c, d);
      if (d2 < best[i])
        best[i] = d2;
      // Strict comparison keeps the smallest id among equal distances because
      // ids are scanned in increasing order.
      if (best[i] > arg_val || (best[i] == arg_val && ids[i] < ids[arg])) {
        arg_val = best[i];
        arg = i;
      }
    }
    current = arg;
    taken[current] = 1;
    out.order.push_back(ids[current]);
    out.min_dist.push_back(std::sqrt(arg_val));
  }
  return out;
}

std::vector<Index> sorted_subset(std::span<const Index> subset) {
  std::vector<Index> ids(subset.begin(), subset.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

} // namespace

MaximinOrder maximin_order(const RowMatrix &X, const Vector &lengthscales,
                           std::span<const Index> subset, std::uint64_t seed) {
  auto ids = sorted_subset(subset);
  if (ids.empty())
    return MaximinOrder{{}, seed, {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  const std::size_t first = pick(rng);
  return maximin_impl(scale_inputs(X, lengthscales), std::move(ids), first, seed);
}

MaximinOrder maximin_order(const RowMatrix &X, const Vector &lengthscales,
                           std::uint64_t seed) {
  std::vector<Index> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return maximin_order(X, lengthscales, all, seed);
}

MaximinOrder maximin_order_from(const RowMatrix &X, const Vector &lengthscales,
                                std::span<const Index> subset, Index first) {
  auto ids = sorted_subset(subset);
  auto it = std::find(ids.begin(), ids.end(), first);
  if (it == ids.end())
    throw ConfigError("maximin_order_from: first row is not in the subset");
  return maximin_impl(scale_inputs(X, lengthscales), ids,
                      static_cast<std::size_t>(it - ids.begin()), 0);
}

std::vector<Index> k_nearest(const RowMatrix &scaled,
                             std::span<const Index> candidates,
                             const double *query, std::size_t k) {
  TopK top(k);
  const Eigen::Index d = scaled.cols();
  for (Index id : candidates)
    top.offer(sqdist(scaled.row(static_cast<Eigen::Index>(id)).data(), query, d), id);
  return top.sorted_ids();
}

ConditioningPlan training_plan(const BlockPartition &part,
                               const std::vector<MaximinOrder> &orders,
                               const RowMatrix &X, const Vector &lengthscales,
                               std::size_t m) {
  if (m < 1)
    throw ConfigError("conditioning set size m must be >= 1");
  if (orders.size() != part.blocks.size())
    throw ConfigError("training_plan: one maximin order per block required");
  const RowMatrix Xs = scale_inputs(X, lengthscales);
  const Eigen::Index d = Xs.cols();

  ConditioningPlan plan;
  plan.mode = ConditioningPlan::Mode::Training;
  plan.n_train = static_cast<std::size_t>(X.rows());
  plan.entries.resize(part.n());

  std::size_t offset = 0;
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    const auto &ord = orders[b].order;
    if (ord.size() != part.blocks[b].size())
      throw ConfigError("training_plan: order size differs from block size");
    const auto k = static_cast<Eigen::Index>(ord.size());
    RowMatrix local(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
      local.row(i) = Xs.row(static_cast<Eigen::Index>(ord[static_cast<std::size_t>(i)]));

#pragma omp parallel for schedule(dynamic, 64)
    for (Eigen::Index j = 0; j < k; ++j) {
      TopK top(std::min<std::size_t>(m, static_cast<std::size_t>(j)));
      const double *q = local.row(j).data();
      for (Eigen::Index i = 0; i < j; ++i)
        top.offer(sqdist(local.row(i).data(), q, d), ord[static_cast<std::size_t>(i)]);
      PlanEntry &e = plan.entries[offset + static_cast<std::size_t>(j)];
      e.point = ord[static_cast<std::size_t>(j)];
      e.block = b;
      e.neighbors = top.sorted_ids();
    }
    offset += ord.size();
  }
  return plan;
}

ConditioningPlan build_training_plan(const BlockPartition &part,
                                     const RowMatrix &X,
                                     const Vector &lengthscales, std::size_t m,
                                     std::uint64_t seed) {
  std::vector<MaximinOrder> orders(part.blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < part.blocks.size(); ++b)
    orders[b] = maximin_order(X, lengthscales, part.blocks[b],
                              derive_seed(seed, "maximin", b));
  return training_plan(part, orders, X, lengthscales, m);
}

ConditioningPlan prediction_plan(const RowMatrix &train_X,
                                 const RowMatrix &test_X,
                                 const Vector &lengthscales, std::size_t m_p,
                                 std::uint64_t seed) {
  if (train_X.rows() < 1)
    throw DataError("prediction needs at least one training point");
  if (m_p < 1)
    throw ConfigError("prediction conditioning size m_p must be >= 1");
  if (test_X.cols() != train_X.cols())
    throw DataError("test inputs have " + std::to_string(test_X.cols()) +
                    " columns, training inputs " + std::to_string(train_X.cols()));
  const auto n_train = static_cast<std::size_t>(train_X.rows());
  const auto n_test = static_cast<std::size_t>(test_X.rows());

  ConditioningPlan plan;
  plan.mode = ConditioningPlan::Mode::Prediction;
  plan.n_train = n_train;
  if (n_test == 0)
    return plan;

  const RowMatrix train_s = scale_inputs(train_X, lengthscales);
  const RowMatrix test_s = scale_inputs(test_X, lengthscales);
  const Eigen::Index d = train_s.cols();
  const MaximinOrder test_order =
      maximin_order(test_X, lengthscales, derive_seed(seed, "maximin-test"));

  plan.entries.resize(n_test);
  // Neighbor sets only depend on positions, so they can be built in parallel
  // even though prediction itself runs sequentially.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < n_test; ++k) {
    const Index test_id = test_order.order[k];
    const double *q = test_s.row(static_cast<Eigen::Index>(test_id)).data();
    TopK top(std::min(m_p, n_train + k));
    for (std::size_t i = 0; i < n_train; ++i)
      top.offer(sqdist(train_s.row(static_cast<Eigen::Index>(i)).data(), q, d), i);
    for (std::size_t p = 0; p < k; ++p) {
      const Index other = test_order.order[p];
      top.offer(sqdist(test_s.row(static_cast<Eigen::Index>(other)).data(), q, d),
                n_train + other);
    }
    PlanEntry &e = plan.entries[k];
    e.point = test_id;
    e.block = 0;
    e.neighbors = top.sorted_ids();
  }
  return plan;
}

std::uint64_t ConditioningPlan::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(mode));
  mix(n_train);
  for (const auto &e : entries) {
    mix(e.point);
    mix(e.block);
    mix(e.neighbors.size());
    for (auto c : e.neighbors)
      mix(c);
  }
  return h;
}

void dump_plan(const ConditioningPlan &plan, std::ostream &out) {
  out << "# mode=" << (plan.mode == ConditioningPlan::Mode::Training ? "training" : "prediction")
      << " n_train=" << plan.n_train << '\n';
  for (const auto &e : plan.entries) {
    out << e.point << ' ' << e.block << " :";
    for (auto c : e.neighbors)
      out << ' ' << c;
    out << '\n';
  }
}

} // namespace thingp
