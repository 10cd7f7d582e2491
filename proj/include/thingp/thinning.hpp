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

#include <optional>
#include <string>
#include <vector>

#include "thingp/common.hpp"
#include "thingp/dataset.hpp"

namespace thingp {

/// Partial autocorrelations at lags 1..h_max via Durbin-Levinson on the
/// biased sample autocovariances. Throws DataError for a constant series.
std::vector<double> pacf(const Vector &series, std::size_t h_max);

/// Per-series PACF, one row per monitored series (covariates, then y).
struct PacfTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values; // values[s][h-1] = PACF_s(h)
};

PacfTable pacf_table(const Dataset &ds, bool include_y, std::size_t h_max);

struct ThinningChoice {
  std::size_t T = 1;
  double threshold = 0.0;
  /// Series that still exceeded the threshold at lag T-1 with the largest
  /// |PACF|; empty when T = 1.
  std::string binding_series;
  std::size_t binding_lag = 0;
  /// No lag up to h_max satisfied the criterion; T was set to h_max.
  bool saturated = false;
};

struct ThinningOptions {
  bool include_y = true;
  std::size_t h_max = 100;
  /// Defaults to 2/sqrt(n), the white-noise 95% band.
  std::optional<double> threshold;
};

/// Smallest lag h at which every monitored series has |PACF(h)| within the
/// threshold.
ThinningChoice select_thinning_number(const Dataset &ds,
                                      const ThinningOptions &opts = {});
ThinningChoice select_thinning_number(const PacfTable &table, std::size_t n,
                                      std::optional<double> threshold = {});

/// Round-robin thinning of a time-sorted index sequence 0..n-1.
struct BlockPartition {
  std::size_t T = 1;
  std::vector<std::vector<Index>> blocks;

  std::size_t n() const;
  std::size_t smallest_block() const;
  /// Block holding record i (i mod T).
  std::size_t block_of(Index i) const { return i % T; }
};

BlockPartition partition(std::size_t n, std::size_t T);

/// Largest T with floor(n / T) >= m + 1.
std::size_t max_thinning_for(std::size_t n, std::size_t m);

/// Spacing diagnostics for the time axis (irregular sampling makes the global
/// PACF lean towards dense stretches).
struct TimeDensity {
  double min_gap = 0.0;
  double median_gap = 0.0;
  double max_gap = 0.0;
};
TimeDensity time_density(const Vector &t);

} // namespace thingp
