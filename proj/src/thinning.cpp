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
#include "thingp/thinning.hpp"

#include <algorithm>
#include <cmath>

namespace thingp {

std::vector<double> pacf(const Vector &series, std::size_t h_max) {
  const std::size_t n = static_cast<std::size_t>(series.size());
  if (h_max < 1)
    throw ConfigError("pacf needs h_max >= 1");
  if (n <= h_max + 1)
    throw DataError("pacf needs more than h_max + 1 observations (have " +
                    std::to_string(n) + ", h_max = " + std::to_string(h_max) +
                    ")");
  const double mean = series.mean();
  const Vector c = series.array() - mean;

  std::vector<double> acov(h_max + 1, 0.0);
  for (std::size_t h = 0; h <= h_max; ++h) {
    double s = 0.0;
    for (std::size_t i = h; i < n; ++i)
      s += c[static_cast<Eigen::Index>(i)] * c[static_cast<Eigen::Index>(i - h)];
    acov[h] = s / static_cast<double>(n);
  }
  if (!(acov[0] > 0.0))
    throw DataError("pacf is undefined for a constant series");

  // Durbin-Levinson: phi[k] are the order-h AR coefficients.
  std::vector<double> out(h_max, 0.0);
  std::vector<double> phi(h_max + 1, 0.0), prev(h_max + 1, 0.0);
  double v = acov[0];
  for (std::size_t h = 1; h <= h_max; ++h) {
    double num = acov[h];
    for (std::size_t k = 1; k < h; ++k)
      num -= prev[k] * acov[h - k];
    const double a = v > 0.0 ? num / v : 0.0;
    phi[h] = a;
    for (std::size_t k = 1; k < h; ++k)
      phi[k] = prev[k] - a * prev[h - k];
    v *= (1.0 - a * a);
    out[h - 1] = std::clamp(a, -1.0, 1.0);
    std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(h) + 1,
              prev.begin());
  }
  return out;
}

PacfTable pacf_table(const Dataset &ds, bool include_y, std::size_t h_max) {
  PacfTable table;
  for (std::size_t j = 0; j < ds.d(); ++j) {
    table.names.push_back(ds.covariate_names.size() > j
                              ? ds.covariate_names[j]
                              : "x" + std::to_string(j + 1));
    table.values.push_back(pacf(ds.x.col(static_cast<Eigen::Index>(j)), h_max));
  }
  if (include_y) {
    table.names.push_back(ds.response_name);
    table.values.push_back(pacf(ds.y, h_max));
  }
  return table;
}

ThinningChoice select_thinning_number(const PacfTable &table, std::size_t n,
                                      std::optional<double> threshold) {
  ThinningChoice choice;
  choice.threshold =
      threshold.value_or(2.0 / std::sqrt(static_cast<double>(n)));
  if (table.values.empty())
    throw ConfigError("no series to monitor for the thinning number");
  const std::size_t h_max = table.values.front().size();

  auto worst_at = [&](std::size_t h) {
    std::size_t arg = 0;
    double worst = -1.0;
    for (std::size_t s = 0; s < table.values.size(); ++s) {
      const double a = std::abs(table.values[s][h - 1]);
      if (a > worst) {
        worst = a;
        arg = s;
      }
    }
    return std::pair{arg, worst};
  };

  for (std::size_t h = 1; h <= h_max; ++h) {
    if (worst_at(h).second <= choice.threshold) {
      choice.T = h;
      if (h > 1) {
        choice.binding_series = table.names[worst_at(h - 1).first];
        choice.binding_lag = h - 1;
      }
      return choice;
    }
  }
  choice.T = h_max;
  choice.saturated = true;
  choice.binding_series = table.names[worst_at(h_max).first];
  choice.binding_lag = h_max;
  log::warn("no lag up to h_max = " + std::to_string(h_max) +
            " brings every PACF within the threshold; using T = h_max");
  return choice;
}

ThinningChoice select_thinning_number(const Dataset &ds,
                                      const ThinningOptions &opts) {
  if (ds.n() <= opts.h_max + 1)
    throw DataError("thinning selection needs n > h_max + 1");
  return select_thinning_number(pacf_table(ds, opts.include_y, opts.h_max),
                                ds.n(), opts.threshold);
}

std::size_t BlockPartition::n() const {
  std::size_t total = 0;
  for (const auto &b : blocks)
    total += b.size();
  return total;
}

std::size_t BlockPartition::smallest_block() const {
  std::size_t best = blocks.empty() ? 0 : blocks.front().size();
  for (const auto &b : blocks)
    best = std::min(best, b.size());
  return best;
}

BlockPartition partition(std::size_t n, std::size_t T) {
  if (T < 1 || T > n)
    throw ConfigError("invalid thinning number T = " + std::to_string(T) +
                      " for n = " + std::to_string(n));
  BlockPartition p;
  p.T = T;
  p.blocks.resize(T);
  for (auto &b : p.blocks)
    b.reserve(n / T + 1);
  for (Index i = 0; i < n; ++i)
    p.blocks[i % T].push_back(i);
  return p;
}

std::size_t max_thinning_for(std::size_t n, std::size_t m) {
  if (n <= m)
    throw ConfigError("no valid thinning number: n = " + std::to_string(n) +
                      " must exceed m = " + std::to_string(m));
  return n / (m + 1);
}

TimeDensity time_density(const Vector &t) {
  TimeDensity td;
  if (t.size() < 2)
    return td;
  std::vector<double> gaps;
  for (Eigen::Index i = 1; i < t.size(); ++i)
    gaps.push_back(t[i] - t[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  td.min_gap = gaps.front();
  td.max_gap = gaps.back();
  const std::size_t mid = gaps.size() / 2;
  td.median_gap = gaps.size() % 2 == 1 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
  return td;
}

} // namespace thingp
