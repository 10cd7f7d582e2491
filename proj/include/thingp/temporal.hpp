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

#include <vector>

#include "thingp/common.hpp"
#include "thingp/kernels.hpp"
#include "thingp/prediction.hpp"

namespace thingp {

/// Residuals y - f_hat(x) on the time axis.
struct ResidualSeries {
  Vector t;
  Vector r;

  /// Throws DataError unless lengths match and t is strictly increasing.
  void validate() const;
};

/// Zero-mean Matern-1.5 GP over t, evaluated only on the window
/// [t - T, t + T] around each prediction time.
struct TemporalModel {
  Hyperparameters hp; // one lengthscale
  std::size_t T = 1;
  /// Residuals had (numerically) no variance: g is identically zero.
  bool degenerate = false;
  std::size_t windows_used = 0;

  double signal_to_nugget() const {
    return degenerate ? 0.0 : hp.signal_var / std::max(hp.nugget, 1e-300);
  }
};

struct TemporalFitOptions {
  std::size_t max_windows = 200;
  std::size_t max_iter = 100;
};

/// Maximum likelihood on a subsample of non-overlapping windows of width
/// 2T + 1 (sum of exact window log-likelihoods, shared hyperparameters).
TemporalModel fit_g(const ResidualSeries &res, std::size_t T,
                    const TemporalFitOptions &opts = {});

struct TemporalPrediction {
  PredictionResult pred;
  /// Residual count inside each window; 0 means the prior was returned.
  std::vector<std::size_t> window_size;
};

/// Exact GP posterior of g at each t_star conditioned on residuals with
/// |t - t_star| <= T. Empty window: mean 0 and the prior sd.
TemporalPrediction predict_g(const TemporalModel &model,
                             const ResidualSeries &res, const Vector &t_star);

/// What g adds to an f prediction: empty windows contribute exactly zero mean
/// and zero variance (g is effectively absent away from the training times).
PredictionResult g_contribution(const TemporalPrediction &g);

/// mean = f + g, variance = var f + var g (covariance between the two is
/// ignored).
PredictionResult combine(const PredictionResult &f, const PredictionResult &g);

} // namespace thingp
