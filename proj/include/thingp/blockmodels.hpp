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
#include <optional>
#include <vector>

#include "thingp/common.hpp"
#include "thingp/dataset.hpp"
#include "thingp/kernels.hpp"
#include "thingp/kvfile.hpp"
#include "thingp/prediction.hpp"
#include "thingp/thinning.hpp"

namespace thingp {

/// Equal-weight model average over T per-block predictions.
struct EnsemblePrediction {
  /// block_mean[z][i], block_sd[z][i]
  std::vector<Vector> block_mean;
  std::vector<Vector> block_sd;
  Vector mean;
  Vector sd;
};

/// mean = average of block means; variance = average of block variances plus
/// the average squared deviation of block means from that mean.
EnsemblePrediction ensemble_predict(std::vector<Vector> block_mean,
                                    std::vector<Vector> block_sd);

// --------------------------------------------------------------- twin model

/// Support size, local neighborhood size and validation count.
struct TwinSizes {
  std::size_t n_g = 0;
  std::size_t k_loc = 0;
  std::size_t n_val = 0;
};

/// Automatic sizes for n records in d dimensions:
/// n_g = min(50 d, max(ceil(sqrt n), 10 d)), k_loc = max(25, 3 d),
/// n_val = 2 n_g.
TwinSizes default_twin_sizes(std::size_t n, std::size_t d);

struct TwinConfig {
  /// Explicit overrides; unset fields come from default_twin_sizes().
  std::optional<std::size_t> n_g;
  std::optional<std::size_t> k_loc;
  std::optional<std::size_t> n_val;
  /// Compute automatic sizes once from the full training set rather than
  /// from each block.
  bool sizes_from_full = true;
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t radius_probe = 200;
  std::size_t max_iter = 100;
  std::uint64_t seed = 1;
  bool standardize = true;
};

/// k_total = (1 - lambda) k_global + lambda k_local, both on inputs scaled by
/// the global lengthscales; k_local is compactly supported with `radius`.
struct TwinBlend {
  Hyperparameters global;  ///< squared-exponential; nugget is the noise
  double lambda = 0.0;
  double radius = 1.0;

  double kernel(double r) const;
};

/// One fitted block. Data are in working (standardized) units.
class TwinBlockModel {
public:
  TwinBlockModel() = default;
  TwinBlockModel(RowMatrix x, Vector y, std::vector<Index> support,
                 TwinBlend blend, std::size_t k_loc);

  /// Posterior mean and sd (with nugget) at rows of xs, conditioning on the
  /// support set plus the k_loc nearest non-support points.
  PredictionResult predict(const RowMatrix &xs) const;

  const TwinBlend &blend() const { return blend_; }
  const std::vector<Index> &support() const { return support_; }
  std::size_t k_loc() const { return k_loc_; }
  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }

private:
  RowMatrix x_;
  Vector y_;
  RowMatrix scaled_;
  std::vector<Index> support_;
  std::vector<Index> others_;
  TwinBlend blend_;
  std::size_t k_loc_ = 0;
  Matrix L_;            ///< Cholesky factor of the support covariance
  Vector a_;            ///< L^-1 y_S
  Matrix W_;            ///< L^-1 K(S, others), one column per other point
};

struct TwinBlockFit {
  TwinBlockModel model;
  TwinSizes sizes;
  /// Validation mean squared error for each lambda_grid value.
  std::vector<double> lambda_mse;
};

/// Fits one block (working units). Requires block size > n_g + k_loc unless
/// n_g covers the whole block, in which case the model is a plain global GP.
TwinBlockFit twin_fit(const RowMatrix &x, const Vector &y, const TwinSizes &sizes,
                      const TwinConfig &cfg, std::uint64_t seed);

struct TwinEnsemble {
  std::size_t T = 1;
  Standardization standardization;
  TwinSizes sizes;
  std::vector<TwinBlockModel> blocks;
  std::vector<std::vector<double>> lambda_mse;
};

/// One twin model per block, trained independently.
TwinEnsemble fit_twin(const Dataset &train, const BlockPartition &part,
                      const TwinConfig &cfg);

/// Ensemble prediction in original units.
EnsemblePrediction predict_twin(const TwinEnsemble &model, const RowMatrix &test_x);

/// Persists what is needed to rebuild the ensemble from the training data.
KeyValueFile to_kv(const TwinEnsemble &model, const TwinConfig &cfg);
/// Rebuilds per-block models from the saved hyperparameters and the same
/// training data and partition.
TwinEnsemble twin_model_from_kv(const KeyValueFile &kv, const Dataset &train);

// ----------------------------------------------------------------- local GP

struct LagpConfig {
  std::size_t n_start = 6;
  std::size_t n_end = 30;
  /// Nearest points in the chosen block considered by the greedy search.
  std::size_t candidates = 200;
  /// Nugget as a fraction of the signal variance during the greedy search.
  double nugget_fraction = 0.01;
  std::size_t max_iter = 50;
  bool standardize = true;
};

/// Result of the greedy design for one test location (working units).
struct LagpDesign {
  std::size_t block = 0;
  std::vector<Index> selected;  ///< in selection order
  /// Predictive variance at x_star after each selection from n_start on.
  std::vector<double> variance_trace;
};

/// Greedy design around x_star inside one candidate pool using a fixed
/// squared-exponential kernel. Starts from the n_start nearest pool members
/// and adds the point that most reduces the predictive variance.
LagpDesign lagp_greedy(const RowMatrix &x, const std::vector<Index> &pool,
                       const double *x_star, const Hyperparameters &hp,
                       std::size_t n_start, std::size_t n_end);

/// For every test row: choose the block holding the nearest training point,
/// design a local set inside it, refit a lengthscale multiplier, signal
/// variance and nugget, and return the local posterior (original units).
/// T = 1 gives the unthinned baseline.
PredictionResult predict_lagp(const Dataset &train, const BlockPartition &part,
                              const RowMatrix &test_x, const LagpConfig &cfg,
                              std::vector<LagpDesign> *designs = nullptr);

} // namespace thingp
