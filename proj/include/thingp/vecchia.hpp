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
#include <string>
#include <vector>

#include "thingp/common.hpp"
#include "thingp/conditioning.hpp"
#include "thingp/dataset.hpp"
#include "thingp/kernels.hpp"
#include "thingp/kvfile.hpp"
#include "thingp/prediction.hpp"
#include "thingp/thinning.hpp"

namespace thingp {

/// Sum over plan entries of log N(y_j | conditional mean, conditional
/// variance) given y on the entry's conditioning set. X and y must already be
/// in the model's working scale.
double vecchia_loglik(const RowMatrix &X, const Vector &y,
                      const ConditioningPlan &plan, const KernelSpec &spec,
                      const Hyperparameters &hp);

/// Value plus analytic gradient in (log l_1..l_d, log signal_var, log nugget).
double vecchia_loglik_grad(const RowMatrix &X, const Vector &y,
                           const ConditioningPlan &plan, const KernelSpec &spec,
                           const Hyperparameters &hp, Vector &grad);

struct VecchiaConfig {
  std::size_t m = 30;
  std::size_t m_p = 140;
  /// Conditioning plans rebuilt with updated lengthscales this many times
  /// before the final fixed-plan optimization.
  std::size_t plan_rebuilds = 2;
  std::size_t iters_per_rebuild = 20;
  std::size_t max_iter = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 1;
  bool include_time = false;
  bool standardize = true;
  KernelSpec kernel = KernelSpec::matern15();
};

struct VecchiaModel {
  KernelSpec kernel;
  Hyperparameters hp;
  std::size_t T = 1;
  std::size_t m = 30;
  std::size_t m_p = 140;
  std::uint64_t seed = 1;
  bool include_time = false;
  Standardization standardization;
  /// Mean and scale applied to t when it is used as an input.
  double t_mean = 0.0;
  double t_scale = 1.0;
  double loglik = 0.0;

  /// Working-scale design matrix for rows of a dataset in original units.
  RowMatrix design(const RowMatrix &x, const Vector &t) const;
};

struct FitReport {
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// One entry per accepted iterate, across all rounds.
  std::vector<double> loglik_trace;
  std::vector<Hyperparameters> hp_trace;
  /// Round (0 = first plan) each trace entry belongs to.
  std::vector<std::size_t> round_trace;
};

/// Fits hyperparameters by maximizing the block pseudo-likelihood: the sum of
/// per-block Vecchia log-likelihoods sharing one hyperparameter vector.
/// Requires floor(n / T) >= m + 1.
std::pair<VecchiaModel, FitReport> fit_vecchia(const Dataset &train,
                                               const BlockPartition &part,
                                               const VecchiaConfig &cfg);

/// Training plan the fit ended on (for diagnostics and tests).
ConditioningPlan final_training_plan(const VecchiaModel &model,
                                     const Dataset &train);

/// Sequential prediction on the unthinned training data. Earlier test points
/// join later conditioning sets with their predicted means. Returned means and
/// standard deviations are in original units; the variance includes the
/// nugget.
PredictionResult predict_vecchia(const VecchiaModel &model, const Dataset &train,
                                 const RowMatrix &test_x, const Vector &test_t,
                                 std::size_t m_p, std::uint64_t seed);

/// Conditional mean of f at every training input given its k nearest other
/// training points (the point itself excluded). Original units.
Vector fitted_training_values(const VecchiaModel &model, const Dataset &train,
                              std::size_t k);

KeyValueFile to_kv(const VecchiaModel &model);
VecchiaModel vecchia_model_from_kv(const KeyValueFile &kv);

} // namespace thingp
