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

#include "thingp/common.hpp"
#include "thingp/kernels.hpp"
#include "thingp/optimize.hpp"

namespace thingp {

/// Dense zero-mean GP utilities: exact log-likelihood, its gradient in log
/// hyperparameters, posterior prediction, and maximum-likelihood fitting.
namespace exact {

double loglik(const KernelSpec &spec, const Hyperparameters &hp,
              const RowMatrix &X, const Vector &y);

/// Log-likelihood and gradient with respect to (log l_1..log l_d,
/// log signal_var, log nugget).
double loglik_grad(const KernelSpec &spec, const Hyperparameters &hp,
                   const RowMatrix &X, const Vector &y, Vector &grad);

struct Posterior {
  Vector mean;
  Vector var;
};

/// Posterior of the latent function (include_nugget = false) or of a new
/// observation (include_nugget = true) at the rows of Xstar.
Posterior predict(const KernelSpec &spec, const Hyperparameters &hp,
                  const RowMatrix &X, const Vector &y, const RowMatrix &Xstar,
                  bool include_nugget);

struct FitOptions {
  /// Fit one common multiplier on the initial lengthscale vector instead of
  /// one lengthscale per dimension.
  bool shared_lengthscale = false;
  std::size_t max_iter = 100;
  double min_log_lengthscale = std::log(1e-3);
  double max_log_lengthscale = std::log(1e3);
  double min_log_nugget = std::log(1e-8);
  double max_log_nugget = std::log(1e2);
  double min_log_signal = std::log(1e-6);
  double max_log_signal = std::log(1e4);
};

struct FitResult {
  Hyperparameters hp;
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

FitResult fit(const KernelSpec &spec, const RowMatrix &X, const Vector &y,
              const Hyperparameters &init, const FitOptions &opts = {});

/// Sum of exact log-likelihoods over independent groups sharing one
/// hyperparameter vector (with gradient).
double grouped_loglik_grad(const KernelSpec &spec, const Hyperparameters &hp,
                           const std::vector<RowMatrix> &Xs,
                           const std::vector<Vector> &ys, Vector &grad);

} // namespace exact
} // namespace thingp
