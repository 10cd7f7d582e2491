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

#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "thingp/common.hpp"

namespace thingp {

enum class KernelFamily { Matern15, SquaredExponential, CompactRbf };

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern15;
  /// Support radius in scaled-distance units; only meaningful for CompactRbf.
  double radius = 1.0;

  static KernelSpec matern15() { return {KernelFamily::Matern15, 1.0}; }
  static KernelSpec squared_exponential() {
    return {KernelFamily::SquaredExponential, 1.0};
  }
  static KernelSpec compact_rbf(double radius);
};

std::string to_string(KernelFamily family);
/// Accepts matern15 | sqexp | compact-rbf.
KernelFamily kernel_family_from_string(const std::string &name);

struct Hyperparameters {
  Vector lengthscales;
  double signal_var = 1.0;
  double nugget = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(lengthscales.size()); }
  /// Throws ConfigError when an invariant fails.
  void validate() const;

  /// Packing order used by every optimizer: log lengthscales, log signal
  /// variance, log nugget.
  Vector to_log() const;
  static Hyperparameters from_log(const Vector &theta, std::size_t d);
};

double scaled_distance(const Eigen::Ref<const Vector> &xi,
                       const Eigen::Ref<const Vector> &xj,
                       const Hyperparameters &hp);

/// Rows divided componentwise by the lengthscales.
RowMatrix scale_inputs(const RowMatrix &x, const Vector &lengthscales);

/// Kernel value at scaled distance r.
double kernel_eval(const KernelSpec &spec, double r, double signal_var);

/// -k'(r)/r, finite at r = 0 for all three families. The derivative of the
/// kernel with respect to log lengthscale j is this factor times
/// (dx_j / l_j)^2.
double kernel_radial_factor(const KernelSpec &spec, double r, double signal_var);

/// kernel_eval() and kernel_radial_factor() sharing one exponential.
double kernel_eval_with_factor(const KernelSpec &spec, double r, double signal_var,
                               double &factor);

/// Gram matrix over the rows of X (unscaled inputs).
Matrix cov_matrix(const KernelSpec &spec, const Hyperparameters &hp,
                  const RowMatrix &X, bool add_nugget);

/// Gram matrix over rows of already-scaled inputs.
Matrix cov_matrix_scaled(const KernelSpec &spec, double signal_var,
                         const RowMatrix &Xs);

/// Cross covariance between rows of A and B (both unscaled).
Matrix cross_cov(const KernelSpec &spec, const Hyperparameters &hp,
                 const RowMatrix &A, const RowMatrix &B);

/// Cholesky factor with the jitter policy: on failure add 1e-8 * signal_var to
/// the diagonal and retry, multiplying the jitter by 10 up to three times.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};
JitteredCholesky cholesky_with_jitter(Matrix K, double signal_var,
                                      const std::string &context = {});

} // namespace thingp
