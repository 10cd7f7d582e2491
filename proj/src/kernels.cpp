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
#include "thingp/kernels.hpp"

#include <cmath>

namespace thingp {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

KernelSpec KernelSpec::compact_rbf(double radius) {
  if (!(radius > 0.0))
    throw ConfigError("compact-rbf radius must be positive");
  return {KernelFamily::CompactRbf, radius};
}

std::string to_string(KernelFamily family) {
  switch (family) {
  case KernelFamily::Matern15:
    return "matern15";
  case KernelFamily::SquaredExponential:
    return "sqexp";
  case KernelFamily::CompactRbf:
    return "compact-rbf";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string &name) {
  if (name == "matern15" || name == "matern-1.5")
    return KernelFamily::Matern15;
  if (name == "sqexp" || name == "squared-exponential")
    return KernelFamily::SquaredExponential;
  if (name == "compact-rbf")
    return KernelFamily::CompactRbf;
  throw ConfigError("unknown kernel family '" + name + "'");
}

void Hyperparameters::validate() const {
  if (lengthscales.size() < 1)
    throw ConfigError("hyperparameters need at least one lengthscale");
  for (Eigen::Index j = 0; j < lengthscales.size(); ++j)
    if (!(lengthscales[j] > 0.0) || !std::isfinite(lengthscales[j]))
      throw ConfigError("lengthscale " + std::to_string(j + 1) +
                        " must be positive");
  if (!(signal_var > 0.0) || !std::isfinite(signal_var))
    throw ConfigError("signal variance must be positive");
  if (!(nugget >= 0.0) || !std::isfinite(nugget))
    throw ConfigError("nugget must be non-negative");
}

Vector Hyperparameters::to_log() const {
  const auto d = lengthscales.size();
  Vector theta(d + 2);
  theta.head(d) = lengthscales.array().log();
  theta[d] = std::log(signal_var);
  theta[d + 1] = std::log(nugget);
  return theta;
}

Hyperparameters Hyperparameters::from_log(const Vector &theta, std::size_t d) {
  const auto di = static_cast<Eigen::Index>(d);
  Hyperparameters hp;
  hp.lengthscales = theta.head(di).array().exp();
  hp.signal_var = std::exp(theta[di]);
  hp.nugget = std::exp(theta[di + 1]);
  return hp;
}

double scaled_distance(const Eigen::Ref<const Vector> &xi,
                       const Eigen::Ref<const Vector> &xj,
                       const Hyperparameters &hp) {
  if (xi.size() != xj.size() || xi.size() != hp.lengthscales.size())
    throw ConfigError("scaled_distance: dimension mismatch");
  if ((hp.lengthscales.array() <= 0.0).any())
    throw ConfigError("scaled_distance: lengthscales must be positive");
  return ((xi - xj).array() / hp.lengthscales.array()).matrix().norm();
}

RowMatrix scale_inputs(const RowMatrix &x, const Vector &lengthscales) {
  if (x.cols() != lengthscales.size())
    throw ConfigError("scale_inputs: dimension mismatch");
  RowMatrix out(x.rows(), x.cols());
  const Eigen::RowVectorXd inv = lengthscales.array().inverse().matrix().transpose();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = x.row(i).cwiseProduct(inv);
  return out;
}

double kernel_eval(const KernelSpec &spec, double r, double signal_var) {
  switch (spec.family) {
  case KernelFamily::Matern15: {
    const double a = kSqrt3 * r;
    return signal_var * (1.0 + a) * std::exp(-a);
  }
  case KernelFamily::SquaredExponential:
    return signal_var * std::exp(-0.5 * r * r);
  case KernelFamily::CompactRbf: {
    const double s = r / spec.radius;
    if (s >= 1.0)
      return 0.0;
    const double u = 1.0 - s;
    return signal_var * u * u * u * u * (4.0 * s + 1.0);
  }
  }
  return 0.0;
}

double kernel_radial_factor(const KernelSpec &spec, double r, double signal_var) {
  switch (spec.family) {
  case KernelFamily::Matern15:
    return 3.0 * signal_var * std::exp(-kSqrt3 * r);
  case KernelFamily::SquaredExponential:
    return signal_var * std::exp(-0.5 * r * r);
  case KernelFamily::CompactRbf: {
    const double s = r / spec.radius;
    if (s >= 1.0)
      return 0.0;
    const double u = 1.0 - s;
    return 20.0 * signal_var * u * u * u / (spec.radius * spec.radius);
  }
  }
  return 0.0;
}

double kernel_eval_with_factor(const KernelSpec &spec, double r, double signal_var,
                               double &factor) {
  switch (spec.family) {
  case KernelFamily::Matern15: {
    const double a = kSqrt3 * r;
    const double e = std::exp(-a);
    factor = 3.0 * signal_var * e;
    return signal_var * (1.0 + a) * e;
  }
  case KernelFamily::SquaredExponential:
    factor = signal_var * std::exp(-0.5 * r * r);
    return factor;
  case KernelFamily::CompactRbf:
    factor = kernel_radial_factor(spec, r, signal_var);
    return kernel_eval(spec, r, signal_var);
  }
  factor = 0.0;
  return 0.0;
}

Matrix cov_matrix_scaled(const KernelSpec &spec, double signal_var,
                         const RowMatrix &Xs) {
  const auto k = Xs.rows();
  Matrix K(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    K(i, i) = signal_var;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = (Xs.row(i) - Xs.row(j)).norm();
      K(i, j) = K(j, i) = kernel_eval(spec, r, signal_var);
    }
  }
  return K;
}

Matrix cov_matrix(const KernelSpec &spec, const Hyperparameters &hp,
                  const RowMatrix &X, bool add_nugget) {
  if (X.rows() < 1)
    throw ConfigError("cov_matrix needs at least one row");
  Matrix K = cov_matrix_scaled(spec, hp.signal_var, scale_inputs(X, hp.lengthscales));
  if (add_nugget)
    K.diagonal().array() += hp.nugget;
  return K;
}

Matrix cross_cov(const KernelSpec &spec, const Hyperparameters &hp,
                 const RowMatrix &A, const RowMatrix &B) {
  const RowMatrix As = scale_inputs(A, hp.lengthscales);
  const RowMatrix Bs = scale_inputs(B, hp.lengthscales);
  Matrix K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < As.rows(); ++i)
    for (Eigen::Index j = 0; j < Bs.rows(); ++j)
      K(i, j) = kernel_eval(spec, (As.row(i) - Bs.row(j)).norm(), hp.signal_var);
  return K;
}

JitteredCholesky cholesky_with_jitter(Matrix K, double signal_var,
                                      const std::string &context) {
  JitteredCholesky out;
  out.llt.compute(K);
  if (out.llt.info() == Eigen::Success)
    return out;
  double jitter = 1e-8 * signal_var;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Matrix Kj = K;
    Kj.diagonal().array() += jitter;
    out.llt.compute(Kj);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
    jitter *= 10.0;
  }
  throw NumericalError("covariance matrix is not positive definite after "
                       "jitter retries" +
                       (context.empty() ? std::string() : " (" + context + ")"));
}

} // namespace thingp
