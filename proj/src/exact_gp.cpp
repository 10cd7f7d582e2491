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
#include "thingp/exact_gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace thingp::exact {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

} // namespace

double loglik(const KernelSpec &spec, const Hyperparameters &hp,
              const RowMatrix &X, const Vector &y) {
  const Matrix K = cov_matrix(spec, hp, X, true);
  const auto chol = cholesky_with_jitter(K, hp.signal_var, "exact log-likelihood");
  const Matrix L = chol.llt.matrixL();
  const Vector z = chol.llt.matrixL().solve(y);
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + logdet + static_cast<double>(y.size()) * kLog2Pi);
}

double loglik_grad(const KernelSpec &spec, const Hyperparameters &hp,
                   const RowMatrix &X, const Vector &y, Vector &grad) {
  const auto n = X.rows();
  const auto d = X.cols();
  const RowMatrix Xs = scale_inputs(X, hp.lengthscales);
  Matrix Kk = cov_matrix_scaled(spec, hp.signal_var, Xs);
  Matrix K = Kk;
  K.diagonal().array() += hp.nugget;
  const auto chol = cholesky_with_jitter(K, hp.signal_var, "exact log-likelihood");
  const Vector alpha = chol.llt.solve(y);
  const Matrix Kinv = chol.llt.solve(Matrix::Identity(n, n));
  const Matrix L = chol.llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const double value =
      -0.5 * (y.dot(alpha) + logdet + static_cast<double>(n) * kLog2Pi);

  // dl/dtheta = 0.5 * sum_ij W_ij dK_ij, W = alpha alpha^T - K^{-1}
  const Matrix W = alpha * alpha.transpose() - Kinv;
  grad.setZero(d + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = (Xs.row(i) - Xs.row(j)).norm();
      const double f = kernel_radial_factor(spec, r, hp.signal_var) * W(i, j);
      if (f == 0.0)
        continue;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = Xs(i, k) - Xs(j, k);
        grad[k] += f * diff * diff; // off-diagonal pair counted twice * 0.5
      }
    }
  }
  grad[d] = 0.5 * (W.array() * Kk.array()).sum();
  grad[d + 1] = 0.5 * hp.nugget * W.trace();
  return value;
}

Posterior predict(const KernelSpec &spec, const Hyperparameters &hp,
                  const RowMatrix &X, const Vector &y, const RowMatrix &Xstar,
                  bool include_nugget) {
  const Matrix K = cov_matrix(spec, hp, X, true);
  const auto chol = cholesky_with_jitter(K, hp.signal_var, "exact prediction");
  const Vector alpha = chol.llt.solve(y);
  const Matrix Ks = cross_cov(spec, hp, X, Xstar);
  Posterior post;
  post.mean = Ks.transpose() * alpha;
  const Matrix V = chol.llt.matrixL().solve(Ks);
  post.var = (hp.signal_var - V.colwise().squaredNorm().array()).matrix();
  post.var = post.var.cwiseMax(0.0);
  if (include_nugget)
    post.var.array() += hp.nugget;
  return post;
}

double grouped_loglik_grad(const KernelSpec &spec, const Hyperparameters &hp,
                           const std::vector<RowMatrix> &Xs,
                           const std::vector<Vector> &ys, Vector &grad) {
  grad.setZero(static_cast<Eigen::Index>(hp.dim()) + 2);
  double total = 0.0;
  Vector g;
  for (std::size_t k = 0; k < Xs.size(); ++k) {
    total += loglik_grad(spec, hp, Xs[k], ys[k], g);
    grad += g;
  }
  return total;
}

FitResult fit(const KernelSpec &spec, const RowMatrix &X, const Vector &y,
              const Hyperparameters &init, const FitOptions &opts) {
  init.validate();
  const auto d = static_cast<Eigen::Index>(init.dim());
  const Vector base = init.lengthscales;
  // Parameter vector: shared -> (log multiplier, log s, log nug),
  // separable -> (log l_1..l_d, log s, log nug).
  const Eigen::Index q = opts.shared_lengthscale ? 1 : d;
  auto unpack = [&](const Vector &theta) {
    Hyperparameters hp;
    if (opts.shared_lengthscale)
      hp.lengthscales = base * std::exp(theta[0]);
    else
      hp.lengthscales = theta.head(d).array().exp();
    hp.signal_var = std::exp(theta[q]);
    hp.nugget = std::exp(theta[q + 1]);
    return hp;
  };

  Vector theta0(q + 2);
  if (opts.shared_lengthscale)
    theta0[0] = 0.0;
  else
    theta0.head(d) = init.lengthscales.array().log();
  theta0[q] = std::log(init.signal_var);
  theta0[q + 1] = std::log(std::max(init.nugget, 1e-8));

  AscentOptions aopts;
  aopts.max_iter = opts.max_iter;
  aopts.lower.resize(q + 2);
  aopts.upper.resize(q + 2);
  for (Eigen::Index k = 0; k < q; ++k) {
    const double shift = opts.shared_lengthscale ? base.array().log().mean() : 0.0;
    aopts.lower[k] = opts.min_log_lengthscale - shift;
    aopts.upper[k] = opts.max_log_lengthscale - shift;
  }
  aopts.lower[q] = opts.min_log_signal;
  aopts.upper[q] = opts.max_log_signal;
  aopts.lower[q + 1] = opts.min_log_nugget;
  aopts.upper[q + 1] = opts.max_log_nugget;

  Objective obj = [&](const Vector &theta, Vector &g) {
    const Hyperparameters hp = unpack(theta);
    Vector full;
    double v;
    try {
      v = loglik_grad(spec, hp, X, y, full);
    } catch (const NumericalError &) {
      g.setZero(theta.size());
      return -std::numeric_limits<double>::infinity();
    }
    g.resize(theta.size());
    if (opts.shared_lengthscale)
      g[0] = full.head(d).sum();
    else
      g.head(d) = full.head(d);
    g[q] = full[d];
    g[q + 1] = full[d + 1];
    return v;
  };
  const AscentResult res = maximize(obj, theta0, aopts);
  FitResult out;
  out.hp = unpack(res.theta);
  out.loglik = res.value;
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

} // namespace thingp::exact
