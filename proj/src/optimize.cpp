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
#include "thingp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thingp {

namespace {

Vector project(Vector theta, const AscentOptions &opts) {
  if (opts.lower.size() == theta.size())
    theta = theta.cwiseMax(opts.lower);
  if (opts.upper.size() == theta.size())
    theta = theta.cwiseMin(opts.upper);
  return theta;
}

/// Zero the gradient components pinned at an active bound.
Vector free_gradient(const Vector &theta, const Vector &g,
                     const AscentOptions &opts) {
  Vector out = g;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (opts.lower.size() == g.size() && theta[i] <= opts.lower[i] && g[i] < 0)
      out[i] = 0.0;
    if (opts.upper.size() == g.size() && theta[i] >= opts.upper[i] && g[i] > 0)
      out[i] = 0.0;
  }
  return out;
}

} // namespace

AscentResult maximize(const Objective &f, Vector theta0,
                      const AscentOptions &opts) {
  const auto p = theta0.size();
  AscentResult res;
  res.theta = project(std::move(theta0), opts);
  Vector grad(p);
  res.value = f(res.theta, grad);
  if (!std::isfinite(res.value) || !grad.allFinite())
    throw NumericalError("objective is not finite at the starting point");
  res.value_trace.push_back(res.value);
  res.theta_trace.push_back(res.theta);

  // Inverse Hessian approximation of the negated objective.
  Matrix H = Matrix::Identity(p, p);
  bool scaled = false;
  Vector g = free_gradient(res.theta, grad, opts);
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    Vector dir = H * g;
    if (dir.dot(g) <= 0.0) {
      H.setIdentity();
      scaled = false;
      dir = g;
    }
    const double inf = dir.cwiseAbs().maxCoeff();
    if (inf > opts.max_step)
      dir *= opts.max_step / inf;
    if (inf == 0.0) {
      res.converged = true;
      break;
    }

    double step = 1.0;
    Vector cand, cand_grad(p);
    double cand_val = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      cand = project(res.theta + step * dir, opts);
      cand_val = f(cand, cand_grad);
      const double predicted = g.dot(cand - res.theta);
      if (std::isfinite(cand_val) && cand_grad.allFinite() &&
          cand_val >= res.value + 1e-4 * predicted) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent possible along any tried step: treat as converged.
      res.converged = true;
      break;
    }

    const Vector s = cand - res.theta;
    const Vector g_new = free_gradient(cand, cand_grad, opts);
    const Vector y = g - g_new; // gradient of the negated objective changes by -y
    const double prev = res.value;
    res.theta = cand;
    res.value = cand_val;
    res.iterations = it + 1;
    res.value_trace.push_back(res.value);
    res.theta_trace.push_back(res.theta);

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        // Shanno-Phua scaling of the initial inverse Hessian.
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix I = Matrix::Identity(p, p);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    g = g_new;

    const double change = std::abs(res.value - prev);
    if (change <= opts.rel_tol * std::max(1.0, std::abs(res.value))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

} // namespace thingp
