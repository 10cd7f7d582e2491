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

// Independent reference implementations used as test oracles. None of these
// share code with the library beyond the Eigen types.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thingp/common.hpp"

namespace oracle {

using thingp::Matrix;
using thingp::RowMatrix;
using thingp::Vector;

inline double matern15(double r, double s) {
  const double a = std::sqrt(3.0) * r;
  return s * (1.0 + a) * std::exp(-a);
}

inline double sqexp(double r, double s) { return s * std::exp(-0.5 * r * r); }

inline double dist(const RowMatrix &A, Eigen::Index i, const RowMatrix &B,
                   Eigen::Index j, const Vector &ls) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    const double d = (A(i, k) - B(j, k)) / ls[k];
    s += d * d;
  }
  return std::sqrt(s);
}

template <class K>
Matrix gram(const RowMatrix &A, const RowMatrix &B, const Vector &ls, double s, K kern) {
  Matrix G(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      G(i, j) = kern(dist(A, i, B, j, ls), s);
  return G;
}

/// log N(y | 0, K + nug I) through an LU determinant and an explicit solve.
template <class K>
double dense_loglik(const RowMatrix &X, const Vector &y, const Vector &ls, double s,
                    double nug, K kern) {
  Matrix C = gram(X, X, ls, s, kern);
  C.diagonal().array() += nug;
  Eigen::PartialPivLU<Matrix> lu(C);
  const double logdet = lu.matrixLU().diagonal().array().abs().log().sum();
  const double quad = y.dot(lu.solve(y));
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

struct Posterior {
  double mean;
  double var; // latent variance (no nugget)
};

template <class K>
Posterior dense_posterior(const RowMatrix &X, const Vector &y, const RowMatrix &xs,
                          const Vector &ls, double s, double nug, K kern) {
  Matrix C = gram(X, X, ls, s, kern);
  C.diagonal().array() += nug;
  const Matrix Cinv = C.inverse();
  const Vector k = gram(X, xs, ls, s, kern).col(0);
  return {k.dot(Cinv * y), s - k.dot(Cinv * k)};
}

/// PACF(h) as the lag-h coefficient of the order-h least-squares regression
/// of x_t on (1, x_{t-1}, ..., x_{t-h}).
inline std::vector<double> ols_pacf(const Vector &x, std::size_t h_max) {
  std::vector<double> out;
  const auto n = x.size();
  for (std::size_t h = 1; h <= h_max; ++h) {
    const auto H = static_cast<Eigen::Index>(h);
    Matrix A(n - H, H + 1);
    Vector b(n - H);
    for (Eigen::Index t = H; t < n; ++t) {
      A(t - H, 0) = 1.0;
      for (Eigen::Index k = 1; k <= H; ++k)
        A(t - H, k) = x[t - k];
      b[t - H] = x[t];
    }
    const Vector coef = A.colPivHouseholderQr().solve(b);
    out.push_back(coef[H]);
  }
  return out;
}

/// Indices of the k smallest distances (ties to the lower index).
inline std::vector<std::size_t> brute_knn(const RowMatrix &X, const std::vector<std::size_t> &cand,
                                          const Eigen::RowVectorXd &q, const Vector &ls,
                                          std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (auto c : cand) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double t = (X(static_cast<Eigen::Index>(c), j) - q[j]) / ls[j];
      s += t * t;
    }
    d.emplace_back(s, c);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i)
    out.push_back(d[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

/// The four arm formulas written out term by term.
inline double arm(const double th[4], const double L[4]) {
  const double x1 = th[0];
  const double x2 = th[0] + th[1];
  const double x3 = th[0] + th[1] + th[2];
  const double x4 = th[0] + th[1] + th[2] + th[3];
  const double u = L[0] * std::cos(x1) + L[1] * std::cos(x2) + L[2] * std::cos(x3) +
                   L[3] * std::cos(x4);
  const double v = L[0] * std::sin(x1) + L[1] * std::sin(x2) + L[2] * std::sin(x3) +
                   L[3] * std::sin(x4);
  return std::hypot(u, v);
}

inline RowMatrix uniform(std::size_t n, std::size_t d, std::mt19937_64 &rng, double lo = 0.0,
                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      X(i, j) = u(rng);
  return X;
}

inline Vector normal(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> z;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto &e : v)
    e = z(rng);
  return v;
}

/// Draw from N(0, K + nug I) on the rows of X.
template <class K>
Vector gp_draw(const RowMatrix &X, const Vector &ls, double s, double nug, K kern,
               std::mt19937_64 &rng) {
  Matrix C = gram(X, X, ls, s, kern);
  C.diagonal().array() += nug + 1e-10 * s;
  Eigen::LLT<Matrix> llt(C);
  return llt.matrixL() * normal(static_cast<std::size_t>(X.rows()), rng);
}

inline double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace oracle
