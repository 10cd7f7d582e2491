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
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "thingp/kernels.hpp"

using namespace thingp;

TEST_CASE("scaled distance examples") {
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(1, 2.0);
  Vector a(1), b(1);
  a << 2;
  b << 0;
  CHECK(scaled_distance(a, b, hp) == 1.0);
  CHECK(scaled_distance(a, a, hp) == 0.0);
  hp.lengthscales = Vector(2);
  hp.lengthscales << 1, 0.5;
  Vector c(2), o = Vector::Zero(2);
  c << 1, 1;
  CHECK(scaled_distance(c, o, hp) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  hp.lengthscales[1] = 0.0;
  CHECK_THROWS_AS(scaled_distance(c, o, hp), ConfigError);
}

TEST_CASE("kernel values at zero, at one, and far away") {
  for (auto spec : {KernelSpec::matern15(), KernelSpec::squared_exponential(),
                    KernelSpec::compact_rbf(1.5)})
    CHECK(kernel_eval(spec, 0.0, 2.5) == 2.5);
  const double closed = (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0));
  CHECK(closed == doctest::Approx(0.48335).epsilon(1e-5));
  CHECK(kernel_eval(KernelSpec::matern15(), 1.0, 1.0) == doctest::Approx(closed).epsilon(1e-15));
  CHECK(kernel_eval(KernelSpec::matern15(), 50.0, 1.0) < 1e-30);
  CHECK(kernel_eval(KernelSpec::compact_rbf(2.0), 2.0, 1.0) == 0.0);
  CHECK(kernel_eval(KernelSpec::compact_rbf(2.0), 1.0, 1.0) ==
        doctest::Approx(std::pow(0.5, 4) * 3.0));
}

TEST_CASE("kernels are monotone non-increasing in r") {
  for (auto spec : {KernelSpec::matern15(), KernelSpec::squared_exponential(),
                    KernelSpec::compact_rbf(1.3)}) {
    double prev = kernel_eval(spec, 0.0, 1.0);
    for (double r = 0.01; r < 6.0; r += 0.01) {
      const double k = kernel_eval(spec, r, 1.0);
      CHECK(k <= prev);
      prev = k;
    }
  }
}

TEST_CASE("radial factor equals -k'(r)/r by finite differences") {
  for (auto spec : {KernelSpec::matern15(), KernelSpec::squared_exponential(),
                    KernelSpec::compact_rbf(2.0)}) {
    for (double r : {0.1, 0.5, 1.0, 1.7}) {
      const double h = 1e-6;
      const double dk = (kernel_eval(spec, r + h, 1.3) - kernel_eval(spec, r - h, 1.3)) / (2 * h);
      CHECK(kernel_radial_factor(spec, r, 1.3) == doctest::Approx(-dk / r).epsilon(1e-6));
      double f = 0.0;
      CHECK(kernel_eval_with_factor(spec, r, 1.3, f) == kernel_eval(spec, r, 1.3));
      CHECK(f == doctest::Approx(kernel_radial_factor(spec, r, 1.3)).epsilon(1e-14));
    }
  }
}

TEST_CASE("covariance matrix shapes and properties") {
  Hyperparameters hp;
  hp.lengthscales = Vector::Ones(2);
  hp.signal_var = 2.0;
  hp.nugget = 0.3;
  RowMatrix one(1, 2);
  one << 0.4, 0.1;
  const Matrix K1 = cov_matrix(KernelSpec::matern15(), hp, one, true);
  CHECK(K1.rows() == 1);
  CHECK(K1(0, 0) == doctest::Approx(2.3));

  RowMatrix twins(2, 2);
  twins << 1, 2, 1, 2;
  const Matrix K2 = cov_matrix(KernelSpec::matern15(), hp, twins, false);
  CHECK((K2.array() == 2.0).all());

  std::mt19937_64 rng(1);
  const RowMatrix X = oracle::uniform(5, 2, rng);
  const Matrix K = cov_matrix(KernelSpec::matern15(), hp, X, false);
  CHECK(K == K.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  const Matrix O = oracle::gram(X, X, hp.lengthscales, hp.signal_var, oracle::matern15);
  CHECK((K - O).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rescaling an input column and its lengthscale leaves covariances unchanged") {
  std::mt19937_64 rng(2);
  RowMatrix X = oracle::uniform(8, 3, rng);
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(3, 0.7);
  const Matrix K = cov_matrix(KernelSpec::matern15(), hp, X, false);
  X.col(1) *= 13.0;
  hp.lengthscales[1] *= 13.0;
  const Matrix K2 = cov_matrix(KernelSpec::matern15(), hp, X, false);
  CHECK(((K - K2).array().abs() <= 1e-12 * K.array().abs()).all());
}

TEST_CASE("covariance with a nugget always factors") {
  std::mt19937_64 rng(3);
  int failures = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = 1 + rng() % 50;
    const RowMatrix X = oracle::uniform(k, 1 + rng() % 4, rng);
    Hyperparameters hp;
    hp.lengthscales = Vector::Constant(X.cols(), 0.2 + (rng() % 100) / 50.0);
    hp.signal_var = 1.0;
    hp.nugget = 1e-4;
    Eigen::LLT<Matrix> llt(cov_matrix(KernelSpec::matern15(), hp, X, true));
    failures += llt.info() != Eigen::Success;
  }
  CHECK(failures == 0);
}

TEST_CASE("jittered Cholesky recovers singular matrices and reports the jitter") {
  const Matrix K = Matrix::Ones(3, 3);
  const auto chol = cholesky_with_jitter(K, 1.0);
  CHECK(chol.jitter >= 1e-8);
  CHECK(chol.llt.info() == Eigen::Success);
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(cholesky_with_jitter(bad, 1.0, "test"), NumericalError);
}

TEST_CASE("hyperparameter log round trip and validation") {
  Hyperparameters hp;
  hp.lengthscales = Vector(2);
  hp.lengthscales << 0.5, 4.0;
  hp.signal_var = 3.0;
  hp.nugget = 0.01;
  const auto back = Hyperparameters::from_log(hp.to_log(), 2);
  CHECK((back.lengthscales - hp.lengthscales).norm() < 1e-14);
  CHECK(back.signal_var == doctest::Approx(3.0));
  CHECK(back.nugget == doctest::Approx(0.01));
  hp.signal_var = -1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  CHECK(kernel_family_from_string(to_string(KernelFamily::CompactRbf)) == KernelFamily::CompactRbf);
  CHECK_THROWS_AS(kernel_family_from_string("rbf2"), ConfigError);
}
