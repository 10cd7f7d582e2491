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
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "thingp/temporal.hpp"

using namespace thingp;

namespace {

ResidualSeries series(const Vector &r) {
  ResidualSeries s;
  s.t = Vector::LinSpaced(r.size(), 1.0, static_cast<double>(r.size()));
  s.r = r;
  return s;
}

double corr(const Vector &a, const Vector &b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

} // namespace

TEST_CASE("white-noise residuals give a weak temporal signal") {
  std::mt19937_64 rng(1);
  const auto res = series(oracle::normal(3000, rng));
  const auto model = fit_g(res, 10);
  CHECK_FALSE(model.degenerate);
  CHECK(model.signal_to_nugget() <= 0.2);
  const Vector ts = Vector::LinSpaced(50, 100.5, 2550.5);
  const auto g = predict_g(model, res, ts);
  CHECK(g.pred.mean.cwiseAbs().maxCoeff() < 0.5);
}

TEST_CASE("AR(1) residuals are predictable one step ahead") {
  std::mt19937_64 rng(2);
  const std::size_t n = 4000;
  const Vector z = oracle::normal(n, rng);
  Vector r(n);
  r[0] = z[0];
  for (std::size_t i = 1; i < n; ++i)
    r[i] = 0.8 * r[i - 1] + z[i];
  const auto full = series(r);
  const auto model = fit_g(full, 10);
  // Predict r_{k+1} from residuals up to k only.
  Vector pred(500), truth(500);
  for (Eigen::Index k = 0; k < 500; ++k) {
    const Eigen::Index last = 2000 + 3 * k;
    ResidualSeries past;
    past.t = full.t.head(last + 1);
    past.r = full.r.head(last + 1);
    const Vector ts = Vector::Constant(1, full.t[last + 1]);
    pred[k] = predict_g(model, past, ts).pred.mean[0];
    truth[k] = r[last + 1];
  }
  CHECK(corr(pred, truth) > 0.5);
}

TEST_CASE("constant residuals make g identically zero") {
  const auto res = series(Vector::Zero(50));
  const auto model = fit_g(res, 5);
  CHECK(model.degenerate);
  const auto g = predict_g(model, res, Vector::LinSpaced(7, 0.0, 60.0));
  CHECK(g.pred.mean == Vector::Zero(7));
  const auto c = g_contribution(g);
  CHECK(c.sd == Vector::Zero(7));
}

TEST_CASE("fit rejects short series and bad windows") {
  CHECK_THROWS_AS(fit_g(series(Vector::Ones(9)), 2), DataError);
  CHECK_THROWS_AS(fit_g(series(Vector::LinSpaced(20, 0, 1)), 0), ConfigError);
  ResidualSeries bad;
  bad.t = Vector::Ones(12);
  bad.r = Vector::Ones(12);
  CHECK_THROWS_AS(fit_g(bad, 2), DataError);
}

TEST_CASE("empty window returns the prior") {
  std::mt19937_64 rng(3);
  const auto res = series(oracle::normal(100, rng));
  TemporalModel model;
  model.hp.lengthscales = Vector::Constant(1, 3.0);
  model.hp.signal_var = 2.0;
  model.hp.nugget = 0.1;
  model.T = 5;
  const Vector ts = Vector::Constant(1, 106.0);
  const auto g = predict_g(model, res, ts);
  CHECK(g.pred.mean[0] == 0.0);
  CHECK(g.pred.sd[0] == std::sqrt(2.0));
  CHECK(g.window_size[0] == 0);
  CHECK(predict_g(model, res, Vector::Constant(1, 105.0)).window_size[0] == 1);
}

TEST_CASE("near-zero nugget interpolates the residual") {
  std::mt19937_64 rng(4);
  const auto res = series(oracle::normal(40, rng));
  TemporalModel model;
  model.hp.lengthscales = Vector::Constant(1, 2.0);
  model.hp.signal_var = 1.0;
  model.hp.nugget = 1e-10;
  model.T = 3;
  const auto g = predict_g(model, res, Vector::Constant(1, 17.0));
  CHECK(g.pred.mean[0] == doctest::Approx(res.r[16]).epsilon(1e-6));
}

TEST_CASE("three-point window matches the dense posterior") {
  ResidualSeries res;
  res.t.resize(7);
  res.t << 1, 2, 3, 4, 5, 6, 7;
  res.r.resize(7);
  res.r << 0.3, -0.2, 0.9, 0.4, -0.7, 0.1, 0.5;
  TemporalModel model;
  model.hp.lengthscales = Vector::Constant(1, 1.7);
  model.hp.signal_var = 0.8;
  model.hp.nugget = 0.05;
  model.T = 1;
  const auto g = predict_g(model, res, Vector::Constant(1, 4.0));
  REQUIRE(g.window_size[0] == 3);
  RowMatrix X(3, 1);
  X << 3, 4, 5;
  Vector y(3);
  y << 0.9, 0.4, -0.7;
  RowMatrix xs(1, 1);
  xs << 4.0;
  const auto o = oracle::dense_posterior(X, y, xs, model.hp.lengthscales, 0.8, 0.05,
                                         oracle::matern15);
  CHECK(std::abs(g.pred.mean[0] - o.mean) < 1e-10);
  CHECK(std::abs(g.pred.sd[0] - std::sqrt(o.var)) < 1e-10);
}

TEST_CASE("residuals outside the window do not affect g") {
  std::mt19937_64 rng(5);
  auto res = series(oracle::normal(200, rng));
  TemporalModel model;
  model.hp.lengthscales = Vector::Constant(1, 4.0);
  model.hp.signal_var = 1.0;
  model.hp.nugget = 0.2;
  model.T = 6;
  const Vector ts = Vector::Constant(1, 100.0);
  const auto before = predict_g(model, res, ts);
  for (Eigen::Index i = 0; i < 200; ++i)
    if (std::abs(res.t[i] - 100.0) > 6.0)
      res.r[i] += 100.0 * oracle::normal(1, rng)[0];
  const auto after = predict_g(model, res, ts);
  CHECK(before.pred.mean[0] == after.pred.mean[0]);
  CHECK(before.pred.sd[0] == after.pred.sd[0]);
}

TEST_CASE("combine adds means and variances") {
  PredictionResult f, g;
  f.mean = Vector::Constant(1, 2.0);
  f.sd = Vector::Constant(1, 1.0);
  g.mean = Vector::Constant(1, -0.5);
  g.sd = Vector::Constant(1, 0.1);
  const auto c = combine(f, g);
  CHECK(c.mean[0] == 1.5);
  CHECK(c.sd[0] == doctest::Approx(std::sqrt(1.01)).epsilon(1e-15));

  PredictionResult zero;
  zero.mean = Vector::Zero(1);
  zero.sd = Vector::Zero(1);
  const auto same = combine(f, zero);
  CHECK(same.mean == f.mean);
  CHECK(same.sd == f.sd);

  PredictionResult two;
  two.mean = Vector::Zero(2);
  two.sd = Vector::Zero(2);
  CHECK_THROWS_AS(combine(f, two), DataError);
}

TEST_CASE("g vanishes on test times far beyond training") {
  std::mt19937_64 rng(6);
  const auto res = series(oracle::normal(300, rng));
  const auto model = fit_g(res, 8);
  const Vector ts = Vector::LinSpaced(20, 309.0, 400.0);
  const auto g = g_contribution(predict_g(model, res, ts));
  PredictionResult f;
  f.mean = oracle::normal(20, rng);
  f.sd = oracle::normal(20, rng).cwiseAbs();
  const auto c = combine(f, g);
  CHECK(c.mean == f.mean);
  CHECK(c.sd == f.sd);
}
