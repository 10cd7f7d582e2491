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
#include "thingp/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thingp/exact_gp.hpp"

namespace thingp {

void ResidualSeries::validate() const {
  if (t.size() != r.size())
    throw DataError("residual series: t and r differ in length");
  for (Eigen::Index i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw DataError("residual series: t must be strictly increasing");
  if (!r.allFinite() || !t.allFinite())
    throw DataError("residual series has non-finite values");
}

namespace {

/// [first, last) indices of residuals with |t - center| <= T.
std::pair<std::size_t, std::size_t> window(const Vector &t, double center, double T) {
  const double *b = t.data();
  const double *e = t.data() + t.size();
  const double *lo = std::lower_bound(b, e, center - T);
  const double *hi = std::upper_bound(b, e, center + T);
  return {static_cast<std::size_t>(lo - b), static_cast<std::size_t>(hi - b)};
}

RowMatrix column(const Vector &t, std::size_t first, std::size_t last) {
  RowMatrix X(static_cast<Eigen::Index>(last - first), 1);
  for (std::size_t i = first; i < last; ++i)
    X(static_cast<Eigen::Index>(i - first), 0) = t[static_cast<Eigen::Index>(i)];
  return X;
}

} // namespace

TemporalModel fit_g(const ResidualSeries &res, std::size_t T,
                    const TemporalFitOptions &opts) {
  res.validate();
  if (T < 1)
    throw ConfigError("temporal window half-width T must be >= 1");
  const auto n = static_cast<std::size_t>(res.r.size());
  if (n < 10)
    throw DataError("temporal fit needs at least 10 residuals");

  TemporalModel model;
  model.T = T;
  model.hp.lengthscales = Vector::Ones(1);
  const double mean_sq = res.r.squaredNorm() / static_cast<double>(n);
  const double mean = res.r.mean();
  const double var = (res.r.array() - mean).square().sum() / static_cast<double>(n - 1);
  if (!(var > 1e-12 * std::max(mean_sq, 1e-12))) {
    model.degenerate = true;
    model.hp.signal_var = 1e-300;
    model.hp.nugget = 0.0;
    return model;
  }

  std::vector<double> gaps;
  for (std::size_t i = 1; i < n; ++i)
    gaps.push_back(res.t[static_cast<Eigen::Index>(i)] - res.t[static_cast<Eigen::Index>(i - 1)]);
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double gap = gaps[gaps.size() / 2];
  const double half = static_cast<double>(T) * gap;

  // Non-overlapping windows, evenly subsampled along the series.
  std::vector<std::pair<std::size_t, std::size_t>> all;
  double next_center = res.t[0] + half;
  while (next_center <= res.t[static_cast<Eigen::Index>(n - 1)]) {
    auto w = window(res.t, next_center, half);
    if (w.second - w.first >= 2)
      all.push_back(w);
    next_center += 2.0 * half + gap;
  }
  if (all.empty())
    all.push_back({0, n});
  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  const std::size_t take = std::min(all.size(), opts.max_windows);
  for (std::size_t k = 0; k < take; ++k)
    chosen.push_back(all[k * all.size() / take]);
  model.windows_used = chosen.size();

  std::vector<RowMatrix> Xs;
  std::vector<Vector> ys;
  for (auto [a, b] : chosen) {
    Xs.push_back(column(res.t, a, b));
    ys.push_back(res.r.segment(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b - a)));
  }

  const KernelSpec spec = KernelSpec::matern15();
  AscentOptions aopts;
  aopts.max_iter = opts.max_iter;
  // The lengthscale stays at or above one time step so the temporal signal
  // remains distinguishable from the nugget.
  aopts.lower = Vector(3);
  aopts.upper = Vector(3);
  aopts.lower << std::log(gap), std::log(1e-6 * var), std::log(1e-6 * var);
  aopts.upper << std::log(std::max(10.0 * half, 2.0 * gap)), std::log(10.0 * var),
      std::log(10.0 * var);
  Vector theta0(3);
  theta0 << std::log(std::max(0.5 * half, gap)), std::log(0.5 * var), std::log(0.5 * var);

  Objective obj = [&](const Vector &theta, Vector &g) {
    const Hyperparameters hp = Hyperparameters::from_log(theta, 1);
    try {
      return exact::grouped_loglik_grad(spec, hp, Xs, ys, g);
    } catch (const NumericalError &) {
      g.setZero(3);
      return -std::numeric_limits<double>::infinity();
    }
  };
  const AscentResult fit = maximize(obj, theta0, aopts);
  model.hp = Hyperparameters::from_log(fit.theta, 1);
  return model;
}

TemporalPrediction predict_g(const TemporalModel &model,
                             const ResidualSeries &res, const Vector &t_star) {
  res.validate();
  const auto k = t_star.size();
  TemporalPrediction out;
  out.pred.mean = Vector::Zero(k);
  out.pred.sd = Vector::Zero(k);
  out.window_size.assign(static_cast<std::size_t>(k), 0);
  if (model.degenerate)
    return out;
  const KernelSpec spec = KernelSpec::matern15();
  const double prior_sd = std::sqrt(model.hp.signal_var);
  const double T = static_cast<double>(model.T);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto [a, b] = window(res.t, t_star[i], T);
    out.window_size[static_cast<std::size_t>(i)] = b - a;
    if (a == b) {
      out.pred.mean[i] = 0.0;
      out.pred.sd[i] = prior_sd;
      continue;
    }
    RowMatrix star(1, 1);
    star(0, 0) = t_star[i];
    const auto post = exact::predict(
        spec, model.hp, column(res.t, a, b),
        res.r.segment(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b - a)),
        star, false);
    out.pred.mean[i] = post.mean[0];
    out.pred.sd[i] = std::sqrt(post.var[0]);
  }
  return out;
}

PredictionResult g_contribution(const TemporalPrediction &g) {
  PredictionResult out = g.pred;
  for (std::size_t i = 0; i < g.window_size.size(); ++i)
    if (g.window_size[i] == 0) {
      out.mean[static_cast<Eigen::Index>(i)] = 0.0;
      out.sd[static_cast<Eigen::Index>(i)] = 0.0;
    }
  return out;
}

PredictionResult combine(const PredictionResult &f, const PredictionResult &g) {
  if (f.mean.size() != g.mean.size() || f.sd.size() != g.sd.size() ||
      f.mean.size() != f.sd.size())
    throw DataError("combine: f and g predictions differ in length");
  PredictionResult out;
  out.mean = f.mean + g.mean;
  out.sd = f.sd;
  for (Eigen::Index i = 0; i < g.sd.size(); ++i)
    if (g.sd[i] != 0.0)
      out.sd[i] = std::sqrt(f.sd[i] * f.sd[i] + g.sd[i] * g.sd[i]);
  return out;
}

} // namespace thingp
