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
#include "thingp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace thingp {

double robot_arm(const std::array<double, 4> &angles,
                 const std::array<double, 4> &lengths) {
  double xi = 0.0, u = 0.0, v = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    xi += angles[i];
    u += lengths[i] * std::cos(xi);
    v += lengths[i] * std::sin(xi);
  }
  return std::sqrt(u * u + v * v);
}

double companion_spectral_radius(const std::vector<double> &phi) {
  const auto M = static_cast<Eigen::Index>(phi.size());
  if (M == 0)
    return 0.0;
  Matrix C = Matrix::Zero(M, M);
  for (Eigen::Index k = 0; k < M; ++k)
    C(0, k) = phi[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k < M; ++k)
    C(k, k - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(C, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void ArmArSpec::validate() const {
  if (M == 0)
    return;
  if (phi.size() != 8)
    throw ConfigError("AR spec needs coefficient vectors for all 8 inputs");
  for (std::size_t s = 0; s < phi.size(); ++s) {
    if (phi[s].size() != M)
      throw ConfigError("AR coefficient vector " + std::to_string(s + 1) +
                        " must have length M = " + std::to_string(M));
    if (!(companion_spectral_radius(phi[s]) < 1.0))
      throw ConfigError("AR coefficients for input " + std::to_string(s + 1) +
                        " are not stationary");
  }
  if (psi.size() != M)
    throw ConfigError("MA noise coefficients must have length M");
  if (innovation_sd < 0.0 || noise_sd < 0.0)
    throw ConfigError("innovation standard deviations must be non-negative");
}

ArmArSpec default_arm_spec(std::size_t M, std::uint64_t seed,
                           const ArCalibration &cal) {
  ArmArSpec spec;
  spec.M = M;
  spec.seed = seed;
  spec.innovation_sd = cal.innovation_sd;
  spec.noise_sd = cal.noise_sd;
  if (M == 0)
    return spec;
  if (!(cal.spectral_radius > 0.0 && cal.spectral_radius < 1.0))
    throw ConfigError("AR spectral radius must lie in (0, 1)");
  // With positive coefficients the dominant root is the positive root r of
  // sum_k c / k * r^{-k} = 1, so c follows in closed form for r = target.
  double denom = 0.0;
  for (std::size_t k = 1; k <= M; ++k)
    denom += std::pow(cal.spectral_radius, -static_cast<double>(k)) /
             static_cast<double>(k);
  std::vector<double> phi(M);
  for (std::size_t k = 1; k <= M; ++k)
    phi[k - 1] = 1.0 / (denom * static_cast<double>(k));
  spec.phi.assign(8, phi);
  spec.psi.resize(M);
  for (std::size_t k = 1; k <= M; ++k)
    spec.psi[k - 1] = cal.psi_scale / static_cast<double>(k);
  return spec;
}

RowMatrix latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
  }
  return out;
}

namespace {

const std::vector<std::string> &arm_names() {
  static const std::vector<std::string> names = {"theta1", "theta2", "theta3", "theta4",
                                                 "L1",     "L2",     "L3",     "L4"};
  return names;
}

} // namespace

Dataset simulate_series(const ArmArSpec &spec, std::size_t n, double t0,
                        std::uint64_t stream_seed) {
  spec.validate();
  if (n < spec.M + 1)
    throw ConfigError("simulation length must be at least M + 1");
  RowMatrix x(static_cast<Eigen::Index>(n), 8);
  Vector y = Vector::Zero(static_cast<Eigen::Index>(n));

  if (spec.M == 0) {
    const RowMatrix u = latin_hypercube(n, 8, stream_seed);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < 4; ++j)
        x(i, j) = 2.0 * std::numbers::pi * u(i, j);
      for (Eigen::Index j = 4; j < 8; ++j)
        x(i, j) = u(i, j);
    }
  } else {
    std::mt19937_64 rng(stream_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t M = spec.M;
    const std::size_t total = M + spec.burn_in + n;
    for (std::size_t s = 0; s < 8; ++s) {
      std::vector<double> series(total);
      for (std::size_t k = 0; k < M; ++k)
        series[k] = normal(rng);
      for (std::size_t t = M; t < total; ++t) {
        double v = 0.0;
        for (std::size_t k = 1; k <= M; ++k)
          v += spec.phi[s][k - 1] * series[t - k];
        if (spec.stochastic)
          v += spec.innovation_sd * normal(rng);
        series[t] = v;
      }
      const auto first = static_cast<std::ptrdiff_t>(M + spec.burn_in);
      Eigen::Map<const Vector> kept(series.data() + first, static_cast<Eigen::Index>(n));
      const double mean = kept.mean();
      const double sd = std::sqrt((kept.array() - mean).square().sum() /
                                  std::max(1.0, static_cast<double>(n) - 1.0));
      for (std::size_t i = 0; i < n; ++i)
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
            sd > 0.0 ? (kept[static_cast<Eigen::Index>(i)] - mean) / sd
                     : kept[static_cast<Eigen::Index>(i)] - mean;
    }
    // MA noise on y: eps has M pre-sample values so the first record already
    // carries the full moving average.
    std::vector<double> eps(n + M);
    for (auto &e : eps)
      e = spec.stochastic ? spec.noise_sd * normal(rng) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double noise = 0.0;
      for (std::size_t k = 1; k <= M; ++k)
        noise += spec.psi[k - 1] * eps[i + M - k];
      y[static_cast<Eigen::Index>(i)] = noise;
    }
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::array<double, 4> a{x(i, 0), x(i, 1), x(i, 2), x(i, 3)};
    const std::array<double, 4> l{x(i, 4), x(i, 5), x(i, 6), x(i, 7)};
    y[i] += robot_arm(a, l);
  }
  Vector t = Vector::LinSpaced(static_cast<Eigen::Index>(n), t0,
                               t0 + static_cast<double>(n) - 1.0);
  Dataset ds = make_dataset(std::move(x), std::move(y), std::move(t), arm_names());
  return ds;
}

SimulatedPair simulate(const ArmArSpec &spec, std::size_t n_train,
                       std::size_t n_test) {
  SimulatedPair out;
  out.train = simulate_series(spec, n_train, 1.0, derive_seed(spec.seed, "simulator", 0));
  if (n_test > 0)
    out.test = simulate_series(spec, n_test, static_cast<double>(n_train) + 1.0,
                               derive_seed(spec.seed, "simulator", 1));
  return out;
}

double rmse(const Vector &y_true, const Vector &y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() == 0)
    throw DataError("rmse: vectors must be non-empty and equal in length");
  return std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
}

double nlpd(const Vector &y_true, const Vector &mean, const Vector &sd) {
  const auto n = y_true.size();
  if (n == 0 || mean.size() != n || sd.size() != n)
    throw DataError("nlpd: vectors must be non-empty and equal in length");
  // Running mean: exact when every point contributes the same term.
  double mean_term = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sd[i] > 0.0))
      throw DataError("nlpd: non-positive predictive sd at index " + std::to_string(i));
    const double v = sd[i] * sd[i];
    const double e = y_true[i] - mean[i];
    const double term = e * e / v + std::log(2.0 * std::numbers::pi * v);
    mean_term += (term - mean_term) / static_cast<double>(i + 1);
  }
  return 0.5 * mean_term;
}

} // namespace thingp
