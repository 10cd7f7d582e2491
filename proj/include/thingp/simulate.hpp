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

#include <array>
#include <cstdint>
#include <vector>

#include "thingp/common.hpp"
#include "thingp/dataset.hpp"

namespace thingp {

/// End-effector distance of a planar four-segment arm.
double robot_arm(const std::array<double, 4> &angles,
                 const std::array<double, 4> &lengths);

/// Robot-arm scenario. M = 0 draws i.i.d. inputs by Latin hypercube; M > 0
/// drives every input through an AR(M) recursion and adds MA(M) noise to y.
struct ArmArSpec {
  std::size_t M = 0;
  /// Per input series (4 angles then 4 lengths) AR coefficients, each of
  /// length M.
  std::vector<std::vector<double>> phi;
  /// MA coefficients on the response noise, length M.
  std::vector<double> psi;
  double innovation_sd = 1.0;
  double noise_sd = 1.0;
  /// Steps discarded after the standard-normal pre-history.
  std::size_t burn_in = 500;
  /// When false, no innovations are drawn after the pre-history.
  bool stochastic = true;
  std::uint64_t seed = 1;

  /// Throws ConfigError if any AR polynomial is not stationary.
  void validate() const;
};

/// Calibration knobs for the default coefficients: phi_k proportional to 1/k
/// scaled so the companion matrix has the given spectral radius, and
/// psi_k = psi_scale / k.
struct ArCalibration {
  double spectral_radius = 0.95;
  double psi_scale = 0.5;
  double innovation_sd = 1.0;
  double noise_sd = 1.0;
};

ArmArSpec default_arm_spec(std::size_t M, std::uint64_t seed,
                           const ArCalibration &cal = {});

/// Largest modulus among the roots of z^M - phi_1 z^{M-1} - ... - phi_M.
double companion_spectral_radius(const std::vector<double> &phi);

/// Latin hypercube sample of n points in [0,1]^d.
RowMatrix latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

struct SimulatedPair {
  Dataset train;
  Dataset test;
};

/// Training and test sets are independent realizations; t numbers the
/// training records 1..n_train and the test records n_train+1...
SimulatedPair simulate(const ArmArSpec &spec, std::size_t n_train,
                       std::size_t n_test);

/// One realization of length n with time stamps starting at t0.
Dataset simulate_series(const ArmArSpec &spec, std::size_t n, double t0,
                        std::uint64_t stream_seed);

double rmse(const Vector &y_true, const Vector &y_pred);
/// (1 / 2n) sum [ (y - mu)^2 / sd^2 + log(2 pi sd^2) ]; throws DataError
/// naming the first index with a non-positive sd.
double nlpd(const Vector &y_true, const Vector &mean, const Vector &sd);

} // namespace thingp
