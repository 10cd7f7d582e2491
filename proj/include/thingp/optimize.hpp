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

#include <functional>
#include <vector>

#include "thingp/common.hpp"

namespace thingp {

struct AscentOptions {
  std::size_t max_iter = 100;
  /// Stop when the relative objective change falls below this.
  double rel_tol = 1e-6;
  /// Box on the parameters (log space for every caller here).
  Vector lower;
  Vector upper;
  /// Largest allowed step (infinity norm) per iteration.
  double max_step = 2.0;
};

struct AscentResult {
  Vector theta;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> value_trace;
  std::vector<Vector> theta_trace;
};

/// Objective returning the value and writing the gradient.
using Objective = std::function<double(const Vector &theta, Vector &grad)>;

/// Projected BFGS ascent with Armijo backtracking. Accepted iterates never
/// decrease the objective. Throws NumericalError when the objective is
/// non-finite at the starting point.
AscentResult maximize(const Objective &f, Vector theta0,
                      const AscentOptions &opts);

} // namespace thingp
