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

#include "thingp/common.hpp"

namespace thingp {

/// Predictive mean and standard deviation per test point.
struct PredictionResult {
  Vector mean;
  Vector sd;

  std::size_t size() const { return static_cast<std::size_t>(mean.size()); }
  Vector variance() const { return sd.array().square().matrix(); }
};

} // namespace thingp
