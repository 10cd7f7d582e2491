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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thingp/blockmodels.hpp"
#include "thingp/common.hpp"
#include "thingp/kvfile.hpp"
#include "thingp/simulate.hpp"
#include "thingp/vecchia.hpp"

namespace thingp {

enum class Protocol { Replication, ThinningSweep, Stability };

std::string to_string(Protocol p);
/// Accepts replication | thinning-sweep | stability.
Protocol protocol_from_string(const std::string &name);

/// Method names accepted by the bench: sv, sv-xt, thinned-sv, twin,
/// thinned-twin, lagp, thinned-lagp.
const std::vector<std::string> &bench_methods();

struct BenchConfig {
  Protocol protocol = Protocol::Replication;
  std::vector<std::string> methods = {"sv", "thinned-sv"};
  /// Robot-arm scenario lag order (0 = Latin hypercube inputs).
  std::size_t M = 13;
  std::size_t n_train = 20000;
  std::size_t n_test = 10000;
  std::size_t replications = 3;
  /// Root seed. Replication r draws its data from derive_seed(seed,
  /// "replication", r); the stability dataset is drawn from derive_seed(seed,
  /// "stability-data").
  std::uint64_t seed = 1;
  /// Model seeds for the stability protocol.
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Thinning numbers for the sweep protocol.
  std::vector<std::size_t> T_grid;
  /// Fixed T for thinned methods; selected from the training data when unset.
  std::optional<std::size_t> T;
  std::size_t m = 30;
  std::size_t m_p = 140;
  ArCalibration calibration;
  /// Adds the temporal residual model g to thinned SV predictions.
  bool with_g = false;
  TwinConfig twin;
  LagpConfig lagp;
  VecchiaConfig vecchia_template;

  /// Canonical key = value form; its FNV-1a hash labels the outputs.
  KeyValueFile to_kv() const;
  std::uint64_t hash() const;
};

/// Reads a scenario file. Lists are comma separated; ranges use a..b or
/// a..b:step. Unknown keys are configuration errors.
BenchConfig bench_config_from_kv(const KeyValueFile &kv);

/// Expands "1,5..50:5" style lists.
std::vector<std::size_t> parse_index_list(const std::string &text);

struct MetricRow {
  std::string scenario;
  std::string method;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t T = 1;
  double rmse = 0.0;
  std::optional<double> nlpd;
  double runtime_s = 0.0;
  /// Sweep marking: "baseline" for T = 1, "top25" / "bottom25" for the
  /// lowest / highest RMSE rows, empty otherwise.
  std::string mark;
};

struct MetricReport {
  Protocol protocol = Protocol::Replication;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<MetricRow> rows;
};

struct MethodResult {
  PredictionResult pred;
  std::size_t T = 1;
  double runtime_s = 0.0;
};

/// Fits one bench method on train and predicts the test inputs. T_override
/// fixes the thinning number of thinned methods.
MethodResult run_method(const std::string &method, const Dataset &train,
                        const Dataset &test, const BenchConfig &cfg,
                        std::uint64_t model_seed,
                        std::optional<std::size_t> T_override = {});

/// Thinning number used by thinned methods on this training set: the
/// configured T, else the PACF choice capped by the block-size law.
std::size_t bench_thinning_number(const Dataset &train, const BenchConfig &cfg);

std::string scenario_tag(const BenchConfig &cfg);

MetricReport run_protocol(const BenchConfig &cfg);

/// Writes results.csv, table.md, timing.log and, for the sweep and stability
/// protocols, a plot (sweep.svg or stability.svg) into dir.
void write_report(const MetricReport &report, const BenchConfig &cfg,
                  const std::string &dir);

std::string report_csv(const MetricReport &report);
std::string report_table(const MetricReport &report);
std::string report_svg(const MetricReport &report);

/// (max - min) / mean of the RMSE values of one method.
double rmse_spread(const MetricReport &report, const std::string &method);
/// Mean RMSE of the rows of one method (optionally restricted to T range).
double mean_rmse(const MetricReport &report, const std::string &method,
                 std::size_t T_lo = 0, std::size_t T_hi = ~std::size_t{0});

} // namespace thingp
