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

#include <optional>
#include <string>
#include <vector>

#include "thingp/common.hpp"

namespace thingp {

/// Time-ordered regression records {x_i, y_i, t_i}.
///
/// Construct through make_dataset() or load_csv(); both canonicalize the time
/// axis so that t is strictly increasing and rows keep their (x, y) pairing.
struct Dataset {
  RowMatrix x;
  Vector y;
  Vector t;
  std::vector<std::string> covariate_names;
  std::string response_name = "y";
  /// True when t was generated as 1..n because no time column existed.
  bool time_synthesized = false;
  /// True when duplicate time stamps forced t to be replaced by ranks.
  bool time_ranked = false;
  std::size_t dropped_rows = 0;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t d() const { return static_cast<std::size_t>(x.cols()); }

  /// x with t appended as a trailing column (the SV(x,t) input).
  RowMatrix x_with_time() const;
  /// Subset of rows in the given order (no re-canonicalization).
  Dataset rows(const std::vector<Index> &idx) const;
};

/// Validates shapes and finiteness, then canonicalizes time: stable sort by t,
/// ties resolved by input order and t replaced by ranks 1..n when any
/// duplicates exist. An empty `t` means t_i = i.
Dataset make_dataset(RowMatrix x, Vector y, Vector t = {},
                     std::vector<std::string> covariate_names = {});

struct CsvSchema {
  std::string response;
  /// Empty = every column except response and time.
  std::vector<std::string> covariates;
  std::optional<std::string> time;
};

/// Reads a UTF-8 CSV with a header row. Empty cells and `NA` are missing;
/// rows with any missing or non-finite value in a used column are dropped.
/// Constant covariate columns are removed with a warning.
Dataset load_csv(const std::string &path, const CsvSchema &schema);

/// Rows of a prediction file, kept in file order with no column dropping.
struct InputTable {
  RowMatrix x;
  /// Empty when no time column was requested.
  Vector t;
  /// Present when the response column was requested and found.
  std::optional<Vector> y;
};

/// Reads the named covariate columns (in the given order). A missing value in
/// a covariate or time cell is a DataError naming the line. The response is
/// optional: if the column is absent, y stays empty.
InputTable load_inputs_csv(const std::string &path,
                           const std::vector<std::string> &covariates,
                           const std::optional<std::string> &time,
                           const std::optional<std::string> &response);

/// Writes x columns, response and time with a header row.
void write_csv(const std::string &path, const Dataset &ds,
               const std::string &header_comment = {});

struct Standardization {
  Vector x_mean;
  Vector x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  bool applied = false;

  RowMatrix apply_x(const RowMatrix &x) const;
  Vector apply_y(const Vector &y) const;
  RowMatrix invert_x(const RowMatrix &x) const;
  Vector invert_y(const Vector &y) const;
  /// Standard deviations transform by the scale only.
  Vector invert_sd(const Vector &sd) const;
};

/// Zero-mean, unit-sample-sd columns and response. Zero-variance covariate
/// columns are dropped with a warning (their names removed as well).
std::pair<Dataset, Standardization> standardize(const Dataset &ds);

/// Inverse of standardize() for a dataset that kept all its columns.
Dataset destandardize(const Dataset &ds, const Standardization &st);

} // namespace thingp
