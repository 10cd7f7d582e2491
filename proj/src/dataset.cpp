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
#include "thingp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "thingp/csv.hpp"

namespace thingp {

RowMatrix Dataset::x_with_time() const {
  RowMatrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()) = t;
  return out;
}

Dataset Dataset::rows(const std::vector<Index> &idx) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.t.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(idx[k]);
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(i);
    out.y[static_cast<Eigen::Index>(k)] = y[i];
    out.t[static_cast<Eigen::Index>(k)] = t[i];
  }
  out.covariate_names = covariate_names;
  out.response_name = response_name;
  out.time_synthesized = time_synthesized;
  out.time_ranked = time_ranked;
  return out;
}

Dataset make_dataset(RowMatrix x, Vector y, Vector t,
                     std::vector<std::string> covariate_names) {
  const auto n = y.size();
  if (n < 1)
    throw DataError("dataset needs at least one row");
  if (x.rows() != n)
    throw DataError("x has " + std::to_string(x.rows()) + " rows but y has " +
                    std::to_string(n));
  if (x.cols() < 1)
    throw DataError("dataset needs at least one covariate column");
  if (!x.allFinite() || !y.allFinite())
    throw DataError("non-finite value in x or y");

  Dataset ds;
  if (t.size() == 0) {
    ds.time_synthesized = true;
    t = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
  } else if (t.size() != n) {
    throw DataError("t has " + std::to_string(t.size()) + " entries, expected " +
                    std::to_string(n));
  } else if (!t.allFinite()) {
    throw DataError("non-finite time index");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return t[static_cast<Eigen::Index>(a)] < t[static_cast<Eigen::Index>(b)];
  });

  ds.x.resize(n, x.cols());
  ds.y.resize(n);
  ds.t.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
    ds.x.row(k) = x.row(i);
    ds.y[k] = y[i];
    ds.t[k] = t[i];
  }
  bool duplicates = false;
  for (Eigen::Index k = 1; k < n; ++k)
    duplicates = duplicates || !(ds.t[k] > ds.t[k - 1]);
  if (duplicates) {
    ds.time_ranked = true;
    ds.t = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
  }

  if (covariate_names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      covariate_names.push_back("x" + std::to_string(j + 1));
  } else if (static_cast<Eigen::Index>(covariate_names.size()) != x.cols()) {
    throw DataError("covariate name count does not match column count");
  }
  ds.covariate_names = std::move(covariate_names);
  return ds;
}

namespace {

std::optional<double> parse_cell(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
    cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' ||
                           cell.back() == '\r'))
    cell.remove_suffix(1);
  if (cell.empty() || cell == "NA")
    return std::nullopt;
  double v = 0.0;
  const char *first = cell.data();
  if (*first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::size_t column_of(const std::vector<std::string> &header,
                      const std::string &name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw DataError("schema error: column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

} // namespace

Dataset load_csv(const std::string &path, const CsvSchema &schema) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  if (schema.response.empty())
    throw ConfigError("schema error: a response column is required");

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    header = csv::split(line);
    break;
  }
  if (header.empty())
    throw DataError("'" + path + "' has no header row");

  const std::size_t response_col = column_of(header, schema.response);
  std::optional<std::size_t> time_col;
  if (schema.time)
    time_col = column_of(header, *schema.time);

  std::vector<std::string> names = schema.covariates;
  if (names.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (j != response_col && (!time_col || j != *time_col))
        names.push_back(header[j]);
  }
  if (names.empty())
    throw DataError("schema error: at least one covariate column is required");
  std::vector<std::size_t> cov_cols;
  for (const auto &name : names)
    cov_cols.push_back(column_of(header, name));

  std::vector<std::vector<double>> xs;
  std::vector<double> ys, ts;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#')
      continue;
    const auto cells = csv::split(line);
    auto get = [&](std::size_t col) -> std::optional<double> {
      if (col >= cells.size())
        return std::nullopt;
      return parse_cell(cells[col]);
    };
    std::vector<double> row;
    bool ok = true;
    for (auto c : cov_cols) {
      auto v = get(c);
      if (!v) {
        ok = false;
        break;
      }
      row.push_back(*v);
    }
    auto yv = get(response_col);
    std::optional<double> tv;
    if (time_col)
      tv = get(*time_col);
    if (!ok || !yv || (time_col && !tv)) {
      ++dropped;
      continue;
    }
    xs.push_back(std::move(row));
    ys.push_back(*yv);
    if (tv)
      ts.push_back(*tv);
  }
  if (ys.empty())
    throw DataError("'" + path + "' has zero usable rows");

  // Constant columns carry no information about the response.
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < cov_cols.size(); ++j) {
    bool constant = true;
    for (std::size_t i = 1; i < xs.size() && constant; ++i)
      constant = xs[i][j] == xs[0][j];
    if (constant && xs.size() > 1) {
      log::warn("dropping constant covariate column '" + names[j] + "'");
      continue;
    }
    keep.push_back(j);
  }
  if (keep.empty())
    throw DataError("every covariate column is constant");

  RowMatrix x(static_cast<Eigen::Index>(xs.size()),
              static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t k = 0; k < keep.size(); ++k)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          xs[i][keep[k]];
  std::vector<std::string> kept_names;
  for (auto k : keep)
    kept_names.push_back(names[k]);

  Vector y = Eigen::Map<Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  Vector t;
  if (time_col)
    t = Eigen::Map<Vector>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  Dataset ds = make_dataset(std::move(x), std::move(y), std::move(t),
                            std::move(kept_names));
  ds.response_name = schema.response;
  ds.dropped_rows = dropped;
  if (dropped > 0)
    log::warn("dropped " + std::to_string(dropped) +
              " row(s) with missing values from '" + path + "'");
  return ds;
}

InputTable load_inputs_csv(const std::string &path,
                           const std::vector<std::string> &covariates,
                           const std::optional<std::string> &time,
                           const std::optional<std::string> &response) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    header = csv::split(line);
    break;
  }
  if (header.empty())
    throw DataError("'" + path + "' has no header row");
  if (covariates.empty())
    throw ConfigError("schema error: no covariate columns requested");
  std::vector<std::size_t> cols;
  for (const auto &name : covariates)
    cols.push_back(column_of(header, name));
  std::optional<std::size_t> time_col, y_col;
  if (time)
    time_col = column_of(header, *time);
  if (response && std::find(header.begin(), header.end(), *response) != header.end())
    y_col = column_of(header, *response);

  std::vector<double> xs, ts, ys;
  std::size_t rows = 0;
  bool y_complete = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#')
      continue;
    const auto cells = csv::split(line);
    auto get = [&](std::size_t col) -> std::optional<double> {
      return col < cells.size() ? parse_cell(cells[col]) : std::nullopt;
    };
    for (auto c : cols) {
      const auto v = get(c);
      if (!v)
        throw DataError("'" + path + "' line " + std::to_string(lineno) +
                        ": missing value in column '" + header[c] + "'");
      xs.push_back(*v);
    }
    if (time_col) {
      const auto v = get(*time_col);
      if (!v)
        throw DataError("'" + path + "' line " + std::to_string(lineno) +
                        ": missing time value");
      ts.push_back(*v);
    }
    if (y_col) {
      const auto v = get(*y_col);
      y_complete = y_complete && v.has_value();
      ys.push_back(v.value_or(0.0));
    }
    ++rows;
  }
  if (rows == 0)
    throw DataError("'" + path + "' has zero rows");
  InputTable out;
  out.x = Eigen::Map<RowMatrix>(xs.data(), static_cast<Eigen::Index>(rows),
                                static_cast<Eigen::Index>(cols.size()));
  if (time_col)
    out.t = Eigen::Map<Vector>(ts.data(), static_cast<Eigen::Index>(rows));
  if (y_col && y_complete)
    out.y = Eigen::Map<Vector>(ys.data(), static_cast<Eigen::Index>(rows));
  else if (y_col)
    log::warn("response column in '" + path + "' has missing values; metrics skipped");
  return out;
}

void write_csv(const std::string &path, const Dataset &ds,
               const std::string &header_comment) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write '" + path + "'");
  if (!header_comment.empty())
    out << "# " << header_comment << '\n';
  for (const auto &name : ds.covariate_names)
    out << name << ',';
  out << ds.response_name << ",t\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
      out << ds.x(r, j) << ',';
    out << ds.y[r] << ',' << ds.t[r] << '\n';
  }
}

RowMatrix Standardization::apply_x(const RowMatrix &x) const {
  if (!applied)
    return x;
  RowMatrix out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    out.col(j) = (out.col(j).array() - x_mean[j]) / x_scale[j];
  return out;
}

Vector Standardization::apply_y(const Vector &y) const {
  if (!applied)
    return y;
  return ((y.array() - y_mean) / y_scale).matrix();
}

RowMatrix Standardization::invert_x(const RowMatrix &x) const {
  if (!applied)
    return x;
  RowMatrix out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    out.col(j) = out.col(j).array() * x_scale[j] + x_mean[j];
  return out;
}

Vector Standardization::invert_y(const Vector &y) const {
  if (!applied)
    return y;
  return (y.array() * y_scale + y_mean).matrix();
}

Vector Standardization::invert_sd(const Vector &sd) const {
  if (!applied)
    return sd;
  return sd * y_scale;
}

namespace {

std::pair<double, double> mean_sd(const auto &v) {
  const double n = static_cast<double>(v.size());
  const double mean = v.sum() / n;
  const double ss = (v.array() - mean).square().sum();
  return {mean, std::sqrt(ss / (n - 1.0))};
}

} // namespace

std::pair<Dataset, Standardization> standardize(const Dataset &ds) {
  if (ds.n() < 2)
    throw DataError("standardize needs at least two rows");
  Standardization st;
  st.applied = true;
  auto [ym, ys] = mean_sd(ds.y);
  if (!(ys > 0.0))
    throw DataError("response has zero variance");
  st.y_mean = ym;
  st.y_scale = ys;

  std::vector<Eigen::Index> keep;
  std::vector<double> means, scales;
  for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
    auto [m, s] = mean_sd(ds.x.col(j));
    if (!(s > 0.0)) {
      log::warn("dropping zero-variance column '" +
                ds.covariate_names[static_cast<std::size_t>(j)] + "'");
      continue;
    }
    keep.push_back(j);
    means.push_back(m);
    scales.push_back(s);
  }
  if (keep.empty())
    throw DataError("every covariate column has zero variance");

  Dataset out = ds;
  out.x.resize(ds.x.rows(), static_cast<Eigen::Index>(keep.size()));
  out.covariate_names.clear();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) =
        (ds.x.col(keep[k]).array() - means[k]) / scales[k];
    out.covariate_names.push_back(
        ds.covariate_names[static_cast<std::size_t>(keep[k])]);
  }
  out.y = ((ds.y.array() - ym) / ys).matrix();
  st.x_mean = Eigen::Map<Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
  st.x_scale =
      Eigen::Map<Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
  return {std::move(out), std::move(st)};
}

Dataset destandardize(const Dataset &ds, const Standardization &st) {
  Dataset out = ds;
  out.x = st.invert_x(ds.x);
  out.y = st.invert_y(ds.y);
  return out;
}

} // namespace thingp
