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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "thingp/csv.hpp"
#include "thingp/dataset.hpp"
#include "thingp/kvfile.hpp"

using namespace thingp;

namespace {

std::string write_temp(const std::string &name, const std::string &text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

} // namespace

TEST_CASE("load_csv synthesizes time when no time column exists") {
  const auto path = write_temp("thingp_ds_a.csv", "speed,power\n1,10\n2,20\n3,25\n");
  const Dataset ds = load_csv(path, {"power", {}, std::nullopt});
  CHECK(ds.n() == 3);
  CHECK(ds.d() == 1);
  CHECK(ds.time_synthesized);
  CHECK(ds.t[0] == 1.0);
  CHECK(ds.t[2] == 3.0);
  CHECK(ds.covariate_names == std::vector<std::string>{"speed"});
}

TEST_CASE("load_csv drops constant columns and rows with missing values") {
  const auto path = write_temp("thingp_ds_b.csv",
                               "x1,T_s,y,time\n1,5,2,1\n2,5,NA,2\n3,5,4,3\n4,5,,4\n5,5,1,5\n");
  log::Capture cap;
  const Dataset ds = load_csv(path, {"y", {}, std::string("time")});
  CHECK(ds.n() == 3);
  CHECK(ds.dropped_rows == 2);
  CHECK(ds.d() == 1);
  CHECK(ds.covariate_names.front() == "x1");
  CHECK(cap.contains("T_s"));
}

TEST_CASE("load_csv reports a missing column as a data error") {
  const auto path = write_temp("thingp_ds_c.csv", "a,b\n1,2\n3,4\n");
  CHECK_THROWS_AS(load_csv(path, {"y", {}, std::nullopt}), Error);
}

TEST_CASE("make_dataset sorts stably by time and keeps row pairing") {
  std::mt19937_64 rng(4);
  const std::size_t n = 40;
  RowMatrix x(n, 2);
  Vector y(n), t(n);
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i)
    times[i] = static_cast<double>(i) * 0.5;
  std::shuffle(times.begin(), times.end(), rng);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    t[r] = times[i];
    x(r, 0) = times[i] * 3.0;
    x(r, 1) = -times[i];
    y[r] = times[i] + 100.0;
  }
  const Dataset ds = make_dataset(x, y, t);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    CHECK(ds.x(i, 0) == ds.t[i] * 3.0);
    CHECK(ds.y[i] == ds.t[i] + 100.0);
    if (i > 0)
      CHECK(ds.t[i] > ds.t[i - 1]);
  }
}

TEST_CASE("duplicate time stamps are replaced by ranks in input order") {
  RowMatrix x(4, 1);
  x << 10, 20, 30, 40;
  Vector y(4), t(4);
  y << 1, 2, 3, 4;
  t << 2, 1, 2, 1;
  const Dataset ds = make_dataset(x, y, t);
  CHECK(ds.time_ranked);
  CHECK(ds.t == Vector::LinSpaced(4, 1, 4));
  CHECK(ds.x(0, 0) == 20);
  CHECK(ds.x(1, 0) == 40);
  CHECK(ds.x(2, 0) == 10);
  CHECK(ds.x(3, 0) == 30);
}

TEST_CASE("standardize: two-point response and zero-variance column") {
  RowMatrix x(2, 2);
  x << 1, 2, 3, 2;
  Vector y(2);
  y << 1, 3;
  log::Capture cap;
  const auto [ws, st] = standardize(make_dataset(x, y));
  CHECK(ws.y[0] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
  CHECK(ws.y[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(ws.d() == 1);
  CHECK(cap.contains("x2"));
}

TEST_CASE("standardize is idempotent and round-trips") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(3.0, 7.0);
  RowMatrix x(50, 3);
  Vector y(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j)
      x(i, j) = z(rng) * static_cast<double>(j + 1);
    y[i] = z(rng);
  }
  const Dataset ds = make_dataset(x, y);
  const auto [ws, st] = standardize(ds);
  const auto [ws2, st2] = standardize(ws);
  CHECK((ws2.x - ws.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ws2.y - ws.y).cwiseAbs().maxCoeff() < 1e-12);
  const Dataset back = destandardize(ws, st);
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(std::abs(back.y[i] - ds.y[i]) <= 1e-10 * std::abs(ds.y[i]) + 1e-14);
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(std::abs(back.x(i, j) - ds.x(i, j)) <= 1e-10 * std::abs(ds.x(i, j)) + 1e-14);
  }
}

TEST_CASE("write_csv and load_csv round trip") {
  RowMatrix x(3, 2);
  x << 0.1, 1e-5, 0.2, 2.5, 0.3, -1.0 / 3.0;
  Vector y(3);
  y << 1.0 / 7.0, 2, 3;
  const Dataset ds = make_dataset(x, y, Vector{}, {"a", "b"});
  const auto path = (std::filesystem::temp_directory_path() / "thingp_rt.csv").string();
  write_csv(path, ds, "round trip");
  const Dataset back = load_csv(path, {"y", {}, std::string("t")});
  CHECK(back.x == ds.x);
  CHECK(back.y == ds.y);
  CHECK(back.t == ds.t);
}

TEST_CASE("csv::split handles quotes and a byte order mark") {
  const auto cells = csv::split("\xEF\xBB\xBF" "a,\"b,c\",\"say \"\"hi\"\"\"\r");
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == "a");
  CHECK(cells[1] == "b,c");
  CHECK(cells[2] == "say \"hi\"");
}

TEST_CASE("key-value files round trip typed values") {
  KeyValueFile kv;
  kv.set("format", std::string("thingp-model"));
  kv.set("pi", 3.141592653589793);
  kv.set("n", std::size_t{42});
  kv.set("flag", true);
  kv.set("ls", std::vector<double>{0.1, 1.0 / 3.0, 1e300});
  kv.set("ids", std::vector<std::size_t>{3, 1, 4});
  const KeyValueFile back = KeyValueFile::parse(kv.to_string());
  CHECK(back.get("format") == "thingp-model");
  CHECK(back.get_double("pi") == 3.141592653589793);
  CHECK(back.get_size("n") == 42);
  CHECK(back.get_bool("flag"));
  CHECK(back.get_doubles("ls") == std::vector<double>{0.1, 1.0 / 3.0, 1e300});
  CHECK(back.get_sizes("ids") == std::vector<std::size_t>{3, 1, 4});
  CHECK_THROWS_AS(back.get("missing"), ConfigError);
}
