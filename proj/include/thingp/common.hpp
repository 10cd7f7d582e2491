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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace thingp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Design matrices are stored row-major: every hot loop walks rows.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = std::size_t;

/// Base error. The category maps onto the CLI exit code.
class Error : public std::runtime_error {
public:
  enum class Kind { Config = 2, Data = 3, Numerical = 4 };

  Error(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  Kind kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string &what) : Error(Kind::Config, what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string &what) : Error(Kind::Data, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &what)
      : Error(Kind::Numerical, what) {}
};

namespace log {

using Sink = std::function<void(std::string_view level, std::string_view msg)>;

/// Replaces the process-wide sink; returns the previous one. The default
/// sink writes to stderr.
Sink set_sink(Sink sink);
void warn(std::string_view msg);
void info(std::string_view msg);

/// Collects warnings for the lifetime of the object (used by tests and by the
/// CLI to count diagnostics).
class Capture {
public:
  Capture();
  ~Capture();
  Capture(const Capture &) = delete;
  Capture &operator=(const Capture &) = delete;

  const std::vector<std::string> &warnings() const { return warnings_; }
  bool contains(std::string_view needle) const;

private:
  Sink previous_;
  std::vector<std::string> warnings_;
};

} // namespace log

/// Deterministic seed derivation for named sub-streams ("maximin",
/// "simulator", "optimizer", ...) of a single root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

/// FNV-1a over arbitrary bytes; used for config hashes in CSV headers.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace thingp
