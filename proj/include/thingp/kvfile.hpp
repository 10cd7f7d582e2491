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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thingp/common.hpp"

namespace thingp {

/// Ordered `key = value` document. Lines starting with '#' are comments.
/// Used for persisted models and for bench scenario files.
class KeyValueFile {
public:
  void set(const std::string &key, const std::string &value);
  void set(const std::string &key, double value);
  void set(const std::string &key, std::int64_t value);
  void set(const std::string &key, std::size_t value);
  void set(const std::string &key, bool value);
  void set(const std::string &key, const std::vector<double> &values);
  void set(const std::string &key, const std::vector<std::size_t> &values);

  bool has(const std::string &key) const;
  const std::string &get(const std::string &key) const;
  std::string get_or(const std::string &key, const std::string &fallback) const;
  double get_double(const std::string &key) const;
  std::int64_t get_int(const std::string &key) const;
  std::size_t get_size(const std::string &key) const;
  bool get_bool(const std::string &key) const;
  std::vector<double> get_doubles(const std::string &key) const;
  std::vector<std::size_t> get_sizes(const std::string &key) const;

  const std::vector<std::pair<std::string, std::string>> &entries() const {
    return entries_;
  }

  std::string to_string() const;
  static KeyValueFile parse(const std::string &text,
                            const std::string &origin = "<string>");
  static KeyValueFile read(const std::string &path);
  void write(const std::string &path) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
  std::string origin_ = "<memory>";
};

/// Round-trippable decimal form of a double.
std::string format_double(double v);

} // namespace thingp
