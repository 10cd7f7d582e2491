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
#include "thingp/kvfile.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thingp {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void KeyValueFile::set(const std::string &key, const std::string &value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_[key] = entries_.size();
  entries_.emplace_back(key, value);
}

void KeyValueFile::set(const std::string &key, double value) {
  set(key, format_double(value));
}

void KeyValueFile::set(const std::string &key, std::int64_t value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set(const std::string &key, std::size_t value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set(const std::string &key, bool value) {
  set(key, std::string(value ? "true" : "false"));
}

void KeyValueFile::set(const std::string &key, const std::vector<double> &values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      s += ' ';
    s += format_double(values[i]);
  }
  set(key, s);
}

void KeyValueFile::set(const std::string &key,
                       const std::vector<std::size_t> &values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      s += ' ';
    s += std::to_string(values[i]);
  }
  set(key, s);
}

bool KeyValueFile::has(const std::string &key) const {
  return index_.count(key) > 0;
}

const std::string &KeyValueFile::get(const std::string &key) const {
  auto it = index_.find(key);
  if (it == index_.end())
    throw ConfigError(origin_ + ": missing key '" + key + "'");
  return entries_[it->second].second;
}

std::string KeyValueFile::get_or(const std::string &key,
                                 const std::string &fallback) const {
  return has(key) ? get(key) : fallback;
}

namespace {

template <typename T>
T parse_number(const std::string &text, const std::string &key,
               const std::string &origin) {
  T v{};
  const char *first = text.data();
  const char *last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(origin + ": key '" + key + "' has malformed value '" +
                      text + "'");
  return v;
}

std::vector<std::string> words(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    // Lists may be written space- or comma-separated.
    std::size_t start = 0;
    while (start <= w.size()) {
      auto comma = w.find(',', start);
      auto piece = w.substr(start, comma == std::string::npos
                                       ? std::string::npos
                                       : comma - start);
      if (!piece.empty())
        out.push_back(piece);
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
  }
  return out;
}

} // namespace

double KeyValueFile::get_double(const std::string &key) const {
  return parse_number<double>(get(key), key, origin_);
}

std::int64_t KeyValueFile::get_int(const std::string &key) const {
  return parse_number<std::int64_t>(get(key), key, origin_);
}

std::size_t KeyValueFile::get_size(const std::string &key) const {
  return parse_number<std::size_t>(get(key), key, origin_);
}

bool KeyValueFile::get_bool(const std::string &key) const {
  const auto &v = get(key);
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigError(origin_ + ": key '" + key + "' expects a boolean, got '" +
                    v + "'");
}

std::vector<double> KeyValueFile::get_doubles(const std::string &key) const {
  std::vector<double> out;
  for (const auto &w : words(get(key)))
    out.push_back(parse_number<double>(w, key, origin_));
  return out;
}

std::vector<std::size_t> KeyValueFile::get_sizes(const std::string &key) const {
  std::vector<std::size_t> out;
  for (const auto &w : words(get(key)))
    out.push_back(parse_number<std::size_t>(w, key, origin_));
  return out;
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto &[k, v] : entries_)
    out += k + " = " + v + "\n";
  return out;
}

KeyValueFile KeyValueFile::parse(const std::string &text,
                                 const std::string &origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void KeyValueFile::write(const std::string &path) const {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write '" + path + "'");
  out << to_string();
}

} // namespace thingp
