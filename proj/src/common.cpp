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
#include "thingp/common.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>

namespace thingp {
namespace log {
namespace {

std::mutex &sink_mutex() {
  static std::mutex m;
  return m;
}

Sink &current_sink() {
  static Sink sink = [](std::string_view level, std::string_view msg) {
    std::cerr << "[thingp " << level << "] " << msg << '\n';
  };
  return sink;
}

void emit(std::string_view level, std::string_view msg) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink())
    current_sink()(level, msg);
}

} // namespace

Sink set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void warn(std::string_view msg) { emit("warning", msg); }
void info(std::string_view msg) { emit("info", msg); }

Capture::Capture() {
  previous_ = set_sink([this](std::string_view level, std::string_view msg) {
    if (level == "warning")
      warnings_.emplace_back(msg);
  });
}

Capture::~Capture() { set_sink(std::move(previous_)); }

bool Capture::contains(std::string_view needle) const {
  return std::any_of(warnings_.begin(), warnings_.end(),
                     [&](const std::string &w) {
                       return w.find(needle) != std::string::npos;
                     });
}

} // namespace log

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index) {
  // splitmix64 finalizer over (root, stream hash, index)
  std::uint64_t z = root ^ fnv1a(stream) ^ (index * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace thingp
