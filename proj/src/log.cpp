// SPDX-License-Identifier: Apache-2.0
#include "sew/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace sew::log {
namespace {

Level from_env() {
  const char* env = std::getenv("SEW_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string_view v(env);
  if (v == "error") return Level::kError;
  if (v == "info") return Level::kInfo;
  if (v == "debug") return Level::kDebug;
  return Level::kWarn;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> slot{static_cast<int>(from_env())};
  return slot;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

Level threshold() { return static_cast<Level>(level_slot().load(std::memory_order_relaxed)); }

void set_threshold(Level level) { level_slot().store(static_cast<int>(level)); }

void write(Level level, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[sew " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace sew::log
