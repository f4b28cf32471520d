#include "lfsr/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace lfsr {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::warn)};
std::mutex g_mutex;
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_message(LogLevel level, const std::string& text) {
  static const char* names[] = {"debug", "info", "warn", "error", ""};
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[lfsr " << names[static_cast<int>(level)] << "] " << text << '\n';
}

}  // namespace lfsr
