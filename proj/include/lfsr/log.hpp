#pragma once

#include <sstream>
#include <string>

namespace lfsr {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, quiet = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, const std::string& text);

template <class... Args>
void log(LogLevel level, const Args&... args) {
  if (level < log_level()) return;
  std::ostringstream os;
  (os << ... << args);
  log_message(level, os.str());
}

template <class... Args>
void log_info(const Args&... args) { log(LogLevel::info, args...); }

template <class... Args>
void log_warn(const Args&... args) { log(LogLevel::warn, args...); }

template <class... Args>
void log_debug(const Args&... args) { log(LogLevel::debug, args...); }

}  // namespace lfsr
