#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace sobex {

enum class LogLevel { quiet = 0, info = 1, trace = 2 };

namespace detail {
inline LogLevel parse_log_level(const char* s, LogLevel fallback) {
  if (!s) return fallback;
  if (std::strcmp(s, "quiet") == 0) return LogLevel::quiet;
  if (std::strcmp(s, "info") == 0) return LogLevel::info;
  if (std::strcmp(s, "trace") == 0) return LogLevel::trace;
  return fallback;
}
}  // namespace detail

// Level comes from SOBEX_LOG (quiet|info|trace); anything else, or an unset
// variable, means quiet. Read once per process.
inline LogLevel& log_level() {
  static LogLevel level =
      detail::parse_log_level(std::getenv("SOBEX_LOG"), LogLevel::quiet);
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::fprintf(stderr, "[sobex] %s\n", msg.c_str());
}

inline void log_trace(const std::string& msg) {
  if (log_level() >= LogLevel::trace) std::fprintf(stderr, "[sobex] %s\n", msg.c_str());
}

}  // namespace sobex
