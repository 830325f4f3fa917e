#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace structmor {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity is controlled by the STRUCTMOR_LOG environment variable
/// ("info" or "debug"; anything else is quiet).
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("STRUCTMOR_LOG");
    if (env == nullptr) return LogLevel::Quiet;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Quiet;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[structmor] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[structmor:debug] " << msg << "\n";
}

}  // namespace structmor
