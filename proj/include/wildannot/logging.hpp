#pragma once

#include <string>

namespace wildannot {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2 };

// Diagnostics go to stderr, one line per call, serialized across threads.
void set_log_level(LogLevel level);
LogLevel log_level();
void log_info(const std::string& message);
void log_warning(const std::string& message);

}  // namespace wildannot
