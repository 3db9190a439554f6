#include "wildannot/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace wildannot {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kWarning};
std::mutex g_mutex;

void emit(const char* tag, const std::string& message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[wildannot] " << tag << message << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_info(const std::string& message) {
  if (g_level >= LogLevel::kInfo) emit("", message);
}

void log_warning(const std::string& message) {
  if (g_level >= LogLevel::kWarning) emit("warning: ", message);
}

}  // namespace wildannot
