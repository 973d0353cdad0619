#include "gpr/tensor/log.hpp"

#include <iostream>
#include <mutex>

namespace gpr {

namespace {

std::mutex g_mutex;
LogLevel g_level = LogLevel::kWarning;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug:
      return "debug";
    case LogLevel::kInfo:
      return "info";
    case LogLevel::kWarning:
      return "warning";
    case LogLevel::kError:
      return "error";
  }
  return "?";
}

LogSink& sink() {
  static LogSink s = [](LogLevel level, std::string_view message) {
    std::cerr << level_name(level) << ": " << message << '\n';
  };
  return s;
}

}  // namespace

LogSink set_log_sink(LogSink next) {
  std::lock_guard lock(g_mutex);
  LogSink previous = std::move(sink());
  sink() = std::move(next);
  return previous;
}

void set_log_level(LogLevel level) {
  std::lock_guard lock(g_mutex);
  g_level = level;
}

void log(LogLevel level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (level < g_level || !sink()) return;
  sink()(level, message);
}

}  // namespace gpr
