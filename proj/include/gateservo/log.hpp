#pragma once

#include <cstdio>
#include <utility>

namespace gateservo::log {

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

/// Active level, read once from GATESERVO_LOG (error|info|debug; default info).
Level level();

template <typename... Args>
void emit(Level lvl, const char* fmt, Args&&... args) {
  if (lvl > level()) return;
  const char* tag = lvl == Level::kError ? "error"
                    : lvl == Level::kInfo ? "info"
                                          : "debug";
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, std::forward<Args>(args)...);
  std::fputc('\n', stderr);
}

template <typename... Args>
void error(const char* fmt, Args&&... args) {
  emit(Level::kError, fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void info(const char* fmt, Args&&... args) {
  emit(Level::kInfo, fmt, std::forward<Args>(args)...);
}
template <typename... Args>
void debug(const char* fmt, Args&&... args) {
  emit(Level::kDebug, fmt, std::forward<Args>(args)...);
}

}  // namespace gateservo::log
