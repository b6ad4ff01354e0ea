#include "gateservo/log.hpp"

#include <cstdlib>
#include <cstring>

namespace gateservo::log {

Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("GATESERVO_LOG");
    if (env == nullptr) return Level::kInfo;
    if (std::strcmp(env, "error") == 0) return Level::kError;
    if (std::strcmp(env, "debug") == 0) return Level::kDebug;
    return Level::kInfo;
  }();
  return lvl;
}

}  // namespace gateservo::log
