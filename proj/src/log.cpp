#include "ckm/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ckm::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("CKM_LOG");
  if (env == nullptr) return Level::warn;
  if (std::strcmp(env, "error") == 0) return Level::error;
  if (std::strcmp(env, "warn") == 0) return Level::warn;
  if (std::strcmp(env, "info") == 0) return Level::info;
  if (std::strcmp(env, "debug") == 0) return Level::debug;
  return Level::warn;
}

const char* tag(Level lvl) {
  switch (lvl) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    default: return "debug";
  }
}

}  // namespace

Level level() {
  static const Level lvl = parse_level();
  return lvl;
}

void write(Level lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  std::fprintf(stderr, "[ckm %s] %s\n", tag(lvl), msg.c_str());
}

}  // namespace ckm::log
