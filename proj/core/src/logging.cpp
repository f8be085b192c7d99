#include "tsv/logging.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>

namespace tsv {

bool set_log_level(std::string_view level) {
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    return false;
  }
  return true;
}

bool init_logging_from_env() {
  const char* env = std::getenv("TSV_LOG");
  if (env == nullptr || *env == '\0') return set_log_level("info");
  const bool ok = set_log_level(env);
  if (!ok) spdlog::warn("ignoring unknown TSV_LOG value '{}'", env);
  return ok;
}

}  // namespace tsv
