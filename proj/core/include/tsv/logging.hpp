#pragma once

#include <string_view>

namespace tsv {

/// Sets the global log level from TSV_LOG (error, info or debug; default info).
/// Returns false when the variable holds an unknown value.
bool init_logging_from_env();

/// Same, from an explicit level name.
bool set_log_level(std::string_view level);

}  // namespace tsv
