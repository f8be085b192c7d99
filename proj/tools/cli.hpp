#pragma once

#include <iosfwd>

namespace tsv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the `tsv` command line. Subcommands: extract, serve, info, validate.
/// Returns 0 on success, 1 on usage errors and 2 on data errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsv::cli
