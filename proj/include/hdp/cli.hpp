#pragma once

#include <iosfwd>

namespace hdp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Command-line entry point:
///   fit --config <file>
///   generate (--scenario <name> | --config <file>) --out <path>
///   validate [--grid quick|full]
/// Returns 0 on success, 1 on a failed validation or runtime failure, 2 on
/// usage or input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hdp
