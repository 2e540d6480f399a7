#pragma once

#include <iosfwd>

namespace sqvdlm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
/// compare finished but at least one model or artifact failed.
inline constexpr int kExitPartial = 3;

/// Entry point of the `sqvdlm` tool: ingest, fit, compare, simulate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sqvdlm::cli
