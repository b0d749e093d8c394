#pragma once

#include <cstdint>
#include <iosfwd>

namespace mobility::cli {

/// Master seed used when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 20140301;

/// Exit codes: 0 success, 1 computation failure, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mobility::cli
