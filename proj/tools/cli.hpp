#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elastoref::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

/// Runs one command line. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a digest of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace elastoref::cli
