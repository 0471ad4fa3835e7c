// Command-line front end. Subcommands: simulate, compare, crlb, fisher-clt,
// regimes, rates. Exit codes: 0 ok, 2 usage/config, 3 ordering violation,
// 4 numeric failure.
#pragma once

#include <string>
#include <vector>

namespace gfl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitNumeric = 4;

inline constexpr const char *kToolVersion = "0.1.0";

int run(int argc, const char *const *argv);
/// Convenience for in-process callers; args excludes the program name.
int run(const std::vector<std::string> &args);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string &bytes);

} // namespace gfl::cli
