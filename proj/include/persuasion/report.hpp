#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace persuasion {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed-precision, locale-independent float formatting for report files.
std::string fmt(double value, int precision = 6);

/// FNV-1a 64-bit hash of a string.
std::uint64_t fnv1a64(const std::string& data);

/// Hex FNV-1a digest of a file's bytes; throws DataError when unreadable.
std::string file_digest(const std::string& path);

/// Run manifest: tool version, subcommand, sorted config echo, input
/// digests. Deliberately timestamp-free so identical runs are byte-identical.
void write_manifest(std::ostream& out, const std::string& subcommand,
                    std::vector<std::pair<std::string, std::string>> config,
                    const std::vector<std::pair<std::string, std::string>>& inputs);

}  // namespace persuasion
