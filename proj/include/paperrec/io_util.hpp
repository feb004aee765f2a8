#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace paperrec {

// Writes to "<path>.tmp" and renames over the final name, so an interrupted
// stage never leaves a partial artifact behind. Creates parent directories.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& body);

bool file_exists(const std::string& path);

std::string trim(std::string_view s);

// FNV-1a over a byte sequence; used to fingerprint artifacts against the
// corpus they were built from.
uint64_t fnv1a(std::string_view bytes, uint64_t seed = 14695981039346656037ull);

// Fixed-point score formatting for TSV artifacts (6 decimal places).
std::string format_score(double score);

}  // namespace paperrec
