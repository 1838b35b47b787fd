#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace claimmatch {

// FNV-1a, used for OOV hashing buckets and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

std::string read_file(const std::string& path);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_file(const std::string& path, const std::string& content);

std::vector<std::string> split_tabs(std::string_view line);

std::string_view trim(std::string_view s);

// Deterministic formatting for scores in output files.
std::string format_double(double v);

}  // namespace claimmatch
