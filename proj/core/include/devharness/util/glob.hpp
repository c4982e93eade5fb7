#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace devharness::util {

// Workspace-relative glob matching for write masks and partition filters.
//   *   any run of characters within one path segment
//   ?   one character within a segment
//   **  zero or more whole segments
// Paths and patterns use '/' separators and are matched fully.
bool glob_match(std::string_view pattern, std::string_view path);

bool matches_any(const std::vector<std::string>& patterns, std::string_view path);

// True when the pattern contains no wildcard characters.
bool is_literal_pattern(std::string_view pattern);

}  // namespace devharness::util
