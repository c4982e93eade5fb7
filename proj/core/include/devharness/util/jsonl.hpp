#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

namespace devharness::util {

// Appends one object per line, flushing after each write.
void jsonl_append(const std::filesystem::path& path, const nlohmann::json& obj);

// Loads every complete line; a truncated final line (crash artifact) is
// dropped silently. Malformed interior lines raise.
std::vector<nlohmann::json> jsonl_load(const std::filesystem::path& path);

}  // namespace devharness::util
