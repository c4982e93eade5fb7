#pragma once

#include <filesystem>
#include <string_view>

#include "json.hpp"

namespace devharness::util {

// Minimal TOML subset for harness.toml: [section] / [a.b] tables, bare
// keys, strings, integers, floats, booleans, flat arrays, # comments.
// Returns a nested JSON object.
nlohmann::json toml_parse(std::string_view text);
nlohmann::json toml_parse_file(const std::filesystem::path& path);

}  // namespace devharness::util
