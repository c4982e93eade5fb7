#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace devharness::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
std::optional<std::string> try_read_file(const fs::path& path);

// Creates parent directories as needed. Writes are whole-file.
void write_file(const fs::path& path, std::string_view content);

// write-to-temp + rename within the target directory.
void write_file_atomic(const fs::path& path, std::string_view content);

// Normalizes a workspace-relative path: forward slashes, no ".",
// no leading "./". Rejects absolute paths and traversal segments.
std::string normalize_rel_path(const std::string& raw);
bool is_valid_rel_path(const std::string& raw);

// All regular files under root, as sorted normalized relative paths.
std::vector<std::string> list_files_recursive(const fs::path& root);

void copy_tree(const fs::path& from, const fs::path& to);
void remove_tree(const fs::path& root);

// Unique directory under the system temp root; caller owns cleanup.
fs::path make_temp_dir(const std::string& prefix);

}  // namespace devharness::util
