#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace devharness::util {

// Deterministic ustar archives: entries sorted by path, mtime 0, uid/gid 0.
// Identical trees always produce byte-identical archives.
void tar_create(const std::filesystem::path& tree_root, const std::filesystem::path& archive);
void tar_extract(const std::filesystem::path& archive, const std::filesystem::path& dest_root);

// Paths of regular-file entries, in archive order.
std::vector<std::string> tar_list(const std::filesystem::path& archive);

}  // namespace devharness::util
