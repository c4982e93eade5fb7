#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace devharness::util {

// Hex-encoded SHA-256. Backed by OpenSSL libcrypto.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace devharness::util
