#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace devharness::util {

struct ProcessOptions {
  std::filesystem::path cwd;
  std::vector<std::string> env;  // "KEY=VALUE" entries; empty keeps a minimal default
  std::chrono::milliseconds timeout{std::chrono::milliseconds(300000)};

  // Linux namespace isolation. Requires privileges; probe with
  // mount_namespaces_supported() before relying on it.
  bool new_mount_ns = false;
  bool new_net_ns = false;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> bind_mounts;  // src -> dst, rw
  std::vector<std::filesystem::path> readonly_binds;  // remounted read-only over themselves
  std::vector<std::filesystem::path> tmpfs_overlays;

  std::optional<long> cpu_seconds;
  std::optional<long> memory_mb;
  std::optional<long> file_size_mb;

  size_t max_capture_bytes = 4u << 20;
};

struct ProcessResult {
  int exit_code = -1;  // negative signal number when signal-killed
  bool timed_out = false;
  std::string out;
  std::string err;
  bool out_truncated = false;
  bool err_truncated = false;
  std::chrono::milliseconds duration{0};
  std::string setup_error;  // namespace/mount failure before exec
};

// Runs `/bin/sh -c command` in its own process group.
ProcessResult run_process(const std::string& command, const ProcessOptions& opts);

// One-time probe: can this process create mount namespaces with
// read-only bind remounts?
bool mount_namespaces_supported();

}  // namespace devharness::util
