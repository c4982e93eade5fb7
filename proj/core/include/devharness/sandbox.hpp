#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "devharness/sandbox_spec.hpp"

namespace devharness {

enum class SandboxState { building, ready, torn_down };

struct ExecResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds duration{0};
  // A masked path was written and rolled back (fallback enforcement
  // only; namespace enforcement fails the write inside the sandbox).
  bool mask_violation = false;
  std::vector<std::string> violated_paths;
};

struct ExecOptions {
  std::optional<std::chrono::milliseconds> timeout;
  std::optional<bool> allow_network;  // overrides the spec policy for this call
  std::vector<std::string> extra_env;
};

class SandboxManager;

// One isolated workspace. Confine a handle to one worker at a time;
// exec calls on the same handle are serialized internally.
class Sandbox {
 public:
  const std::string& id() const { return id_; }
  const std::filesystem::path& workspace() const { return workspace_; }
  SandboxState state() const { return state_; }
  const SandboxSpec& spec() const { return spec_; }

  // Scratch area visible both to the harness and inside the sandbox.
  const std::filesystem::path& exchange_dir() const { return exchange_; }
  // Path at which the workspace appears inside an isolated command.
  std::filesystem::path mounted_workspace() const;

  ExecResult exec(const std::string& command, const ExecOptions& opts = {});

  // Replaces the active mask. Patterns are workspace-relative globs; a
  // literal directory pattern masks its whole subtree. Unmatched
  // patterns produce warnings, invalid ones raise MaskUnenforceable.
  void apply_write_mask(std::vector<std::string> patterns);
  const std::vector<std::string>& write_mask() const { return mask_patterns_; }
  bool path_masked(const std::string& rel_path) const;

  const std::vector<std::string>& warnings() const { return warnings_; }

  void tear_down();

 private:
  friend class SandboxManager;
  Sandbox() = default;

  std::vector<std::filesystem::path> resolve_mask_mounts() const;
  std::map<std::string, std::string> masked_hashes() const;

  std::string id_;
  std::filesystem::path workspace_;   // <root>/boxes/<id>
  std::filesystem::path exchange_;    // <root>/exchange/<id>
  std::filesystem::path shadow_;      // mask snapshots for fallback restore
  SandboxSpec spec_;
  SandboxState state_ = SandboxState::building;
  std::vector<std::string> mask_patterns_;
  std::vector<std::string> warnings_;
  bool warned_offline_ = false;
  SandboxManager* manager_ = nullptr;
  std::mutex exec_mutex_;
};

using SandboxPtr = std::shared_ptr<Sandbox>;

// Owns the on-disk layout <root>/{boxes,mnt,exchange,shadow} and hands
// out handles. Safe to call from concurrent workers.
class SandboxManager {
 public:
  // force_fallback disables namespace isolation (used to exercise the
  // unprivileged code path).
  explicit SandboxManager(std::filesystem::path root, bool force_fallback = false);

  // Extracts the optional project archive, runs setup commands in
  // order (network up only under install_only), returns a ready handle.
  SandboxPtr build_environment(const SandboxSpec& spec,
                               const std::optional<std::filesystem::path>& project_tree_archive);

  bool namespace_isolation() const { return namespace_mode_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  friend class Sandbox;

  std::filesystem::path root_;
  bool namespace_mode_ = false;
  bool privatize_tmp_ = false;
  std::mutex mutex_;
  int next_id_ = 1;
};

}  // namespace devharness
