#include "devharness/sandbox.hpp"

#include <algorithm>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"
#include "devharness/util/glob.hpp"
#include "devharness/util/hash.hpp"
#include "devharness/util/subprocess.hpp"
#include "devharness/util/tar.hpp"

namespace devharness {

namespace fs = std::filesystem;

namespace {

bool path_is_under(const fs::path& path, const fs::path& maybe_parent) {
  auto p = fs::weakly_canonical(path).generic_string();
  auto parent = fs::weakly_canonical(maybe_parent).generic_string();
  if (parent.back() != '/') parent += '/';
  return p.size() > parent.size() && p.compare(0, parent.size(), parent) == 0;
}

std::vector<std::string> base_env() {
  return {
      "PATH=/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin",
      "HOME=/tmp",
      "LANG=C.UTF-8",
      "PYTHONHASHSEED=0",
      "PYTHONDONTWRITEBYTECODE=1",
      "PYTEST_ADDOPTS=-p no:cacheprovider",
      "SOURCE_DATE_EPOCH=0",
  };
}

}  // namespace

SandboxManager::SandboxManager(fs::path root, bool force_fallback) : root_(std::move(root)) {
  root_ = fs::absolute(root_);
  fs::create_directories(root_ / "boxes");
  fs::create_directories(root_ / "mnt");
  fs::create_directories(root_ / "exchange");
  fs::create_directories(root_ / "shadow");
  namespace_mode_ = !force_fallback && util::mount_namespaces_supported();
  // A manager root inside /tmp cannot also privatize /tmp: the bind
  // would hide the root from the command's own absolute paths.
  privatize_tmp_ = namespace_mode_ && !path_is_under(root_, fs::path("/tmp"));
}

SandboxPtr SandboxManager::build_environment(const SandboxSpec& spec,
                                             const std::optional<fs::path>& project_tree_archive) {
  SandboxPtr box(new Sandbox());
  {
    std::lock_guard lock(mutex_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "sbx-%04d", next_id_++);
    box->id_ = buf;
  }
  box->workspace_ = root_ / "boxes" / box->id_;
  box->exchange_ = root_ / "exchange" / box->id_;
  box->shadow_ = root_ / "shadow" / box->id_;
  box->spec_ = spec;
  box->manager_ = this;
  fs::create_directories(box->workspace_);
  fs::create_directories(box->exchange_);
  fs::create_directories(box->exchange_ / "tmp");
  fs::create_directories(box->shadow_);

  if (project_tree_archive) {
    if (!fs::exists(*project_tree_archive))
      raise(errc::image_unavailable, "project archive missing: " + project_tree_archive->string());
    util::tar_extract(*project_tree_archive, box->workspace_);
  }

  box->state_ = SandboxState::ready;
  for (size_t i = 0; i < spec.setup_commands.size(); ++i) {
    ExecOptions opts;
    opts.allow_network = spec.network_policy == NetworkPolicy::install_only;
    ExecResult result = box->exec(spec.setup_commands[i], opts);
    if (result.exit_code != 0) {
      box->state_ = SandboxState::building;
      raise(errc::build_failed, "setup command " + std::to_string(i + 1) + " (" +
                                    spec.setup_commands[i] + ") exited " +
                                    std::to_string(result.exit_code) + "\nstdout:\n" + result.stdout_text +
                                    "\nstderr:\n" + result.stderr_text);
    }
  }
  return box;
}

fs::path Sandbox::mounted_workspace() const {
  if (manager_ && manager_->namespace_mode_) return manager_->root_ / "mnt";
  return workspace_;
}

void Sandbox::apply_write_mask(std::vector<std::string> patterns) {
  if (state_ != SandboxState::ready) raise(errc::sandbox_lost, "sandbox not ready");
  for (const auto& p : patterns) {
    if (p.empty() || p.front() == '/' || !util::is_valid_rel_path(p == "**" ? "x" : p))
      raise(errc::mask_unenforceable, "invalid mask pattern: '" + p + "'");
  }
  mask_patterns_ = std::move(patterns);

  // Shadow copies back the fallback restore path and the audit hashes.
  util::remove_tree(shadow_);
  fs::create_directories(shadow_);
  bool any_match = false;
  for (const auto& rel : util::list_files_recursive(workspace_)) {
    if (!path_masked(rel)) continue;
    any_match = true;
    util::write_file(shadow_ / rel, util::read_file(workspace_ / rel));
  }
  for (const auto& p : mask_patterns_) {
    bool matched = fs::exists(workspace_ / p);
    if (!matched) {
      for (const auto& rel : util::list_files_recursive(workspace_)) {
        if (util::glob_match(p, rel) || util::glob_match(p + "/**", rel)) {
          matched = true;
          break;
        }
      }
    }
    if (!matched) warnings_.push_back("mask pattern matches nothing: " + p);
  }
  (void)any_match;

  if (manager_ && !manager_->namespace_mode_) {
    // Permission stripping for the unprivileged fallback.
    for (const auto& rel : util::list_files_recursive(workspace_)) {
      fs::permissions(workspace_ / rel,
                      path_masked(rel)
                          ? fs::perms::owner_read | fs::perms::group_read | fs::perms::others_read
                          : fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read,
                      fs::perm_options::replace);
    }
  }
}

bool Sandbox::path_masked(const std::string& rel_path) const {
  for (const auto& p : mask_patterns_) {
    if (util::glob_match(p, rel_path)) return true;
    // A literal directory pattern masks its subtree.
    if (util::is_literal_pattern(p) && util::glob_match(p + "/**", rel_path)) return true;
  }
  return false;
}

std::vector<fs::path> Sandbox::resolve_mask_mounts() const {
  // Prefer whole-directory binds: they also block file creation inside.
  std::vector<fs::path> mounts;
  auto add = [&](const fs::path& rel) {
    fs::path target = mounted_workspace() / rel;
    if (std::find(mounts.begin(), mounts.end(), target) == mounts.end()) mounts.push_back(target);
  };
  for (const auto& p : mask_patterns_) {
    std::string prefix = p;
    const std::string suffix = "/**";
    if (prefix.size() > suffix.size() && prefix.compare(prefix.size() - suffix.size(), suffix.size(), suffix) == 0)
      prefix = prefix.substr(0, prefix.size() - suffix.size());
    if (util::is_literal_pattern(prefix) && fs::exists(workspace_ / prefix)) {
      add(prefix);
      continue;
    }
    for (const auto& rel : util::list_files_recursive(workspace_)) {
      if (util::glob_match(p, rel)) add(rel);
    }
  }
  return mounts;
}

std::map<std::string, std::string> Sandbox::masked_hashes() const {
  std::map<std::string, std::string> hashes;
  for (const auto& rel : util::list_files_recursive(workspace_)) {
    if (path_masked(rel)) hashes[rel] = util::sha256_file_hex(workspace_ / rel);
  }
  return hashes;
}

ExecResult Sandbox::exec(const std::string& command, const ExecOptions& opts) {
  std::lock_guard lock(exec_mutex_);
  if (state_ == SandboxState::torn_down) raise(errc::sandbox_lost, "sandbox torn down");
  if (!fs::exists(workspace_)) raise(errc::sandbox_lost, "workspace vanished: " + workspace_.string());

  const bool ns_mode = manager_ && manager_->namespace_mode_;
  bool network = opts.allow_network.value_or(false);

  util::ProcessOptions popts;
  popts.timeout = opts.timeout.value_or(spec_.command_timeout);
  popts.cpu_seconds = spec_.limits.cpu_seconds;
  popts.memory_mb = spec_.limits.memory_mb;
  popts.file_size_mb = spec_.limits.disk_mb;
  popts.env = base_env();
  for (const auto& e : opts.extra_env) popts.env.push_back(e);

  auto before = masked_hashes();

  if (ns_mode) {
    popts.new_mount_ns = true;
    popts.new_net_ns = !network;
    popts.bind_mounts.emplace_back(workspace_, manager_->root_ / "mnt");
    popts.readonly_binds = resolve_mask_mounts();
    popts.tmpfs_overlays.push_back(manager_->root_ / "boxes");
    if (manager_->privatize_tmp_) {
      popts.bind_mounts.emplace_back(exchange_ / "tmp", "/tmp");
    } else {
      popts.env.push_back("TMPDIR=" + (exchange_ / "tmp").string());
    }
    popts.cwd = manager_->root_ / "mnt";
  } else {
    popts.cwd = workspace_;
    popts.env.push_back("TMPDIR=" + (exchange_ / "tmp").string());
    if (!network && !warned_offline_) {
      warnings_.push_back("offline policy is advisory without namespace isolation");
      warned_offline_ = true;
    }
  }

  util::ProcessResult pres = util::run_process(command, popts);
  if (!pres.setup_error.empty())
    raise(errc::sandbox_lost, "sandbox setup failed: " + pres.setup_error);

  ExecResult result;
  result.exit_code = pres.exit_code;
  result.timed_out = pres.timed_out;
  result.stdout_text = std::move(pres.out);
  result.stderr_text = std::move(pres.err);
  result.duration = pres.duration;

  // Mask soundness check; restores fallback-mode damage.
  if (!mask_patterns_.empty()) {
    auto after = masked_hashes();
    for (const auto& [rel, hash] : before) {
      auto it = after.find(rel);
      if (it == after.end() || it->second != hash) {
        result.mask_violation = true;
        result.violated_paths.push_back(rel);
        util::write_file(workspace_ / rel, util::read_file(shadow_ / rel));
      }
    }
    for (const auto& [rel, hash] : after) {
      if (!before.count(rel)) {  // created inside a masked region
        result.mask_violation = true;
        result.violated_paths.push_back(rel);
        fs::remove(workspace_ / rel);
      }
    }
    if (result.mask_violation && result.exit_code == 0) result.exit_code = 1;
  }
  return result;
}

void Sandbox::tear_down() {
  std::lock_guard lock(exec_mutex_);
  if (state_ == SandboxState::torn_down) return;
  util::remove_tree(workspace_);
  util::remove_tree(exchange_);
  util::remove_tree(shadow_);
  state_ = SandboxState::torn_down;
}

}  // namespace devharness
