#include "devharness/util/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/mount.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"

namespace devharness::util {

namespace {

// Child-side setup between fork and exec: async-signal-safe calls only.
struct ChildPlan {
  const ProcessOptions* opts;
  int status_fd;  // CLOEXEC pipe; any write means setup failed
  int out_fd;
  int err_fd;
};

void child_fail(int status_fd, const char* stage) {
  char buf[256];
  int err = errno;
  size_t n = 0;
  auto append = [&](const char* s) {
    while (*s && n < sizeof(buf) - 1) buf[n++] = *s++;
  };
  append(stage);
  append(": ");
  append(std::strerror(err));
  ssize_t ignored = write(status_fd, buf, n);
  (void)ignored;
  _exit(127);
}

int remount_readonly(const char* path) {
  if (mount(path, path, nullptr, MS_BIND, nullptr) != 0) return -1;
  unsigned long flags = MS_REMOUNT | MS_BIND | MS_RDONLY;
  if (mount(nullptr, path, nullptr, flags, nullptr) == 0) return 0;
  // Some kernels require the inherited vfs flags to be repeated.
  return mount(nullptr, path, nullptr, flags | MS_NOSUID | MS_NODEV, nullptr);
}

[[noreturn]] void run_child(const std::string& command, const ChildPlan& plan) {
  const ProcessOptions& o = *plan.opts;
  setpgid(0, 0);

  if (dup2(plan.out_fd, STDOUT_FILENO) < 0) child_fail(plan.status_fd, "dup2 stdout");
  if (dup2(plan.err_fd, STDERR_FILENO) < 0) child_fail(plan.status_fd, "dup2 stderr");
  int devnull = open("/dev/null", O_RDONLY);
  if (devnull >= 0) dup2(devnull, STDIN_FILENO);

  int unshare_flags = 0;
  if (o.new_mount_ns) unshare_flags |= CLONE_NEWNS;
  if (o.new_net_ns) unshare_flags |= CLONE_NEWNET;
  if (unshare_flags != 0 && unshare(unshare_flags) != 0) child_fail(plan.status_fd, "unshare");

  if (o.new_mount_ns) {
    // Keep every mount change private to this namespace.
    if (mount(nullptr, "/", nullptr, MS_REC | MS_PRIVATE, nullptr) != 0)
      child_fail(plan.status_fd, "mount private /");
    for (const auto& [src, dst] : o.bind_mounts) {
      if (mount(src.c_str(), dst.c_str(), nullptr, MS_BIND | MS_REC, nullptr) != 0)
        child_fail(plan.status_fd, "bind mount");
    }
    for (const auto& path : o.tmpfs_overlays) {
      if (mount("tmpfs", path.c_str(), "tmpfs", 0, "mode=1777") != 0)
        child_fail(plan.status_fd, "tmpfs overlay");
    }
    for (const auto& path : o.readonly_binds) {
      if (remount_readonly(path.c_str()) != 0) child_fail(plan.status_fd, "readonly bind");
    }
  }

  auto apply_limit = [&](int resource, long value) {
    rlimit lim{static_cast<rlim_t>(value), static_cast<rlim_t>(value)};
    if (setrlimit(resource, &lim) != 0) child_fail(plan.status_fd, "setrlimit");
  };
  if (o.cpu_seconds) apply_limit(RLIMIT_CPU, *o.cpu_seconds);
  if (o.memory_mb) apply_limit(RLIMIT_AS, *o.memory_mb * 1024 * 1024);
  if (o.file_size_mb) apply_limit(RLIMIT_FSIZE, *o.file_size_mb * 1024 * 1024);

  if (!o.cwd.empty() && chdir(o.cwd.c_str()) != 0) child_fail(plan.status_fd, "chdir");

  std::vector<std::string> env_store = o.env;
  if (env_store.empty()) {
    env_store = {"PATH=/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin", "HOME=/tmp",
                 "LANG=C.UTF-8"};
  }
  std::vector<char*> envp;
  envp.reserve(env_store.size() + 1);
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);

  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  execve("/bin/sh", const_cast<char* const*>(argv), envp.data());
  child_fail(plan.status_fd, "execve");
  _exit(127);
}

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (pipe(fds) != 0) raise(errc::io_error, "pipe creation failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) close(fds[1]);
    fds[1] = -1;
  }
};

void drain(int fd, std::string& sink, bool& truncated, size_t cap) {
  char buf[8192];
  for (;;) {
    ssize_t n = read(fd, buf, sizeof(buf));
    if (n <= 0) break;
    if (sink.size() < cap) {
      size_t keep = std::min(static_cast<size_t>(n), cap - sink.size());
      sink.append(buf, keep);
      if (keep < static_cast<size_t>(n)) truncated = true;
    } else {
      truncated = true;
    }
  }
}

}  // namespace

ProcessResult run_process(const std::string& command, const ProcessOptions& opts) {
  ProcessResult result;
  Pipe out_pipe, err_pipe, status_pipe;
  fcntl(status_pipe.fds[1], F_SETFD, FD_CLOEXEC);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) raise(errc::io_error, "fork failed");

  if (pid == 0) {
    out_pipe.close_read();
    err_pipe.close_read();
    status_pipe.close_read();
    ChildPlan plan{&opts, status_pipe.fds[1], out_pipe.fds[1], err_pipe.fds[1]};
    run_child(command, plan);
  }

  out_pipe.close_write();
  err_pipe.close_write();
  status_pipe.close_write();
  fcntl(out_pipe.fds[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe.fds[0], F_SETFL, O_NONBLOCK);

  auto deadline = start + opts.timeout;
  bool killed = false;
  bool exited = false;
  int wait_status = 0;

  pollfd fds[2] = {{out_pipe.fds[0], POLLIN, 0}, {err_pipe.fds[0], POLLIN, 0}};
  int open_streams = 2;

  while (open_streams > 0 || !exited) {
    if (!exited) {
      pid_t w = waitpid(pid, &wait_status, WNOHANG);
      if (w == pid) exited = true;
    }
    if (!exited && !killed && std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    if (open_streams > 0) {
      int timeout_ms = 50;
      int rc = poll(fds, 2, timeout_ms);
      if (rc > 0) {
        for (auto& p : fds) {
          if (p.fd < 0) continue;
          if (p.revents & (POLLIN | POLLHUP | POLLERR)) {
            bool is_out = (p.fd == out_pipe.fds[0]);
            std::string& sink = is_out ? result.out : result.err;
            bool& trunc = is_out ? result.out_truncated : result.err_truncated;
            char buf[8192];
            ssize_t n;
            bool closed = false;
            while ((n = read(p.fd, buf, sizeof(buf))) != 0) {
              if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK) break;
                closed = true;
                break;
              }
              if (sink.size() < opts.max_capture_bytes) {
                size_t keep = std::min(static_cast<size_t>(n), opts.max_capture_bytes - sink.size());
                sink.append(buf, keep);
                if (keep < static_cast<size_t>(n)) trunc = true;
              } else {
                trunc = true;
              }
            }
            if (n == 0) closed = true;
            if (closed) {
              p.fd = -1;
              --open_streams;
            }
          }
        }
      }
    } else if (!exited) {
      // Streams closed but child still running (e.g. daemonized grandchild
      // holding nothing): just wait out the deadline loop.
      usleep(10000);
    }
  }

  // Reap any stragglers in the process group.
  kill(-pid, SIGKILL);

  // Final non-blocking drain after exit.
  fcntl(out_pipe.fds[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe.fds[0], F_SETFL, O_NONBLOCK);
  drain(out_pipe.fds[0], result.out, result.out_truncated, opts.max_capture_bytes);
  drain(err_pipe.fds[0], result.err, result.err_truncated, opts.max_capture_bytes);

  char status_buf[256];
  ssize_t sn = read(status_pipe.fds[0], status_buf, sizeof(status_buf) - 1);
  if (sn > 0) result.setup_error.assign(status_buf, static_cast<size_t>(sn));

  if (WIFEXITED(wait_status)) result.exit_code = WEXITSTATUS(wait_status);
  else if (WIFSIGNALED(wait_status)) result.exit_code = -WTERMSIG(wait_status);

  result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return result;
}

bool mount_namespaces_supported() {
  static std::once_flag flag;
  static bool supported = false;
  std::call_once(flag, [] {
    auto dir = make_temp_dir("devharness-nsprobe");
    write_file(dir / "probe.txt", "x");
    ProcessOptions opts;
    opts.new_mount_ns = true;
    opts.readonly_binds = {dir};
    opts.cwd = dir;
    opts.timeout = std::chrono::milliseconds(10000);
    auto res = run_process("echo y > probe.txt", opts);
    supported = res.setup_error.empty() && res.exit_code != 0 &&
                read_file(dir / "probe.txt") == "x";
    remove_tree(dir);
  });
  return supported;
}

}  // namespace devharness::util
