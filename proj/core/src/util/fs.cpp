#include "devharness/util/fs.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include "devharness/errors.hpp"

namespace devharness::util {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::string> try_read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io_error, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) raise(errc::io_error, "short write to " + path.string());
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  fs::rename(tmp, path);
}

bool is_valid_rel_path(const std::string& raw) {
  if (raw.empty()) return false;
  if (raw.front() == '/' || raw.front() == '\\') return false;
  if (raw.size() >= 2 && raw[1] == ':') return false;
  std::string seg;
  std::istringstream ss(raw);
  while (std::getline(ss, seg, '/')) {
    if (seg == "..") return false;
  }
  return true;
}

std::string normalize_rel_path(const std::string& raw) {
  if (!is_valid_rel_path(raw)) raise(errc::invalid_argument, "invalid relative path: " + raw);
  std::string s = raw;
  for (auto& c : s)
    if (c == '\\') c = '/';
  std::vector<std::string> parts;
  std::string seg;
  std::istringstream ss(s);
  while (std::getline(ss, seg, '/')) {
    if (seg.empty() || seg == ".") continue;
    parts.push_back(seg);
  }
  if (parts.empty()) raise(errc::invalid_argument, "empty path: " + raw);
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '/';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> list_files_recursive(const fs::path& root) {
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    out.push_back(normalize_rel_path(fs::relative(it->path(), root).generic_string()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

void remove_tree(const fs::path& root) {
  std::error_code ec;
  fs::remove_all(root, ec);
}

fs::path make_temp_dir(const std::string& prefix) {
  static std::mt19937_64 rng{std::random_device{}()};
  const fs::path base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 64; ++attempt) {
    fs::path candidate = base / (prefix + "-" + std::to_string(rng()));
    std::error_code ec;
    if (fs::create_directories(candidate, ec)) return candidate;
  }
  raise(errc::io_error, "cannot create temp dir with prefix " + prefix);
}

}  // namespace devharness::util
