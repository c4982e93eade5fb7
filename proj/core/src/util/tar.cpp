#include "devharness/util/tar.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"

namespace devharness::util {

namespace {

constexpr size_t kBlock = 512;

struct Header {
  std::array<char, kBlock> raw{};

  char* field(size_t off) { return raw.data() + off; }
  const char* field(size_t off) const { return raw.data() + off; }

  void set_octal(size_t off, size_t width, unsigned long long value) {
    // Width includes the trailing NUL.
    std::snprintf(field(off), width, "%0*llo", static_cast<int>(width - 1), value);
  }

  unsigned long long get_octal(size_t off, size_t width) const {
    unsigned long long v = 0;
    for (size_t i = 0; i < width; ++i) {
      char c = field(off)[i];
      if (c == '\0' || c == ' ') break;
      if (c < '0' || c > '7') raise(errc::io_error, "bad octal field in tar header");
      v = v * 8 + static_cast<unsigned long long>(c - '0');
    }
    return v;
  }

  void finalize_checksum() {
    std::memset(field(148), ' ', 8);
    unsigned sum = 0;
    for (unsigned char c : raw) sum += c;
    std::snprintf(field(148), 7, "%06o", sum);
    raw[154] = '\0';
    raw[155] = ' ';
  }

  bool checksum_ok() const {
    Header copy = *this;
    std::memset(copy.field(148), ' ', 8);
    unsigned sum = 0;
    for (unsigned char c : copy.raw) sum += c;
    return sum == get_octal(148, 8);
  }

  bool all_zero() const {
    for (char c : raw)
      if (c != 0) return false;
    return true;
  }
};

void set_name(Header& h, const std::string& path) {
  if (path.size() <= 100) {
    std::memcpy(h.field(0), path.data(), path.size());
    return;
  }
  // ustar prefix split at a '/' so that name <= 100 and prefix <= 155.
  for (size_t cut = path.size() - 1; cut > 0; --cut) {
    if (path[cut] != '/') continue;
    std::string prefix = path.substr(0, cut);
    std::string name = path.substr(cut + 1);
    if (prefix.size() <= 155 && name.size() <= 100 && !name.empty()) {
      std::memcpy(h.field(0), name.data(), name.size());
      std::memcpy(h.field(345), prefix.data(), prefix.size());
      return;
    }
  }
  raise(errc::io_error, "path too long for ustar: " + path);
}

std::string get_name(const Header& h) {
  auto c_str = [&](size_t off, size_t width) {
    size_t len = 0;
    while (len < width && h.field(off)[len] != '\0') ++len;
    return std::string(h.field(off), len);
  };
  std::string name = c_str(0, 100);
  std::string prefix = c_str(345, 155);
  if (prefix.empty()) return name;
  return prefix + "/" + name;
}

void write_entry(std::ofstream& out, const std::string& path, const std::string& content) {
  Header h;
  set_name(h, path);
  h.set_octal(100, 8, 0644);
  h.set_octal(108, 8, 0);  // uid
  h.set_octal(116, 8, 0);  // gid
  h.set_octal(124, 12, content.size());
  h.set_octal(136, 12, 0);  // mtime pinned for reproducibility
  *h.field(156) = '0';
  std::memcpy(h.field(257), "ustar", 6);
  std::memcpy(h.field(263), "00", 2);
  h.finalize_checksum();
  out.write(h.raw.data(), kBlock);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  size_t pad = (kBlock - content.size() % kBlock) % kBlock;
  static const std::array<char, kBlock> zeros{};
  out.write(zeros.data(), static_cast<std::streamsize>(pad));
}

}  // namespace

void tar_create(const std::filesystem::path& tree_root, const std::filesystem::path& archive) {
  if (archive.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(archive.parent_path(), ec);
  }
  std::ofstream out(archive, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io_error, "cannot create archive " + archive.string());
  for (const auto& rel : list_files_recursive(tree_root)) {
    write_entry(out, rel, read_file(tree_root / rel));
  }
  static const std::array<char, kBlock> zeros{};
  out.write(zeros.data(), kBlock);
  out.write(zeros.data(), kBlock);
  if (!out) raise(errc::io_error, "short write to archive " + archive.string());
}

namespace {

template <typename OnFile>
void scan_archive(const std::filesystem::path& archive, OnFile&& on_file) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open archive " + archive.string());
  Header h;
  while (in.read(h.raw.data(), kBlock)) {
    if (h.all_zero()) break;
    if (!h.checksum_ok()) raise(errc::io_error, "corrupt tar header in " + archive.string());
    std::string name = get_name(h);
    unsigned long long size = h.get_octal(124, 12);
    char type = *h.field(156);
    std::string content(size, '\0');
    if (size > 0 && !in.read(content.data(), static_cast<std::streamsize>(size)))
      raise(errc::io_error, "truncated tar entry " + name);
    size_t pad = (kBlock - size % kBlock) % kBlock;
    in.ignore(static_cast<std::streamsize>(pad));
    if (type == '0' || type == '\0') on_file(name, content);
    // Directory and other entry types carry no payload we need.
  }
}

}  // namespace

void tar_extract(const std::filesystem::path& archive, const std::filesystem::path& dest_root) {
  std::filesystem::create_directories(dest_root);
  scan_archive(archive, [&](const std::string& name, const std::string& content) {
    std::string rel = normalize_rel_path(name);  // rejects traversal
    write_file(dest_root / rel, content);
  });
}

std::vector<std::string> tar_list(const std::filesystem::path& archive) {
  std::vector<std::string> out;
  scan_archive(archive, [&](const std::string& name, const std::string&) { out.push_back(name); });
  return out;
}

}  // namespace devharness::util
