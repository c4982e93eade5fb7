#include "devharness/util/jsonl.hpp"

#include <fstream>

#include "devharness/errors.hpp"

namespace devharness::util {

void jsonl_append(const std::filesystem::path& path, const nlohmann::json& obj) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) raise(errc::io_error, "cannot append to " + path.string());
  out << obj.dump() << '\n';
  out.flush();
  if (!out) raise(errc::io_error, "short append to " + path.string());
}

std::vector<nlohmann::json> jsonl_load(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  bool pending_incomplete = false;
  while (std::getline(in, line)) {
    if (in.eof() && !line.empty()) {
      // Final line without trailing newline: may be a torn write.
      pending_incomplete = true;
    }
    if (line.empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      if (pending_incomplete) break;  // tolerated crash artifact
      raise(errc::io_error, "malformed JSONL line in " + path.string());
    }
    out.push_back(std::move(obj));
  }
  return out;
}

}  // namespace devharness::util
