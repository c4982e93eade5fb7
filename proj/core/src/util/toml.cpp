#include "devharness/util/toml.hpp"

#include <cctype>
#include <charconv>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"

namespace devharness::util {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

nlohmann::json parse_scalar(std::string_view raw, int line_no) {
  raw = trim(raw);
  if (raw.empty()) raise(errc::invalid_argument, "toml: empty value at line " + std::to_string(line_no));
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      raise(errc::invalid_argument, "toml: unterminated string at line " + std::to_string(line_no));
    std::string out;
    for (size_t i = 1; i + 1 < raw.size(); ++i) {
      char c = raw[i];
      if (c == '\\' && i + 2 < raw.size() + 1) {
        char next = raw[++i];
        switch (next) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: out += next; break;
        }
      } else {
        out += c;
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  std::string s(raw);
  if (s.find_first_of(".eE") != std::string::npos && s.find_first_not_of("+-0123456789.eE") == std::string::npos) {
    try {
      return std::stod(s);
    } catch (...) {
    }
  }
  std::int64_t iv = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
  if (ec == std::errc() && ptr == s.data() + s.size()) return iv;
  raise(errc::invalid_argument, "toml: cannot parse value '" + s + "' at line " + std::to_string(line_no));
}

nlohmann::json parse_value(std::string_view raw, int line_no) {
  raw = trim(raw);
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']')
      raise(errc::invalid_argument, "toml: unterminated array at line " + std::to_string(line_no));
    nlohmann::json arr = nlohmann::json::array();
    std::string_view body = raw.substr(1, raw.size() - 2);
    size_t start = 0;
    bool in_string = false;
    for (size_t i = 0; i <= body.size(); ++i) {
      bool at_end = i == body.size();
      char c = at_end ? ',' : body[i];
      if (!at_end && c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
      if (c == ',' && !in_string) {
        auto piece = trim(body.substr(start, i - start));
        if (!piece.empty()) arr.push_back(parse_scalar(piece, line_no));
        start = i + 1;
      }
    }
    return arr;
  }
  return parse_scalar(raw, line_no);
}

nlohmann::json* descend(nlohmann::json& root, std::string_view dotted, int line_no) {
  nlohmann::json* node = &root;
  size_t start = 0;
  while (start <= dotted.size()) {
    size_t dot = dotted.find('.', start);
    std::string key(trim(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start)));
    if (key.empty())
      raise(errc::invalid_argument, "toml: empty table key at line " + std::to_string(line_no));
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      raise(errc::invalid_argument, "toml: key collision at line " + std::to_string(line_no));
    if (node->is_null()) *node = nlohmann::json::object();
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

}  // namespace

nlohmann::json toml_parse(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        raise(errc::invalid_argument, "toml: malformed table header at line " + std::to_string(line_no));
      current = descend(root, line.substr(1, line.size() - 2), line_no);
      continue;
    }
    size_t eq = std::string_view::npos;
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '=' && !in_string) {
        eq = i;
        break;
      }
    }
    if (eq == std::string_view::npos)
      raise(errc::invalid_argument, "toml: expected key = value at line " + std::to_string(line_no));
    std::string key(trim(line.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    (*current)[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

nlohmann::json toml_parse_file(const std::filesystem::path& path) {
  return toml_parse(read_file(path));
}

}  // namespace devharness::util
