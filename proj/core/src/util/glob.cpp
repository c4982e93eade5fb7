#include "devharness/util/glob.hpp"

namespace devharness::util {

namespace {

std::vector<std::string_view> split_segments(std::string_view s) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t slash = s.find('/', start);
    if (slash == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

bool segment_match(std::string_view pat, std::string_view text) {
  size_t p = 0, t = 0;
  size_t star = std::string_view::npos, star_t = 0;
  while (t < text.size()) {
    if (p < pat.size() && (pat[p] == text[t] || pat[p] == '?')) {
      ++p;
      ++t;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      star_t = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

bool match_from(const std::vector<std::string_view>& pat, size_t pi,
                const std::vector<std::string_view>& segs, size_t si) {
  if (pi == pat.size()) return si == segs.size();
  if (pat[pi] == "**") {
    for (size_t skip = si; skip <= segs.size(); ++skip) {
      if (match_from(pat, pi + 1, segs, skip)) return true;
    }
    return false;
  }
  if (si == segs.size()) return false;
  if (!segment_match(pat[pi], segs[si])) return false;
  return match_from(pat, pi + 1, segs, si + 1);
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  if (pattern.empty()) return false;
  return match_from(split_segments(pattern), 0, split_segments(path), 0);
}

bool matches_any(const std::vector<std::string>& patterns, std::string_view path) {
  for (const auto& p : patterns) {
    if (glob_match(p, path)) return true;
  }
  return false;
}

bool is_literal_pattern(std::string_view pattern) {
  return pattern.find_first_of("*?") == std::string_view::npos;
}

}  // namespace devharness::util
