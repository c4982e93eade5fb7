#include "devharness/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"
#include "devharness/util/hash.hpp"
#include "devharness/util/tar.hpp"

namespace devharness {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "## Requirements" at any heading level; returns level or 0.
int requirements_heading_level(std::string_view line) {
  size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return 0;
  auto rest = trim(line.substr(hashes));
  return to_lower(rest) == "requirements" ? static_cast<int>(hashes) : 0;
}

int heading_level(std::string_view line) {
  size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return 0;
  if (hashes < line.size() && line[hashes] != ' ') return 0;
  return static_cast<int>(hashes);
}

// "3. text" / "12) text" -> text
std::optional<std::string_view> numbered_item_text(std::string_view line) {
  auto s = trim(line);
  size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i >= s.size()) return std::nullopt;
  if (s[i] != '.' && s[i] != ')') return std::nullopt;
  ++i;
  if (i < s.size() && s[i] != ' ') return std::nullopt;
  return trim(s.substr(i));
}

// Trailing "[a, b]" bracket group becomes the tag list.
void split_tags(std::string& text, std::vector<std::string>& tags) {
  if (text.empty() || text.back() != ']') return;
  size_t open = text.rfind('[');
  if (open == std::string::npos || open == 0) return;
  std::string body = text.substr(open + 1, text.size() - open - 2);
  std::istringstream ss(body);
  std::string piece;
  std::vector<std::string> parsed;
  while (std::getline(ss, piece, ',')) {
    auto t = trim(piece);
    if (t.empty()) return;  // not a tag group
    parsed.emplace_back(t);
  }
  if (parsed.empty()) return;
  tags = std::move(parsed);
  text = std::string(trim(std::string_view(text).substr(0, open)));
}

constexpr std::string_view kDigestPrefix = "<!-- source-readme-digest:";

}  // namespace

const char* to_string(ReviewState state) {
  return state == ReviewState::draft ? "draft" : "human_reviewed";
}

const char* to_string(FileOrigin origin) {
  switch (origin) {
    case FileOrigin::development: return "development";
    case FileOrigin::migration: return "migration";
    case FileOrigin::preexisting: return "preexisting";
  }
  return "development";
}

FileOrigin file_origin_from_string(const std::string& s) {
  if (s == "development") return FileOrigin::development;
  if (s == "migration") return FileOrigin::migration;
  if (s == "preexisting") return FileOrigin::preexisting;
  raise(errc::invalid_argument, "unknown file origin: " + s);
}

ReviewState review_state_from_string(const std::string& s) {
  if (s == "draft") return ReviewState::draft;
  if (s == "human_reviewed") return ReviewState::human_reviewed;
  raise(errc::invalid_argument, "unknown review state: " + s);
}

RequirementDocument parse_requirement_document(std::string_view markdown) {
  if (trim(markdown).empty()) raise(errc::empty_document, "no content");

  RequirementDocument doc;
  std::vector<std::string_view> lines;
  {
    size_t pos = 0;
    while (pos <= markdown.size()) {
      size_t nl = markdown.find('\n', pos);
      if (nl == std::string_view::npos) {
        lines.push_back(markdown.substr(pos));
        break;
      }
      lines.push_back(markdown.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }

  int req_level = 0;
  size_t req_start = lines.size();
  for (size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (doc.title.empty()) {
      int lvl = heading_level(line);
      if (lvl == 1 && requirements_heading_level(line) == 0) doc.title = std::string(trim(line.substr(1)));
    }
    if (doc.source_readme_digest.empty() && line.rfind(kDigestPrefix, 0) == 0) {
      auto rest = trim(line.substr(kDigestPrefix.size()));
      if (rest.size() >= 3 && rest.substr(rest.size() - 3) == "-->")
        doc.source_readme_digest = std::string(trim(rest.substr(0, rest.size() - 3)));
    }
    if (req_level == 0) {
      int lvl = requirements_heading_level(line);
      if (lvl > 0) {
        req_level = lvl;
        req_start = i + 1;
      }
    }
  }
  if (req_level == 0) raise(errc::no_requirements_section, "missing Requirements heading");

  for (size_t i = req_start; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    int lvl = heading_level(line);
    if (lvl > 0 && lvl <= req_level) break;  // section ended
    if (auto text = numbered_item_text(line)) {
      RequirementItem item;
      item.id = static_cast<int>(doc.items.size()) + 1;
      item.text = std::string(*text);
      doc.items.push_back(std::move(item));
    } else if (!line.empty() && !doc.items.empty() && lvl == 0) {
      doc.items.back().text += " ";
      doc.items.back().text += std::string(line);
    }
  }
  if (doc.items.empty()) raise(errc::empty_document, "no numbered requirement items");

  for (auto& item : doc.items) split_tags(item.text, item.tags);
  for (auto& item : doc.items)
    if (trim(item.text).empty()) raise(errc::empty_document, "requirement text empty");

  if (doc.title.empty()) doc.title = "Requirements";
  if (doc.source_readme_digest.empty())
    doc.source_readme_digest = util::sha256_hex(markdown);
  doc.review_state = ReviewState::draft;
  return doc;
}

std::string serialize_requirement_document(const RequirementDocument& doc) {
  std::ostringstream out;
  out << "# " << doc.title << "\n\n";
  out << kDigestPrefix << " " << doc.source_readme_digest << " -->\n\n";
  out << "## Requirements\n\n";
  for (const auto& item : doc.items) {
    out << item.id << ". " << item.text;
    if (!item.tags.empty()) {
      out << " [";
      for (size_t i = 0; i < item.tags.size(); ++i) {
        if (i) out << ", ";
        out << item.tags[i];
      }
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

const ValidationFinding* ValidationReport::find(std::string_view check) const {
  for (const auto& f : findings)
    if (f.check == check) return &f;
  return nullptr;
}

ValidationReport validate_task_instance(const TaskInstance& instance) {
  ValidationReport report;
  auto add = [&](std::string check, bool passed, std::string detail) {
    report.findings.push_back({std::move(check), passed, std::move(detail)});
  };

  add("instance_id", !instance.id.empty(), instance.id.empty() ? "empty id" : "");
  add("quarter_format", is_valid_quarter(instance.quarter),
      is_valid_quarter(instance.quarter) ? "" : "quarter must match YYYYQ[1-4]: " + instance.quarter);
  add("has_requirements", !instance.requirements.items.empty(),
      instance.requirements.items.empty() ? "requirement list is empty" : "");

  bool ids_dense = true;
  for (size_t i = 0; i < instance.requirements.items.size(); ++i) {
    if (instance.requirements.items[i].id != static_cast<int>(i) + 1) ids_dense = false;
  }
  add("requirement_ids_dense", ids_dense, ids_dense ? "" : "ids must be 1..n in order");

  bool texts_ok = std::all_of(instance.requirements.items.begin(), instance.requirements.items.end(),
                              [](const RequirementItem& r) { return !r.text.empty(); });
  add("requirement_texts", texts_ok, texts_ok ? "" : "empty requirement text");

  bool reviewed = instance.requirements.review_state == ReviewState::human_reviewed;
  add("review_state", reviewed, reviewed ? "" : "unreviewed requirements");

  const auto& s = instance.stats;
  bool non_negative = s.file_count >= 0 && s.loc >= 0 && s.test_count >= 0;
  add("stats_non_negative", non_negative, non_negative ? "" : "negative reference stats");

  bool file_floor = s.file_count >= 6;
  add("file_count_floor", file_floor,
      file_floor ? "" : "below file-count floor (" + std::to_string(s.file_count) + " < 6)");

  bool tests_present = s.test_count >= 1;
  if (!instance.reference_tests_archive.empty() &&
      std::filesystem::exists(instance.reference_tests_archive)) {
    tests_present = tests_present && !util::tar_list(instance.reference_tests_archive).empty();
  }
  add("reference_tests_nonempty", tests_present, tests_present ? "" : "reference test suite is empty");

  report.publishable = std::all_of(report.findings.begin(), report.findings.end(),
                                   [](const ValidationFinding& f) { return f.passed; });
  return report;
}

std::vector<std::string> WorkspaceManifest::paths() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& [path, _] : entries) out.push_back(path);
  return out;
}

std::vector<std::string> WorkspaceManifest::paths_with_origin(FileOrigin origin) const {
  std::vector<std::string> out;
  for (const auto& [path, entry] : entries)
    if (entry.created_by == origin) out.push_back(path);
  return out;
}

WorkspaceManifest snapshot_workspace(const std::filesystem::path& root,
                                     const WorkspaceManifest* previous,
                                     FileOrigin new_file_origin) {
  WorkspaceManifest manifest;
  for (const auto& rel : util::list_files_recursive(root)) {
    ManifestEntry entry;
    entry.hash = util::sha256_file_hex(root / rel);
    entry.size = std::filesystem::file_size(root / rel);
    entry.created_by = new_file_origin;
    if (previous) {
      auto it = previous->entries.find(rel);
      if (it != previous->entries.end()) entry.created_by = it->second.created_by;
    }
    manifest.entries.emplace(rel, std::move(entry));
  }
  return manifest;
}

nlohmann::json to_json(const WorkspaceManifest& manifest) {
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [path, entry] : manifest.entries) {
    files[path] = {{"hash", entry.hash}, {"size", entry.size}, {"created_by", to_string(entry.created_by)}};
  }
  return {{"files", files}};
}

WorkspaceManifest workspace_manifest_from_json(const nlohmann::json& j) {
  WorkspaceManifest manifest;
  for (const auto& [path, entry] : j.at("files").items()) {
    manifest.entries[path] = ManifestEntry{
        entry.at("hash").get<std::string>(), entry.at("size").get<std::uint64_t>(),
        file_origin_from_string(entry.at("created_by").get<std::string>())};
  }
  return manifest;
}

nlohmann::json to_json(const RequirementDocument& doc) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : doc.items)
    items.push_back({{"id", item.id}, {"text", item.text}, {"tags", item.tags}});
  return {{"title", doc.title},
          {"items", items},
          {"source_readme_digest", doc.source_readme_digest},
          {"review_state", to_string(doc.review_state)}};
}

RequirementDocument requirement_document_from_json(const nlohmann::json& j) {
  RequirementDocument doc;
  doc.title = j.at("title").get<std::string>();
  for (const auto& item : j.at("items")) {
    doc.items.push_back({item.at("id").get<int>(), item.at("text").get<std::string>(),
                         item.value("tags", std::vector<std::string>{})});
  }
  doc.source_readme_digest = j.value("source_readme_digest", "");
  doc.review_state = review_state_from_string(j.value("review_state", "draft"));
  return doc;
}

bool is_valid_quarter(std::string_view quarter) {
  if (quarter.size() != 6) return false;
  for (size_t i = 0; i < 4; ++i)
    if (!std::isdigit(static_cast<unsigned char>(quarter[i]))) return false;
  return quarter[4] == 'Q' && quarter[5] >= '1' && quarter[5] <= '4';
}

std::string quarter_from_millis(std::int64_t epoch_millis) {
  std::time_t secs = static_cast<std::time_t>(epoch_millis / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  int q = tm.tm_mon / 3 + 1;
  return std::to_string(tm.tm_year + 1900) + "Q" + std::to_string(q);
}

std::string quarter_from_date(std::string_view iso_date) {
  if (iso_date.size() < 7 || iso_date[4] != '-')
    raise(errc::invalid_argument, "expected YYYY-MM-...: " + std::string(iso_date));
  int month = (iso_date[5] - '0') * 10 + (iso_date[6] - '0');
  if (month < 1 || month > 12)
    raise(errc::invalid_argument, "bad month in date: " + std::string(iso_date));
  return std::string(iso_date.substr(0, 4)) + "Q" + std::to_string((month - 1) / 3 + 1);
}

bool looks_like_test_path(std::string_view rel_path) {
  // Any tests/ segment counts.
  std::string path(rel_path);
  size_t start = 0;
  while (start < path.size()) {
    size_t slash = path.find('/', start);
    std::string_view seg(path.data() + start,
                         (slash == std::string::npos ? path.size() : slash) - start);
    bool last = slash == std::string::npos;
    if (!last && (seg == "tests" || seg == "test")) return true;
    if (last) {
      std::string_view base = seg;
      size_t dot = base.rfind('.');
      std::string_view stem = dot == std::string_view::npos ? base : base.substr(0, dot);
      if (stem.rfind("test_", 0) == 0) return true;
      if (stem.size() > 5 && stem.substr(stem.size() - 5) == "_test") return true;
    }
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return false;
}

}  // namespace devharness
