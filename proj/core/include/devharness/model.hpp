#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "devharness/sandbox_spec.hpp"
#include "json.hpp"

namespace devharness {

enum class ReviewState { draft, human_reviewed };

// Phase that created a workspace file. Partitions the file set: every
// path carries exactly one origin.
enum class FileOrigin { development, migration, preexisting };

const char* to_string(ReviewState state);
const char* to_string(FileOrigin origin);
FileOrigin file_origin_from_string(const std::string& s);
ReviewState review_state_from_string(const std::string& s);

struct RequirementItem {
  int id = 0;
  std::string text;
  std::vector<std::string> tags;

  bool operator==(const RequirementItem&) const = default;
};

struct RequirementDocument {
  std::string title;
  std::vector<RequirementItem> items;
  std::string source_readme_digest;  // sha256 hex of the source README
  ReviewState review_state = ReviewState::draft;

  bool operator==(const RequirementDocument&) const = default;
};

// Parses the fixed markdown template: a title heading, an optional
// digest comment, and numbered list items under a "Requirements"
// heading. Item ids are assigned densely 1..n in document order.
RequirementDocument parse_requirement_document(std::string_view markdown);
std::string serialize_requirement_document(const RequirementDocument& doc);

struct ReferenceStats {
  std::int64_t file_count = 0;
  std::int64_t loc = 0;
  std::int64_t test_count = 0;

  bool operator==(const ReferenceStats&) const = default;
};

struct TaskInstance {
  std::string id;
  std::string origin_name;     // registry project name
  std::string origin_version;  // registry version
  std::string quarter;         // YYYYQ[1-4]
  RequirementDocument requirements;
  SandboxSpec sandbox_spec;
  // Withheld reference bundle: original source tree and test suite.
  std::filesystem::path reference_source_archive;
  std::filesystem::path reference_tests_archive;
  ReferenceStats stats;
};

struct ValidationFinding {
  std::string check;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool publishable = false;

  const ValidationFinding* find(std::string_view check) const;
};

// Findings are data, not failures: never throws.
ValidationReport validate_task_instance(const TaskInstance& instance);

struct ManifestEntry {
  std::string hash;  // sha256 hex of content
  std::uint64_t size = 0;
  FileOrigin created_by = FileOrigin::development;

  bool operator==(const ManifestEntry&) const = default;
};

struct WorkspaceManifest {
  std::map<std::string, ManifestEntry> entries;  // normalized relative path

  bool operator==(const WorkspaceManifest&) const = default;

  std::vector<std::string> paths() const;
  std::vector<std::string> paths_with_origin(FileOrigin origin) const;
  bool contains(const std::string& path) const { return entries.count(path) > 0; }
};

// Hashes every regular file under root. Files present in `previous`
// keep their origin label; new files get `new_file_origin`.
WorkspaceManifest snapshot_workspace(const std::filesystem::path& root,
                                     const WorkspaceManifest* previous,
                                     FileOrigin new_file_origin);

nlohmann::json to_json(const WorkspaceManifest& manifest);
WorkspaceManifest workspace_manifest_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RequirementDocument& doc);
RequirementDocument requirement_document_from_json(const nlohmann::json& j);

bool is_valid_quarter(std::string_view quarter);
// Calendar quarter (UTC) for an epoch timestamp, e.g. "2024Q1".
std::string quarter_from_millis(std::int64_t epoch_millis);
// Quarter for an ISO date "YYYY-MM-DD..." prefix.
std::string quarter_from_date(std::string_view iso_date);

// True for paths the test-file heuristic classifies as test files:
// a `tests/` path segment, or basename `test_*` / `*_test`.
bool looks_like_test_path(std::string_view rel_path);

}  // namespace devharness
