#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace devharness {

// Role prompts and helper scripts are text assets versioned with the
// repo (assets/), not string literals, so experiments stay editable.
class PromptLibrary {
 public:
  static PromptLibrary locate(const std::optional<std::filesystem::path>& override_root = {});

  explicit PromptLibrary(std::filesystem::path assets_root);

  // Contents of assets/prompts/<name>.txt.
  std::string prompt(const std::string& name) const;
  // Absolute path of any asset file, e.g. "pytest_harness.py".
  std::filesystem::path asset_path(const std::string& relative) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace devharness
