#include "devharness/prompts.hpp"

#include <cstdlib>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"

namespace devharness {

namespace fs = std::filesystem;

PromptLibrary PromptLibrary::locate(const std::optional<fs::path>& override_root) {
  std::vector<fs::path> candidates;
  if (override_root) candidates.push_back(*override_root);
  if (const char* env = std::getenv("DEVHARNESS_ASSETS")) candidates.emplace_back(env);
  candidates.emplace_back("assets");
  candidates.emplace_back("../assets");
#ifdef DEVHARNESS_SOURCE_ASSETS
  candidates.emplace_back(DEVHARNESS_SOURCE_ASSETS);
#endif
  for (const auto& c : candidates) {
    if (fs::exists(c / "prompts")) return PromptLibrary(fs::absolute(c));
  }
  raise(errc::io_error,
        "cannot locate the assets directory; set DEVHARNESS_ASSETS or pass --assets");
}

PromptLibrary::PromptLibrary(fs::path assets_root) : root_(std::move(assets_root)) {}

std::string PromptLibrary::prompt(const std::string& name) const {
  return util::read_file(root_ / "prompts" / (name + ".txt"));
}

fs::path PromptLibrary::asset_path(const std::string& relative) const { return root_ / relative; }

}  // namespace devharness
