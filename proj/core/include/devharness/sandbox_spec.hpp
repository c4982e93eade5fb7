#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace devharness {

enum class NetworkPolicy { offline, install_only };

const char* to_string(NetworkPolicy policy);
NetworkPolicy network_policy_from_string(const std::string& s);

struct ResourceLimits {
  std::optional<long> cpu_seconds;
  std::optional<long> memory_mb;
  std::optional<long> disk_mb;

  bool operator==(const ResourceLimits&) const = default;
};

// Recipe for one instance's execution environment (sandbox.json).
struct SandboxSpec {
  std::string base_image;                    // pinned environment label
  std::vector<std::string> setup_commands;   // dependency installation, in order
  NetworkPolicy network_policy = NetworkPolicy::offline;
  ResourceLimits limits;
  std::chrono::milliseconds command_timeout{300000};

  bool operator==(const SandboxSpec&) const = default;
};

nlohmann::json to_json(const SandboxSpec& spec);
SandboxSpec sandbox_spec_from_json(const nlohmann::json& j);

}  // namespace devharness
