#include "devharness/sandbox_spec.hpp"

#include "devharness/errors.hpp"

namespace devharness {

const char* to_string(NetworkPolicy policy) {
  return policy == NetworkPolicy::offline ? "offline" : "install_only";
}

NetworkPolicy network_policy_from_string(const std::string& s) {
  if (s == "offline") return NetworkPolicy::offline;
  if (s == "install_only") return NetworkPolicy::install_only;
  raise(errc::invalid_argument, "unknown network policy: " + s);
}

nlohmann::json to_json(const SandboxSpec& spec) {
  nlohmann::json limits = nlohmann::json::object();
  if (spec.limits.cpu_seconds) limits["cpu_seconds"] = *spec.limits.cpu_seconds;
  if (spec.limits.memory_mb) limits["memory_mb"] = *spec.limits.memory_mb;
  if (spec.limits.disk_mb) limits["disk_mb"] = *spec.limits.disk_mb;
  return {{"base_image", spec.base_image},
          {"setup_commands", spec.setup_commands},
          {"network_policy", to_string(spec.network_policy)},
          {"limits", limits},
          {"command_timeout_ms", spec.command_timeout.count()}};
}

SandboxSpec sandbox_spec_from_json(const nlohmann::json& j) {
  SandboxSpec spec;
  spec.base_image = j.value("base_image", "");
  spec.setup_commands = j.value("setup_commands", std::vector<std::string>{});
  spec.network_policy = network_policy_from_string(j.value("network_policy", "offline"));
  if (j.contains("limits")) {
    const auto& l = j["limits"];
    if (l.contains("cpu_seconds")) spec.limits.cpu_seconds = l["cpu_seconds"].get<long>();
    if (l.contains("memory_mb")) spec.limits.memory_mb = l["memory_mb"].get<long>();
    if (l.contains("disk_mb")) spec.limits.disk_mb = l["disk_mb"].get<long>();
  }
  spec.command_timeout = std::chrono::milliseconds(j.value("command_timeout_ms", 300000));
  if (spec.command_timeout.count() <= 0)
    raise(errc::invalid_argument, "sandbox command timeout must be positive");
  return spec;
}

}  // namespace devharness
