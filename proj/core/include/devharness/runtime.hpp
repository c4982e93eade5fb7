#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "devharness/gateway.hpp"
#include "devharness/model.hpp"
#include "devharness/sandbox.hpp"
#include "devharness/util/clock.hpp"

namespace devharness {

enum class AgentRole { single, developer, tester, designer, migrator };

const char* to_string(AgentRole role);
AgentRole agent_role_from_string(const std::string& s);

struct RoleConfig {
  AgentRole role = AgentRole::single;
  std::string system_prompt;
  std::vector<std::string> allowed_tools;  // subset of known_tools()
  std::vector<std::string> write_mask;     // workspace-relative patterns
  int step_budget = 200;
  double temperature = 0.2;

  void validate() const;
};

enum class ToolStatus { ok, denied, failed, timeout };

const char* to_string(ToolStatus status);
ToolStatus tool_status_from_string(const std::string& s);

struct ToolResult {
  ToolStatus status = ToolStatus::ok;
  std::string observation;  // text shown to the model, truncated head+tail
  std::string stdout_excerpt;
  std::string stderr_excerpt;
};

struct ToolCallRecord {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
  ToolResult result;
};

struct StepRecord {
  int index = 0;  // dense from 1
  std::string model_message;
  std::vector<ToolCallRecord> tool_calls;
  UsageRecord usage_delta;
  std::int64_t wall_time_ms = 0;
  std::vector<std::string> files_changed;
};

nlohmann::json to_json(const StepRecord& step);
StepRecord step_record_from_json(const nlohmann::json& j);

enum class AgentOutcome { submitted, budget_exhausted, aborted };

const char* to_string(AgentOutcome outcome);
AgentOutcome agent_outcome_from_string(const std::string& s);

struct AgentTrace {
  std::string role_name;
  std::vector<ChatMessage> seed_context;
  std::vector<StepRecord> steps;
  UsageRecord usage;
  AgentOutcome outcome = AgentOutcome::aborted;
  WorkspaceManifest final_manifest;
};

nlohmann::json trace_summary_to_json(const AgentTrace& trace);

// Tool dispatch policy: allowlist first, then the write mask for
// mutating tools. Denial is a status, not an error.
class ToolDispatcher {
 public:
  ToolDispatcher(SandboxPtr sandbox, RoleConfig role, size_t observation_limit = 16 * 1024);

  ToolResult dispatch(const std::string& name, const nlohmann::json& arguments,
                      std::vector<std::string>* files_changed);

  bool submit_accepted() const { return submit_accepted_; }
  const std::map<std::string, std::string>& protected_baseline() const { return protected_baseline_; }

  static const std::vector<std::string>& known_tools();
  static std::vector<ToolSchema> schemas_for(const std::vector<std::string>& allowed);

 private:
  ToolResult tool_read_file(const nlohmann::json& args);
  ToolResult tool_write_file(const nlohmann::json& args, std::vector<std::string>* files_changed);
  ToolResult tool_edit_range(const nlohmann::json& args, std::vector<std::string>* files_changed);
  ToolResult tool_list_dir(const nlohmann::json& args);
  ToolResult tool_search_text(const nlohmann::json& args);
  ToolResult tool_run_shell(const nlohmann::json& args, std::vector<std::string>* files_changed);
  ToolResult tool_submit();

  std::string truncate(std::string text) const;

  SandboxPtr sandbox_;
  RoleConfig role_;
  size_t observation_limit_;
  bool submit_accepted_ = false;
  std::map<std::string, std::string> protected_baseline_;  // rel path -> hash
};

// Submit gate. Development roles pass unconditionally; the migrator
// must leave every protected hash unchanged. Throws SubmitDenied.
void check_submit(Sandbox& sandbox, const RoleConfig& role,
                  const std::map<std::string, std::string>& protected_baseline);

struct RunAgentOptions {
  std::string model = "mock";
  std::optional<std::filesystem::path> trace_path;  // streamed trace.jsonl
  util::ClockPtr clock;
  size_t context_char_budget = 512 * 1024;
  size_t observation_limit = 16 * 1024;
  FileOrigin new_file_origin = FileOrigin::development;
  const WorkspaceManifest* base_manifest = nullptr;
};

// The shared step loop every role runs: model call, tool dispatch,
// observation append, stop on submit or budget exhaustion.
AgentTrace run_agent(const RoleConfig& role, SandboxPtr sandbox, ChatGateway& gateway,
                     const std::vector<ChatMessage>& seed_context, const RunAgentOptions& options);

// Smallest step index that created or modified a test-looking file.
std::optional<int> detect_first_test_step(const AgentTrace& trace);

// Free-text fallback when a provider returns no structured tool calls:
// accepts a JSON object {"tool": name, "args": {...}}, bare or fenced.
std::optional<ToolCallRequest> parse_tool_invocation(const std::string& content);

// Re-executes recorded tool calls against a fresh sandbox (no model
// calls) and returns the resulting manifest.
WorkspaceManifest replay_trace(const std::vector<StepRecord>& steps, SandboxPtr sandbox,
                               const RoleConfig& role, FileOrigin new_file_origin,
                               const WorkspaceManifest* base_manifest);

std::vector<StepRecord> load_trace_steps(const std::filesystem::path& trace_jsonl);

}  // namespace devharness
