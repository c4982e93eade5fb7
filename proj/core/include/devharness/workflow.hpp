#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "devharness/gateway.hpp"
#include "devharness/model.hpp"
#include "devharness/prompts.hpp"
#include "devharness/runtime.hpp"
#include "devharness/sandbox.hpp"

namespace devharness {

enum class WorkflowKind { single, dt, ddt };

const char* to_string(WorkflowKind kind);
WorkflowKind workflow_kind_from_string(const std::string& s);

// Role sequence per configuration: single=1, dt=2, ddt=3 phases.
std::vector<AgentRole> roles_for(WorkflowKind kind);

// Name of the design document the ddt designer is asked to produce.
inline constexpr const char* kDesignDocumentName = "DESIGN.md";

struct PhaseResult {
  int index = 0;  // 1-based
  std::string role_name;
  AgentTrace trace;
};

struct WorkflowRunResult {
  std::string run_id;
  std::string instance_id;
  WorkflowKind kind = WorkflowKind::single;
  std::string model;
  std::vector<PhaseResult> phases;
  WorkspaceManifest final_manifest;
  UsageRecord totals;
  std::int64_t started_ms = 0;
  std::int64_t ended_ms = 0;
  std::vector<std::string> warnings;
};

struct WorkflowConfig {
  std::string model = "mock";
  double temperature = 0.2;
  int step_budget = 200;
  size_t context_char_budget = 512 * 1024;
  util::ClockPtr clock;
  const PromptLibrary* prompts = nullptr;
};

// Seed context for the next role: the original requirement document, a
// workspace pointer, and designated artifacts only. No chat history
// crosses a handoff. Missing designated artifacts append a warning and
// degrade to requirements-only seeding.
std::vector<ChatMessage> handoff(const TaskInstance& instance, WorkflowKind kind, AgentRole next_role,
                                 const std::filesystem::path& workspace,
                                 std::vector<std::string>* warnings);

// Runs the role sequence over one shared sandbox workspace, streaming
// phase artifacts (trace.jsonl, seed.json, outcome.json,
// workspace.tar) under run_dir/phase_<k>_<role>/.
WorkflowRunResult run_workflow(WorkflowKind kind, const TaskInstance& instance, SandboxPtr sandbox,
                               ChatGateway& gateway, const WorkflowConfig& config,
                               const std::filesystem::path& run_dir, const std::string& run_id);

// Role configuration used by run_workflow; exposed for tests and the
// migration agent, which reuses the same runtime.
RoleConfig make_role_config(WorkflowKind kind, AgentRole role, const WorkflowConfig& config);

}  // namespace devharness
