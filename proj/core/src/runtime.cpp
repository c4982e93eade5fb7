#include "devharness/runtime.hpp"

#include <algorithm>
#include <sstream>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"
#include "devharness/util/glob.hpp"
#include "devharness/util/hash.hpp"
#include "devharness/util/jsonl.hpp"

namespace devharness {

namespace fs = std::filesystem;

const char* to_string(AgentRole role) {
  switch (role) {
    case AgentRole::single: return "single";
    case AgentRole::developer: return "developer";
    case AgentRole::tester: return "tester";
    case AgentRole::designer: return "designer";
    case AgentRole::migrator: return "migrator";
  }
  return "single";
}

AgentRole agent_role_from_string(const std::string& s) {
  if (s == "single") return AgentRole::single;
  if (s == "developer") return AgentRole::developer;
  if (s == "tester") return AgentRole::tester;
  if (s == "designer") return AgentRole::designer;
  if (s == "migrator") return AgentRole::migrator;
  raise(errc::invalid_argument, "unknown agent role: " + s);
}

void RoleConfig::validate() const {
  if (step_budget < 1) raise(errc::invalid_argument, "step_budget must be >= 1");
  if (allowed_tools.empty()) raise(errc::invalid_argument, "allowed_tools must be non-empty");
  for (const auto& t : allowed_tools) {
    const auto& known = ToolDispatcher::known_tools();
    if (std::find(known.begin(), known.end(), t) == known.end())
      raise(errc::invalid_argument, "unknown tool in allowlist: " + t);
  }
  for (const auto& p : write_mask) {
    if (p.empty() || p.front() == '/')
      raise(errc::invalid_argument, "write mask patterns must be workspace-relative: " + p);
  }
}

const char* to_string(ToolStatus status) {
  switch (status) {
    case ToolStatus::ok: return "ok";
    case ToolStatus::denied: return "denied";
    case ToolStatus::failed: return "failed";
    case ToolStatus::timeout: return "timeout";
  }
  return "failed";
}

ToolStatus tool_status_from_string(const std::string& s) {
  if (s == "ok") return ToolStatus::ok;
  if (s == "denied") return ToolStatus::denied;
  if (s == "failed") return ToolStatus::failed;
  if (s == "timeout") return ToolStatus::timeout;
  raise(errc::invalid_argument, "unknown tool status: " + s);
}

const char* to_string(AgentOutcome outcome) {
  switch (outcome) {
    case AgentOutcome::submitted: return "submitted";
    case AgentOutcome::budget_exhausted: return "budget_exhausted";
    case AgentOutcome::aborted: return "aborted";
  }
  return "aborted";
}

AgentOutcome agent_outcome_from_string(const std::string& s) {
  if (s == "submitted") return AgentOutcome::submitted;
  if (s == "budget_exhausted") return AgentOutcome::budget_exhausted;
  if (s == "aborted") return AgentOutcome::aborted;
  raise(errc::invalid_argument, "unknown outcome: " + s);
}

nlohmann::json to_json(const StepRecord& step) {
  nlohmann::json calls = nlohmann::json::array();
  for (const auto& call : step.tool_calls) {
    calls.push_back({{"name", call.name},
                     {"arguments", call.arguments},
                     {"result",
                      {{"status", to_string(call.result.status)},
                       {"observation", call.result.observation},
                       {"stdout", call.result.stdout_excerpt},
                       {"stderr", call.result.stderr_excerpt}}}});
  }
  return {{"index", step.index},        {"model_message", step.model_message},
          {"tool_calls", calls},        {"usage_delta", to_json(step.usage_delta)},
          {"wall_time_ms", step.wall_time_ms}, {"files_changed", step.files_changed}};
}

StepRecord step_record_from_json(const nlohmann::json& j) {
  StepRecord step;
  step.index = j.at("index").get<int>();
  step.model_message = j.value("model_message", "");
  for (const auto& call : j.value("tool_calls", nlohmann::json::array())) {
    ToolCallRecord record;
    record.name = call.at("name").get<std::string>();
    record.arguments = call.value("arguments", nlohmann::json::object());
    const auto& res = call.at("result");
    record.result.status = tool_status_from_string(res.at("status").get<std::string>());
    record.result.observation = res.value("observation", "");
    record.result.stdout_excerpt = res.value("stdout", "");
    record.result.stderr_excerpt = res.value("stderr", "");
    step.tool_calls.push_back(std::move(record));
  }
  step.usage_delta = usage_from_json(j.value("usage_delta", nlohmann::json::object()));
  step.wall_time_ms = j.value("wall_time_ms", static_cast<std::int64_t>(0));
  step.files_changed = j.value("files_changed", std::vector<std::string>{});
  return step;
}

nlohmann::json trace_summary_to_json(const AgentTrace& trace) {
  nlohmann::json seed = nlohmann::json::array();
  for (const auto& m : trace.seed_context)
    seed.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"role", trace.role_name},
          {"seed_context", seed},
          {"steps", trace.steps.size()},
          {"usage", to_json(trace.usage)},
          {"outcome", to_string(trace.outcome)},
          {"final_manifest", to_json(trace.final_manifest)}};
}

const std::vector<std::string>& ToolDispatcher::known_tools() {
  static const std::vector<std::string> tools = {"read_file", "write_file", "edit_range", "list_dir",
                                                 "search_text", "run_shell", "submit"};
  return tools;
}

std::vector<ToolSchema> ToolDispatcher::schemas_for(const std::vector<std::string>& allowed) {
  auto object_schema = [](std::initializer_list<std::pair<std::string, std::string>> props,
                          std::vector<std::string> required) {
    nlohmann::json properties = nlohmann::json::object();
    for (const auto& [name, type] : props) properties[name] = {{"type", type}};
    return nlohmann::json{{"type", "object"}, {"properties", properties}, {"required", required}};
  };
  std::map<std::string, ToolSchema> all;
  all["read_file"] = {"read_file", "Read a workspace file.", object_schema({{"path", "string"}}, {"path"})};
  all["write_file"] = {"write_file", "Create or overwrite a workspace file.",
                       object_schema({{"path", "string"}, {"content", "string"}}, {"path", "content"})};
  all["edit_range"] = {"edit_range", "Replace an inclusive 1-based line range in a file.",
                       object_schema({{"path", "string"},
                                      {"start_line", "integer"},
                                      {"end_line", "integer"},
                                      {"replacement", "string"}},
                                     {"path", "start_line", "end_line", "replacement"})};
  all["list_dir"] = {"list_dir", "List a workspace directory.", object_schema({{"path", "string"}}, {})};
  all["search_text"] = {"search_text", "Search workspace files for a substring.",
                        object_schema({{"pattern", "string"}, {"path", "string"}}, {"pattern"})};
  all["run_shell"] = {"run_shell", "Run a shell command inside the sandboxed workspace.",
                      object_schema({{"command", "string"}}, {"command"})};
  all["submit"] = {"submit", "Declare the task finished.", object_schema({}, {})};
  std::vector<ToolSchema> out;
  for (const auto& name : allowed) {
    auto it = all.find(name);
    if (it != all.end()) out.push_back(it->second);
  }
  return out;
}

ToolDispatcher::ToolDispatcher(SandboxPtr sandbox, RoleConfig role, size_t observation_limit)
    : sandbox_(std::move(sandbox)), role_(std::move(role)), observation_limit_(observation_limit) {
  role_.validate();
  sandbox_->apply_write_mask(role_.write_mask);
  for (const auto& rel : util::list_files_recursive(sandbox_->workspace())) {
    if (sandbox_->path_masked(rel))
      protected_baseline_[rel] = util::sha256_file_hex(sandbox_->workspace() / rel);
  }
}

std::string ToolDispatcher::truncate(std::string text) const {
  if (text.size() <= observation_limit_) return text;
  size_t half = observation_limit_ / 2;
  std::string omitted = "\n...[" + std::to_string(text.size() - 2 * half) + " bytes omitted]...\n";
  return text.substr(0, half) + omitted + text.substr(text.size() - half);
}

namespace {

std::optional<std::string> arg_string(const nlohmann::json& args, const char* key) {
  if (!args.contains(key) || !args[key].is_string()) return std::nullopt;
  return args[key].get<std::string>();
}

ToolResult fail(std::string message) {
  ToolResult r;
  r.status = ToolStatus::failed;
  r.observation = std::move(message);
  return r;
}

ToolResult deny(std::string message) {
  ToolResult r;
  r.status = ToolStatus::denied;
  r.observation = std::move(message);
  return r;
}

}  // namespace

ToolResult ToolDispatcher::dispatch(const std::string& name, const nlohmann::json& arguments,
                                    std::vector<std::string>* files_changed) {
  const auto& known = known_tools();
  if (std::find(known.begin(), known.end(), name) == known.end())
    raise(errc::unknown_tool, "tool does not exist: " + name);
  if (std::find(role_.allowed_tools.begin(), role_.allowed_tools.end(), name) ==
      role_.allowed_tools.end())
    return deny("tool '" + name + "' is not allowed for role " + std::string(to_string(role_.role)));

  ToolResult result;
  if (name == "read_file") result = tool_read_file(arguments);
  else if (name == "write_file") result = tool_write_file(arguments, files_changed);
  else if (name == "edit_range") result = tool_edit_range(arguments, files_changed);
  else if (name == "list_dir") result = tool_list_dir(arguments);
  else if (name == "search_text") result = tool_search_text(arguments);
  else if (name == "run_shell") result = tool_run_shell(arguments, files_changed);
  else result = tool_submit();

  result.observation = truncate(std::move(result.observation));
  result.stdout_excerpt = truncate(std::move(result.stdout_excerpt));
  result.stderr_excerpt = truncate(std::move(result.stderr_excerpt));
  return result;
}

ToolResult ToolDispatcher::tool_read_file(const nlohmann::json& args) {
  auto path = arg_string(args, "path");
  if (!path || !util::is_valid_rel_path(*path)) return fail("read_file needs a workspace-relative 'path'");
  auto content = util::try_read_file(sandbox_->workspace() / util::normalize_rel_path(*path));
  if (!content) return fail("no such file: " + *path);
  ToolResult r;
  r.observation = *content;
  return r;
}

ToolResult ToolDispatcher::tool_write_file(const nlohmann::json& args,
                                           std::vector<std::string>* files_changed) {
  auto path = arg_string(args, "path");
  auto content = arg_string(args, "content");
  if (!path || !content || !util::is_valid_rel_path(*path))
    return fail("write_file needs 'path' and 'content'");
  std::string rel = util::normalize_rel_path(*path);
  if (sandbox_->path_masked(rel)) return deny("path is write-protected: " + rel);
  util::write_file(sandbox_->workspace() / rel, *content);
  if (files_changed) files_changed->push_back(rel);
  ToolResult r;
  r.observation = "wrote " + std::to_string(content->size()) + " bytes to " + rel;
  return r;
}

ToolResult ToolDispatcher::tool_edit_range(const nlohmann::json& args,
                                           std::vector<std::string>* files_changed) {
  auto path = arg_string(args, "path");
  if (!path || !util::is_valid_rel_path(*path) || !args.contains("start_line") ||
      !args.contains("end_line") || !args.contains("replacement"))
    return fail("edit_range needs 'path', 'start_line', 'end_line', 'replacement'");
  std::string rel = util::normalize_rel_path(*path);
  if (sandbox_->path_masked(rel)) return deny("path is write-protected: " + rel);
  auto content = util::try_read_file(sandbox_->workspace() / rel);
  if (!content) return fail("no such file: " + rel);

  int start = args["start_line"].get<int>();
  int end = args["end_line"].get<int>();
  std::vector<std::string> lines;
  {
    std::istringstream in(*content);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  if (start < 1 || end < start || static_cast<size_t>(end) > lines.size())
    return fail("line range " + std::to_string(start) + ".." + std::to_string(end) +
                " out of bounds (file has " + std::to_string(lines.size()) + " lines)");

  std::ostringstream out;
  for (int i = 0; i < start - 1; ++i) out << lines[i] << '\n';
  std::string replacement = args["replacement"].get<std::string>();
  out << replacement;
  if (!replacement.empty() && replacement.back() != '\n') out << '\n';
  for (size_t i = static_cast<size_t>(end); i < lines.size(); ++i) out << lines[i] << '\n';
  util::write_file(sandbox_->workspace() / rel, out.str());
  if (files_changed) files_changed->push_back(rel);
  ToolResult r;
  r.observation = "replaced lines " + std::to_string(start) + ".." + std::to_string(end) + " in " + rel;
  return r;
}

ToolResult ToolDispatcher::tool_list_dir(const nlohmann::json& args) {
  std::string rel = ".";
  if (auto p = arg_string(args, "path"); p && !p->empty() && *p != ".") {
    if (!util::is_valid_rel_path(*p)) return fail("list_dir path must be workspace-relative");
    rel = util::normalize_rel_path(*p);
  }
  fs::path dir = rel == "." ? sandbox_->workspace() : sandbox_->workspace() / rel;
  if (!fs::exists(dir) || !fs::is_directory(dir)) return fail("no such directory: " + rel);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (entry.is_directory()) name += "/";
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  ToolResult r;
  std::ostringstream out;
  for (const auto& n : names) out << n << '\n';
  r.observation = names.empty() ? "(empty)" : out.str();
  return r;
}

ToolResult ToolDispatcher::tool_search_text(const nlohmann::json& args) {
  auto pattern = arg_string(args, "pattern");
  if (!pattern || pattern->empty()) return fail("search_text needs a 'pattern'");
  std::string scope;
  if (auto p = arg_string(args, "path"); p && !p->empty()) {
    if (!util::is_valid_rel_path(*p)) return fail("search_text path must be workspace-relative");
    scope = util::normalize_rel_path(*p);
  }
  constexpr size_t kMaxHits = 200;
  std::ostringstream out;
  size_t hits = 0;
  for (const auto& rel : util::list_files_recursive(sandbox_->workspace())) {
    if (!scope.empty() && rel != scope && !util::glob_match(scope + "/**", rel)) continue;
    auto content = util::try_read_file(sandbox_->workspace() / rel);
    if (!content) continue;
    std::istringstream in(*content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line) && hits < kMaxHits) {
      ++line_no;
      if (line.find(*pattern) != std::string::npos) {
        out << rel << ":" << line_no << ": " << line << '\n';
        ++hits;
      }
    }
    if (hits >= kMaxHits) break;
  }
  ToolResult r;
  r.observation = hits == 0 ? "no matches" : out.str();
  return r;
}

ToolResult ToolDispatcher::tool_run_shell(const nlohmann::json& args,
                                          std::vector<std::string>* files_changed) {
  auto command = arg_string(args, "command");
  if (!command || command->empty()) return fail("run_shell needs a 'command'");

  auto before = snapshot_workspace(sandbox_->workspace(), nullptr, FileOrigin::development);
  ExecResult exec = sandbox_->exec(*command);
  auto after = snapshot_workspace(sandbox_->workspace(), nullptr, FileOrigin::development);
  if (files_changed) {
    for (const auto& [path, entry] : after.entries) {
      auto it = before.entries.find(path);
      if (it == before.entries.end() || it->second.hash != entry.hash) files_changed->push_back(path);
    }
  }

  ToolResult r;
  r.stdout_excerpt = exec.stdout_text;
  r.stderr_excerpt = exec.stderr_text;
  if (exec.mask_violation) {
    r.status = ToolStatus::denied;
  } else if (exec.timed_out) {
    r.status = ToolStatus::timeout;
  } else {
    r.status = exec.exit_code == 0 ? ToolStatus::ok : ToolStatus::failed;
  }
  std::ostringstream obs;
  obs << "exit code " << exec.exit_code;
  if (exec.timed_out) obs << " (timed out)";
  if (exec.mask_violation) {
    obs << " (write to protected path denied:";
    for (const auto& p : exec.violated_paths) obs << ' ' << p;
    obs << ")";
  }
  obs << "\nstdout:\n" << exec.stdout_text << "\nstderr:\n" << exec.stderr_text;
  r.observation = obs.str();
  return r;
}

ToolResult ToolDispatcher::tool_submit() {
  try {
    check_submit(*sandbox_, role_, protected_baseline_);
  } catch (const DomainError& e) {
    if (e.code() == errc::submit_denied) return deny(e.what());
    throw;
  }
  submit_accepted_ = true;
  ToolResult r;
  r.observation = "submission accepted";
  return r;
}

void check_submit(Sandbox& sandbox, const RoleConfig& role,
                  const std::map<std::string, std::string>& protected_baseline) {
  if (role.role != AgentRole::migrator) return;  // development submits are ungated
  for (const auto& [rel, hash] : protected_baseline) {
    fs::path path = sandbox.workspace() / rel;
    if (!fs::exists(path))
      raise(errc::submit_denied, "protected file missing at submit: " + rel);
    if (util::sha256_file_hex(path) != hash)
      raise(errc::submit_denied, "protected file modified: " + rel);
  }
}

std::optional<ToolCallRequest> parse_tool_invocation(const std::string& content) {
  auto try_parse = [](std::string_view text) -> std::optional<ToolCallRequest> {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("tool") || !j["tool"].is_string())
      return std::nullopt;
    return ToolCallRequest{j["tool"].get<std::string>(), j.value("args", nlohmann::json::object())};
  };
  if (auto direct = try_parse(content)) return direct;
  size_t fence = content.find("```");
  while (fence != std::string::npos) {
    size_t body_start = content.find('\n', fence);
    if (body_start == std::string::npos) break;
    size_t fence_end = content.find("```", body_start);
    if (fence_end == std::string::npos) break;
    if (auto fenced = try_parse(std::string_view(content).substr(body_start + 1, fence_end - body_start - 1)))
      return fenced;
    fence = content.find("```", fence_end + 3);
  }
  return std::nullopt;
}

namespace {

// Oldest-first elision of non-seed history once the character budget
// is exceeded.
std::vector<ChatMessage> build_context(const std::vector<ChatMessage>& fixed,
                                       const std::vector<ChatMessage>& history, size_t char_budget) {
  size_t fixed_chars = 0;
  for (const auto& m : fixed) fixed_chars += m.content.size();
  size_t budget = char_budget > fixed_chars ? char_budget - fixed_chars : 0;

  size_t history_chars = 0;
  for (const auto& m : history) history_chars += m.content.size();
  size_t first_kept = 0;
  while (first_kept < history.size() && history_chars > budget) {
    history_chars -= history[first_kept].content.size();
    ++first_kept;
  }

  std::vector<ChatMessage> out = fixed;
  if (first_kept > 0)
    out.push_back({ChatRole::user,
                   "[context elided: " + std::to_string(first_kept) + " earlier messages]"});
  out.insert(out.end(), history.begin() + static_cast<std::ptrdiff_t>(first_kept), history.end());
  return out;
}

}  // namespace

AgentTrace run_agent(const RoleConfig& role, SandboxPtr sandbox, ChatGateway& gateway,
                     const std::vector<ChatMessage>& seed_context, const RunAgentOptions& options) {
  role.validate();
  auto clock = options.clock ? options.clock : util::system_clock();

  AgentTrace trace;
  trace.role_name = to_string(role.role);
  trace.seed_context = seed_context;

  ToolDispatcher dispatcher(sandbox, role, options.observation_limit);

  std::vector<ChatMessage> fixed;
  fixed.push_back({ChatRole::system, role.system_prompt});
  fixed.insert(fixed.end(), seed_context.begin(), seed_context.end());
  std::vector<ChatMessage> history;

  auto persist_step = [&](const StepRecord& step) {
    if (options.trace_path) util::jsonl_append(*options.trace_path, to_json(step));
  };
  auto finalize = [&](AgentOutcome outcome) {
    trace.outcome = outcome;
    trace.final_manifest =
        snapshot_workspace(sandbox->workspace(), options.base_manifest, options.new_file_origin);
  };

  for (int index = 1; index <= role.step_budget; ++index) {
    ChatRequest request;
    request.model = options.model;
    request.temperature = role.temperature;
    request.messages = build_context(fixed, history, options.context_char_budget);
    request.tool_schemas = ToolDispatcher::schemas_for(role.allowed_tools);

    StepRecord step;
    step.index = index;
    std::int64_t step_start = clock->now_millis();

    ChatResponse response;
    try {
      response = gateway.complete(request);
    } catch (const DomainError& e) {
      finalize(AgentOutcome::aborted);
      raise(errc::gateway_error, std::string("model call failed at step ") + std::to_string(index) +
                                     ": " + e.what());
    }

    step.model_message = response.content;
    step.usage_delta = response.usage;
    trace.usage += response.usage;

    std::vector<ToolCallRequest> calls = response.tool_calls;
    if (calls.empty()) {
      if (auto parsed = parse_tool_invocation(response.content)) calls.push_back(*parsed);
    }

    history.push_back({ChatRole::assistant, response.content});
    bool submitted = false;
    if (calls.empty()) {
      history.push_back(
          {ChatRole::user, "No tool call found. Respond with a tool call; use submit when done."});
    }
    for (const auto& call : calls) {
      ToolCallRecord record;
      record.name = call.name;
      record.arguments = call.arguments;
      try {
        record.result = dispatcher.dispatch(call.name, call.arguments, &step.files_changed);
      } catch (const DomainError& e) {
        if (e.code() == errc::unknown_tool) {
          record.result.status = ToolStatus::failed;
          record.result.observation = e.what();
        } else {
          throw;
        }
      }
      history.push_back({ChatRole::tool, "[" + call.name + "] " + to_string(record.result.status) +
                                             "\n" + record.result.observation});
      step.tool_calls.push_back(std::move(record));
      if (call.name == "submit" && dispatcher.submit_accepted()) {
        submitted = true;
        break;
      }
    }

    step.wall_time_ms = clock->now_millis() - step_start;
    trace.steps.push_back(step);
    persist_step(step);

    if (submitted) {
      finalize(AgentOutcome::submitted);
      return trace;
    }
  }

  finalize(AgentOutcome::budget_exhausted);
  return trace;
}

std::optional<int> detect_first_test_step(const AgentTrace& trace) {
  for (const auto& step : trace.steps) {
    for (const auto& path : step.files_changed) {
      if (looks_like_test_path(path)) return step.index;
    }
  }
  return std::nullopt;
}

WorkspaceManifest replay_trace(const std::vector<StepRecord>& steps, SandboxPtr sandbox,
                               const RoleConfig& role, FileOrigin new_file_origin,
                               const WorkspaceManifest* base_manifest) {
  ToolDispatcher dispatcher(sandbox, role);
  for (const auto& step : steps) {
    for (const auto& call : step.tool_calls) {
      dispatcher.dispatch(call.name, call.arguments, nullptr);
    }
  }
  return snapshot_workspace(sandbox->workspace(), base_manifest, new_file_origin);
}

std::vector<StepRecord> load_trace_steps(const std::filesystem::path& trace_jsonl) {
  std::vector<StepRecord> steps;
  for (const auto& line : util::jsonl_load(trace_jsonl)) steps.push_back(step_record_from_json(line));
  return steps;
}

}  // namespace devharness
