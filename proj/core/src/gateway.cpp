#include "devharness/gateway.hpp"

#include <thread>

#include "devharness/errors.hpp"
#include "devharness/util/fs.hpp"
#include "httplib.h"

namespace devharness {

const char* to_string(ChatRole role) {
  switch (role) {
    case ChatRole::system: return "system";
    case ChatRole::user: return "user";
    case ChatRole::assistant: return "assistant";
    case ChatRole::tool: return "tool";
  }
  return "user";
}

ChatRole chat_role_from_string(const std::string& s) {
  if (s == "system") return ChatRole::system;
  if (s == "user") return ChatRole::user;
  if (s == "assistant") return ChatRole::assistant;
  if (s == "tool") return ChatRole::tool;
  raise(errc::invalid_argument, "unknown chat role: " + s);
}

void ChatRequest::validate() const {
  if (messages.empty()) raise(errc::invalid_argument, "chat request has no messages");
  if (temperature < 0.0 || temperature > 2.0)
    raise(errc::invalid_argument, "temperature out of [0,2]: " + std::to_string(temperature));
}

UsageRecord& UsageRecord::operator+=(const UsageRecord& other) {
  tokens_sent += other.tokens_sent;
  tokens_generated += other.tokens_generated;
  cost += other.cost;
  request_count += other.request_count;
  return *this;
}

nlohmann::json to_json(const UsageRecord& usage) {
  return {{"tokens_sent", usage.tokens_sent},
          {"tokens_generated", usage.tokens_generated},
          {"cost", usage.cost},
          {"request_count", usage.request_count}};
}

UsageRecord usage_from_json(const nlohmann::json& j) {
  UsageRecord u;
  u.tokens_sent = j.value("tokens_sent", static_cast<std::int64_t>(0));
  u.tokens_generated = j.value("tokens_generated", static_cast<std::int64_t>(0));
  u.cost = j.value("cost", 0.0);
  u.request_count = j.value("request_count", static_cast<std::int64_t>(0));
  return u;
}

ModelPrice PriceTable::lookup(const std::string& model) const {
  auto it = models.find(model);
  return it == models.end() ? fallback : it->second;
}

double compute_cost(std::int64_t tokens_sent, std::int64_t tokens_generated, const ModelPrice& price) {
  return static_cast<double>(tokens_sent) * price.input_per_million / 1e6 +
         static_cast<double>(tokens_generated) * price.output_per_million / 1e6;
}

UsageRecord SessionUsage::record(const UsageRecord& delta) {
  if (delta.tokens_sent < 0 || delta.tokens_generated < 0 || delta.cost < 0)
    raise(errc::invalid_argument, "usage delta must be non-negative");
  std::lock_guard lock(mutex_);
  total_ += delta;
  return total_;
}

UsageRecord SessionUsage::total() const {
  std::lock_guard lock(mutex_);
  return total_;
}

void SessionUsage::ensure_within_budget() const {
  std::lock_guard lock(mutex_);
  if (max_cost_ && total_.cost >= *max_cost_)
    raise(errc::budget_exceeded,
          "session cost " + std::to_string(total_.cost) + " reached ceiling " + std::to_string(*max_cost_));
  if (max_total_tokens_ && total_.tokens_sent + total_.tokens_generated >= *max_total_tokens_)
    raise(errc::budget_exceeded, "session token ceiling reached");
}

MeteredGateway::MeteredGateway(GatewayPtr inner, std::shared_ptr<SessionUsage> usage, PriceTable prices)
    : inner_(std::move(inner)), usage_(std::move(usage)), prices_(std::move(prices)) {}

ChatResponse MeteredGateway::complete(const ChatRequest& request) {
  request.validate();
  usage_->ensure_within_budget();
  ChatResponse response = inner_->complete(request);
  response.usage.request_count = std::max<std::int64_t>(response.usage.request_count, 1);
  response.usage.cost =
      compute_cost(response.usage.tokens_sent, response.usage.tokens_generated, prices_.lookup(request.model));
  usage_->record(response.usage);
  return response;
}

ScriptedMockGateway::ScriptedMockGateway(std::vector<ScriptEntry> script) : script_(std::move(script)) {
  if (script_.empty()) raise(errc::invalid_argument, "mock script is empty");
  uses_left_.reserve(script_.size());
  for (const auto& e : script_) uses_left_.push_back(e.repeat);
}

namespace {

std::int64_t approx_tokens(size_t chars) { return static_cast<std::int64_t>(chars / 4 + 1); }

bool entry_matches(const ScriptEntry& entry, const ChatRequest& request) {
  if (!entry.when_contains) return true;
  for (const auto& msg : request.messages) {
    if (entry.when_role && msg.role != *entry.when_role) continue;
    if (msg.content.find(*entry.when_contains) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

ChatResponse ScriptedMockGateway::complete(const ChatRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);
  for (size_t i = 0; i < script_.size(); ++i) {
    if (uses_left_[i] == 0) continue;
    if (!entry_matches(script_[i], request)) continue;
    if (uses_left_[i] > 0) --uses_left_[i];
    const ScriptEntry& entry = script_[i];
    ChatResponse response;
    response.content = entry.reply;
    response.tool_calls = entry.tool_calls;
    response.finish_reason = entry.finish_reason;
    size_t sent_chars = 0;
    for (const auto& m : request.messages) sent_chars += m.content.size();
    response.usage.tokens_sent = entry.tokens_sent >= 0 ? entry.tokens_sent : approx_tokens(sent_chars);
    response.usage.tokens_generated =
        entry.tokens_generated >= 0 ? entry.tokens_generated : approx_tokens(entry.reply.size());
    response.usage.request_count = 1;
    return response;
  }
  raise(errc::script_exhausted, "no eligible script entry for request");
}

size_t ScriptedMockGateway::remaining() const {
  std::lock_guard lock(mutex_);
  size_t n = 0;
  for (int u : uses_left_)
    if (u != 0) ++n;
  return n;
}

std::vector<ScriptEntry> ScriptedMockGateway::parse_script(const nlohmann::json& j) {
  std::vector<ScriptEntry> script;
  const nlohmann::json& entries = j.is_array() ? j : j.at("script");
  for (const auto& e : entries) {
    ScriptEntry entry;
    entry.reply = e.value("reply", "");
    entry.finish_reason = e.value("finish_reason", "stop");
    entry.tokens_sent = e.value("tokens_sent", static_cast<std::int64_t>(-1));
    entry.tokens_generated = e.value("tokens_generated", static_cast<std::int64_t>(-1));
    entry.repeat = e.value("repeat", 1);
    if (e.contains("when_contains")) entry.when_contains = e["when_contains"].get<std::string>();
    if (e.contains("when_role")) entry.when_role = chat_role_from_string(e["when_role"].get<std::string>());
    if (e.contains("tool_calls")) {
      for (const auto& tc : e["tool_calls"]) {
        entry.tool_calls.push_back(
            {tc.at("name").get<std::string>(), tc.value("arguments", nlohmann::json::object())});
      }
    }
    script.push_back(std::move(entry));
  }
  return script;
}

std::shared_ptr<ScriptedMockGateway> ScriptedMockGateway::from_file(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(util::read_file(path), nullptr, false);
  if (j.is_discarded()) raise(errc::invalid_argument, "malformed mock script: " + path.string());
  return std::make_shared<ScriptedMockGateway>(parse_script(j));
}

nlohmann::json chat_request_to_wire(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages)
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  nlohmann::json body = {{"model", request.model},
                         {"messages", messages},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_output_tokens}};
  if (!request.tool_schemas.empty()) {
    nlohmann::json tools = nlohmann::json::array();
    for (const auto& t : request.tool_schemas) {
      tools.push_back({{"type", "function"},
                       {"function",
                        {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
    }
    body["tools"] = tools;
  }
  return body;
}

ChatResponse chat_response_from_wire(const nlohmann::json& body) {
  ChatResponse response;
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    raise(errc::malformed_response, "missing choices array");
  const auto& choice = body["choices"][0];
  const auto& message = choice.at("message");
  if (message.contains("content") && message["content"].is_string())
    response.content = message["content"].get<std::string>();
  if (message.contains("tool_calls")) {
    for (const auto& tc : message["tool_calls"]) {
      const auto& fn = tc.at("function");
      nlohmann::json args = nlohmann::json::object();
      if (fn.contains("arguments")) {
        if (fn["arguments"].is_string()) {
          args = nlohmann::json::parse(fn["arguments"].get<std::string>(), nullptr, false);
          if (args.is_discarded()) raise(errc::malformed_response, "tool call arguments not JSON");
        } else {
          args = fn["arguments"];
        }
      }
      response.tool_calls.push_back({fn.at("name").get<std::string>(), std::move(args)});
    }
  }
  response.finish_reason = choice.value("finish_reason", "stop");
  if (body.contains("usage")) {
    response.usage.tokens_sent = body["usage"].value("prompt_tokens", static_cast<std::int64_t>(0));
    response.usage.tokens_generated =
        body["usage"].value("completion_tokens", static_cast<std::int64_t>(0));
  }
  response.usage.request_count = 1;
  return response;
}

HttpGateway::HttpGateway(HttpGatewayConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) raise(errc::invalid_argument, "http gateway needs a base_url");
}

ChatResponse HttpGateway::complete(const ChatRequest& request) {
  request.validate();
  nlohmann::json body = chat_request_to_wire(request);
  std::string payload = body.dump();

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, config_.max_backoff);
    }
    httplib::Client client(config_.base_url);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout));
    client.set_connection_timeout(std::chrono::seconds(10));
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(config_.completions_path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      raise(errc::provider_error, "status " + std::to_string(res->status) + ": " + res->body);
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) raise(errc::malformed_response, "provider returned non-JSON body");
    return chat_response_from_wire(parsed);
  }
  raise(errc::provider_error,
        "gave up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

}  // namespace devharness
