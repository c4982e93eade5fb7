#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace devharness {

enum class ChatRole { system, user, assistant, tool };

const char* to_string(ChatRole role);
ChatRole chat_role_from_string(const std::string& s);

struct ChatMessage {
  ChatRole role = ChatRole::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ToolSchema {
  std::string name;
  std::string description;
  nlohmann::json parameters;  // JSON-schema-shaped argument description
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.2;
  int max_output_tokens = 8192;
  std::vector<ToolSchema> tool_schemas;

  void validate() const;  // messages non-empty, temperature in [0,2]
};

struct ToolCallRequest {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();

  bool operator==(const ToolCallRequest&) const = default;
};

struct UsageRecord {
  std::int64_t tokens_sent = 0;
  std::int64_t tokens_generated = 0;
  double cost = 0.0;
  std::int64_t request_count = 0;

  UsageRecord& operator+=(const UsageRecord& other);
  friend UsageRecord operator+(UsageRecord a, const UsageRecord& b) { return a += b; }
  bool operator==(const UsageRecord&) const = default;
};

nlohmann::json to_json(const UsageRecord& usage);
UsageRecord usage_from_json(const nlohmann::json& j);

struct ChatResponse {
  std::string content;
  std::vector<ToolCallRequest> tool_calls;
  std::string finish_reason = "stop";
  UsageRecord usage;  // delta for this single request
};

struct ModelPrice {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

struct PriceTable {
  std::map<std::string, ModelPrice> models;
  ModelPrice fallback;

  ModelPrice lookup(const std::string& model) const;
};

// cost is a pure function of token counts and the price table.
double compute_cost(std::int64_t tokens_sent, std::int64_t tokens_generated, const ModelPrice& price);

class ChatGateway {
 public:
  virtual ~ChatGateway() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

using GatewayPtr = std::shared_ptr<ChatGateway>;

// Per-session usage accounting: a linearizable counter with optional
// budget ceilings. Safe for concurrent recorders.
class SessionUsage {
 public:
  SessionUsage() = default;
  SessionUsage(std::optional<double> max_cost, std::optional<std::int64_t> max_total_tokens)
      : max_cost_(max_cost), max_total_tokens_(max_total_tokens) {}

  // Returns the running total after applying the delta.
  UsageRecord record(const UsageRecord& delta);
  UsageRecord total() const;

  // Throws BudgetExceeded once a ceiling has been reached.
  void ensure_within_budget() const;

 private:
  mutable std::mutex mutex_;
  UsageRecord total_;
  std::optional<double> max_cost_;
  std::optional<std::int64_t> max_total_tokens_;
};

// Session wrapper: budget gate, retry policy, price-table costing and
// atomic usage recording around any transport.
class MeteredGateway : public ChatGateway {
 public:
  MeteredGateway(GatewayPtr inner, std::shared_ptr<SessionUsage> usage, PriceTable prices);

  ChatResponse complete(const ChatRequest& request) override;

  const std::shared_ptr<SessionUsage>& session() const { return usage_; }

 private:
  GatewayPtr inner_;
  std::shared_ptr<SessionUsage> usage_;
  PriceTable prices_;
};

struct ScriptEntry {
  std::string reply;
  std::vector<ToolCallRequest> tool_calls;
  std::string finish_reason = "stop";
  // Negative counts mean "estimate from message sizes".
  std::int64_t tokens_sent = -1;
  std::int64_t tokens_generated = -1;
  // Entry is eligible only when this substring appears in the request
  // (any message, or only `when_role` messages when set).
  std::optional<std::string> when_contains;
  std::optional<ChatRole> when_role;
  int repeat = 1;  // -1 = unlimited
};

// Deterministic canned transport: each request consumes the first
// eligible entry in script order. Exhaustion raises ScriptExhausted.
class ScriptedMockGateway : public ChatGateway {
 public:
  explicit ScriptedMockGateway(std::vector<ScriptEntry> script);

  ChatResponse complete(const ChatRequest& request) override;

  size_t remaining() const;

  static std::vector<ScriptEntry> parse_script(const nlohmann::json& j);
  static std::shared_ptr<ScriptedMockGateway> from_file(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptEntry> script_;
  std::vector<int> uses_left_;
};

struct HttpGatewayConfig {
  std::string base_url;               // e.g. http://host:port
  std::string completions_path = "/v1/chat/completions";
  std::string api_key;                // resolved from env by config loading
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{4000};
  std::chrono::milliseconds request_timeout{120000};
};

// OpenAI-style chat-completions client with bounded exponential
// backoff on transport failures and 5xx/429.
class HttpGateway : public ChatGateway {
 public:
  explicit HttpGateway(HttpGatewayConfig config);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  HttpGatewayConfig config_;
};

nlohmann::json chat_request_to_wire(const ChatRequest& request);
ChatResponse chat_response_from_wire(const nlohmann::json& body);

}  // namespace devharness
