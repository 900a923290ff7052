#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflect/agents.hpp"
#include "reflect/oddball.hpp"

namespace reflect {

inline constexpr const char* kApiKeyVariable = "REFLECTION_API_KEY";

struct RemoteEndpoint {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env = kApiKeyVariable;  // name of the variable, never its value
  double timeout_seconds = 60.0;
  int retry_budget = 3;  // total attempts per request
  double requests_per_minute = 60.0;
  int backoff_ms = 500;  // first retry delay; doubles per retry, plus jitter
  std::optional<double> temperature;
};

// Spaces requests at least 60/rate seconds apart. Shared across sessions.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

struct HttpResult {
  nlohmann::json body;
  int attempts = 0;
  double latency_ms = 0.0;  // of the successful attempt
};

// POSTs JSON to base_url + path. Connection errors, 429 and 5xx are retried
// with exponential backoff until the budget is spent; other statuses and
// unparseable bodies fail at once. Failures throw TransportError.
HttpResult post_json(const RemoteEndpoint& endpoint, const std::string& path,
                     const nlohmann::json& body, RateLimiter& limiter);

struct ChatResult {
  std::string content;
  int attempts = 0;
  double latency_ms = 0.0;
  nlohmann::json usage;  // null when the response carries none
};

ChatResult complete_chat(const RemoteEndpoint& endpoint, std::span<const ChatMessage> messages,
                         RateLimiter& limiter);

class RemoteAgent : public Agent {
 public:
  RemoteAgent(RemoteEndpoint endpoint, std::shared_ptr<RateLimiter> limiter);
  std::string name() const override { return "remote:" + endpoint_.model; }
  AgentReply respond(std::span<const ChatMessage> messages, const AgentContext& ctx) override;

 private:
  RemoteEndpoint endpoint_;
  std::shared_ptr<RateLimiter> limiter_;
};

// Embeddings over the same wire family (POST /embeddings).
class RemoteEmbedder : public oddball::Embedder {
 public:
  RemoteEmbedder(RemoteEndpoint endpoint, std::shared_ptr<RateLimiter> limiter);
  std::string name() const override { return "remote:" + endpoint_.model; }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

 private:
  RemoteEndpoint endpoint_;
  std::shared_ptr<RateLimiter> limiter_;
};

inline constexpr const char* kDefaultEmbeddingModel = "text-embedding-3-large";

}  // namespace reflect
