#include "reflect/remote.hpp"

#include <cstdlib>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace reflect {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Url split_url(const std::string& base) {
  const auto scheme = base.find("://");
  if (scheme == std::string::npos) throw ConfigError(fmt::format("endpoint '{}' lacks a scheme", base));
  const auto slash = base.find('/', scheme + 3);
  Url u;
  u.origin = base.substr(0, slash);
  u.prefix = slash == std::string::npos ? "" : base.substr(slash);
  while (!u.prefix.empty() && u.prefix.back() == '/') u.prefix.pop_back();
  return u;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

RateLimiter::RateLimiter(double requests_per_minute)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(requests_per_minute > 0 ? 60.0 / requests_per_minute : 0.0))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

HttpResult post_json(const RemoteEndpoint& endpoint, const std::string& path,
                     const nlohmann::json& body, RateLimiter& limiter) {
  const Url url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(endpoint.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = body.dump();
  std::mt19937_64 jitter(std::random_device{}());
  std::string last_error = "no attempt made";
  const int budget = std::max(1, endpoint.retry_budget);

  for (int attempt = 1; attempt <= budget; ++attempt) {
    if (attempt > 1) {
      const int base = endpoint.backoff_ms << std::min(attempt - 2, 16);
      const int extra = base > 0 ? static_cast<int>(jitter() % static_cast<unsigned>(base / 2 + 1)) : 0;
      std::this_thread::sleep_for(std::chrono::milliseconds(base + extra));
    }
    limiter.acquire();
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(url.prefix + path, headers, payload, "application/json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
      last_error = fmt::format("connection failed: {}", httplib::to_string(res.error()));
      continue;
    }
    if (retryable(res->status)) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError(fmt::format("HTTP {} from {}{}", res->status, endpoint.base_url, path), attempt);
    }
    try {
      return {nlohmann::json::parse(res->body), attempt, ms};
    } catch (const nlohmann::json::exception&) {
      throw TransportError(fmt::format("malformed response body from {}{}", endpoint.base_url, path), attempt);
    }
  }
  throw TransportError(fmt::format("{}{}: giving up after {} attempts ({})", endpoint.base_url, path,
                                   budget, last_error),
                       budget);
}

ChatResult complete_chat(const RemoteEndpoint& endpoint, std::span<const ChatMessage> messages,
                         RateLimiter& limiter) {
  nlohmann::json body;
  body["model"] = endpoint.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  if (endpoint.temperature) body["temperature"] = *endpoint.temperature;

  const auto http = post_json(endpoint, "/chat/completions", body, limiter);
  ChatResult r;
  r.attempts = http.attempts;
  r.latency_ms = http.latency_ms;
  try {
    const auto& content = http.body.at("choices").at(0).at("message").at("content");
    r.content = content.is_null() ? "" : content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("malformed chat response: no choices[0].message.content", http.attempts);
  }
  if (http.body.contains("usage")) r.usage = http.body["usage"];
  return r;
}

RemoteAgent::RemoteAgent(RemoteEndpoint endpoint, std::shared_ptr<RateLimiter> limiter)
    : endpoint_(std::move(endpoint)), limiter_(std::move(limiter)) {}

AgentReply RemoteAgent::respond(std::span<const ChatMessage> messages, const AgentContext&) {
  const auto r = complete_chat(endpoint_, messages, *limiter_);
  AgentReply reply{r.content};
  reply.meta = {{"attempts", r.attempts}, {"latency_ms", r.latency_ms}};
  if (!r.usage.is_null()) reply.meta["usage"] = r.usage;
  return reply;
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::shared_ptr<RateLimiter> limiter)
    : endpoint_(std::move(endpoint)), limiter_(std::move(limiter)) {}

std::vector<std::vector<double>> RemoteEmbedder::embed(std::span<const std::string> texts) {
  nlohmann::json body{{"model", endpoint_.model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto http = post_json(endpoint_, "/embeddings", body, *limiter_);
  std::vector<std::vector<double>> out(texts.size());
  try {
    const auto& data = http.body.at("data");
    if (data.size() != texts.size()) throw TransportError("embedding count mismatch", http.attempts);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].value("index", i);
      if (idx >= out.size()) throw TransportError("embedding index out of range", http.attempts);
      out[idx] = data[i].at("embedding").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception&) {
    throw TransportError("malformed embedding response", http.attempts);
  }
  return out;
}

}  // namespace reflect
