#include "reflect/agents.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace reflect {

void Agent::begin(const TaskEnvironment&, std::uint64_t) {}

std::optional<bool> feedback_is_win(TaskId task, const std::string& feedback,
                                    const std::string& last_action) {
  if (feedback.empty()) return std::nullopt;
  switch (task) {
    case TaskId::prlt:
    case TaskId::mbt:
      return feedback.find("Reward: 1") != std::string::npos;
    case TaskId::wcst:
      return feedback.rfind("Right", 0) == 0;
    case TaskId::wpt:
      return feedback.find("The actual weather is " + last_action) != std::string::npos;
    case TaskId::dcigt:
      return feedback.find("lost $0") != std::string::npos;
    case TaskId::nback:
    case TaskId::oddball:
      return std::nullopt;
  }
  return std::nullopt;
}

void RandomAgent::begin(const TaskEnvironment&, std::uint64_t session_seed) {
  rng_ = Rng::stream(session_seed, "agent");
}

AgentReply RandomAgent::respond(std::span<const ChatMessage>, const AgentContext& ctx) {
  if (ctx.options.empty()) return {std::string(kNeutralComment)};
  return {ctx.options[rng_.below(ctx.options.size())]};
}

void WslsAgent::begin(const TaskEnvironment&, std::uint64_t session_seed) {
  rng_ = Rng::stream(session_seed, "agent");
  last_.reset();
}

AgentReply WslsAgent::respond(std::span<const ChatMessage>, const AgentContext& ctx) {
  if (ctx.options.empty()) return {std::string(kNeutralComment)};
  std::string choice;
  const auto win = last_ ? feedback_is_win(ctx.task, ctx.feedback, *last_) : std::nullopt;
  const bool last_available =
      last_ && std::find(ctx.options.begin(), ctx.options.end(), *last_) != ctx.options.end();
  if (win && last_available && *win) {
    choice = *last_;
  } else if (win && last_available) {
    std::vector<std::string> others;
    for (const auto& o : ctx.options)
      if (o != *last_) others.push_back(o);
    choice = others[rng_.below(others.size())];
  } else {
    choice = ctx.options[rng_.below(ctx.options.size())];
  }
  last_ = choice;
  return {choice};
}

void AllNoAgent::begin(const TaskEnvironment& env, std::uint64_t) {
  if (env.task() != TaskId::nback) {
    throw ConfigError(fmt::format("all_no baseline only applies to nback, not {}", to_string(env.task())));
  }
}

void OracleAgent::begin(const TaskEnvironment& env, std::uint64_t) { env_ = &env; }

AgentReply OracleAgent::respond(std::span<const ChatMessage>, const AgentContext&) {
  if (!env_) throw std::logic_error("oracle agent used before begin()");
  return {env_->oracle_action()};
}

void HumanAgent::begin(const TaskEnvironment&, std::uint64_t) { shown_ = 0; }

AgentReply HumanAgent::respond(std::span<const ChatMessage> messages, const AgentContext& ctx) {
  // A fresh conversation (oddball items) starts again from the system prompt.
  if (messages.size() < shown_) shown_ = 0;
  for (; shown_ < messages.size(); ++shown_) {
    const auto& m = messages[shown_];
    if (m.role == Role::assistant) continue;
    out_ << '[' << to_string(m.role) << "] " << m.content << '\n';
  }
  if (!ctx.options.empty()) {
    out_ << "(options:";
    for (const auto& o : ctx.options) out_ << ' ' << '"' << o << '"';
    out_ << ")\n";
  }
  out_ << "> " << std::flush;
  std::string line;
  if (!std::getline(in_, line)) throw TransportError("human input closed", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // The reply itself is appended to the history by the session; count it as
  // shown so it is not echoed back.
  ++shown_;
  return {line};
}

std::unique_ptr<Agent> make_baseline(std::string_view kind) {
  if (kind == "random") return std::make_unique<RandomAgent>();
  if (kind == "wsls") return std::make_unique<WslsAgent>();
  if (kind == "all_no") return std::make_unique<AllNoAgent>();
  if (kind == "oracle") return std::make_unique<OracleAgent>();
  if (kind.starts_with("constant:")) return std::make_unique<ConstantAgent>(std::string(kind.substr(9)));
  throw ConfigError(fmt::format("unknown baseline '{}' (random, wsls, all_no, oracle, constant:<text>)", kind));
}

}  // namespace reflect
