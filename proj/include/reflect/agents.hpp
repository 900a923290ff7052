#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"
#include "reflect/transcript.hpp"

namespace reflect {

// What the session loop tells an agent besides the chat history. Everything
// here is already visible in the prompt text.
struct AgentContext {
  TaskId task = TaskId::wpt;
  int step = 1;                      // 1-based record index
  std::vector<std::string> options;  // canonical choices; empty for free text
  std::string feedback;              // previous step's feedback
  bool retry = false;                // this call is the re-prompt
};

struct AgentReply {
  std::string text;
  nlohmann::json meta = nlohmann::json::object();
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Called once before the first step of a session. Baselines derive their
  // random stream from the session seed here.
  virtual void begin(const TaskEnvironment& env, std::uint64_t session_seed);
  virtual AgentReply respond(std::span<const ChatMessage> messages, const AgentContext& ctx) = 0;
};

// Whether the feedback text reports a win for the previous action. Empty when
// the task gives no reward feedback (n-back, oddball).
std::optional<bool> feedback_is_win(TaskId task, const std::string& feedback,
                                    const std::string& last_action);

// Reply of the random baseline when there is nothing to choose from.
inline constexpr std::string_view kNeutralComment = "These sentences are interesting.";

class RandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  void begin(const TaskEnvironment& env, std::uint64_t session_seed) override;
  AgentReply respond(std::span<const ChatMessage> messages, const AgentContext& ctx) override;

 private:
  Rng rng_{0};
};

// Win-stay-lose-switch: repeats the previous choice after a win, picks
// uniformly among the other options after a loss, and picks uniformly when
// there is no previous choice or no reward signal.
class WslsAgent : public Agent {
 public:
  std::string name() const override { return "wsls"; }
  void begin(const TaskEnvironment& env, std::uint64_t session_seed) override;
  AgentReply respond(std::span<const ChatMessage> messages, const AgentContext& ctx) override;

 private:
  Rng rng_{0};
  std::optional<std::string> last_;
};

class ConstantAgent : public Agent {
 public:
  explicit ConstantAgent(std::string text) : text_(std::move(text)) {}
  std::string name() const override { return "constant:" + text_; }
  AgentReply respond(std::span<const ChatMessage>, const AgentContext&) override { return {text_}; }

 private:
  std::string text_;
};

// "No" on every n-back letter. Rejects other tasks.
class AllNoAgent : public Agent {
 public:
  std::string name() const override { return "all_no"; }
  void begin(const TaskEnvironment& env, std::uint64_t session_seed) override;
  AgentReply respond(std::span<const ChatMessage>, const AgentContext&) override { return {"No"}; }
};

// Plays the environment's own best action. Test and reference use only.
class OracleAgent : public Agent {
 public:
  std::string name() const override { return "oracle"; }
  void begin(const TaskEnvironment& env, std::uint64_t session_seed) override;
  AgentReply respond(std::span<const ChatMessage>, const AgentContext&) override;

 private:
  const TaskEnvironment* env_ = nullptr;
};

// A person at a terminal: prints every message it has not shown yet and
// reads one line per reply. End of input is a transport failure.
class HumanAgent : public Agent {
 public:
  HumanAgent(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  std::string name() const override { return "human"; }
  void begin(const TaskEnvironment& env, std::uint64_t session_seed) override;
  AgentReply respond(std::span<const ChatMessage> messages, const AgentContext& ctx) override;

 private:
  std::istream& in_;
  std::ostream& out_;
  std::size_t shown_ = 0;
};

// "random", "wsls", "all_no", "oracle", "constant:<text>". Throws ConfigError.
std::unique_ptr<Agent> make_baseline(std::string_view kind);

}  // namespace reflect
