#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflect/config.hpp"
#include "reflect/parse.hpp"
#include "reflect/transcript.hpp"

namespace reflect {

struct StepResult {
  std::string feedback;
  nlohmann::json outcome = nlohmann::json::object();
};

// Text-facing side of a task: what the agent sees and how its replies are
// applied. Hidden parameters stay inside the implementation; the only way to
// read them from outside is oracle_action(), which exists for scripted
// oracle baselines and tests.
class TaskEnvironment {
 public:
  virtual ~TaskEnvironment() = default;

  virtual TaskId task() const = 0;
  virtual const TaskConfig& config() const = 0;
  virtual std::string system_prompt() const = 0;

  // Records this session will produce.
  virtual int total_steps() const = 0;
  virtual int steps_taken() const = 0;
  bool done() const { return steps_taken() >= total_steps(); }

  // Stimulus text for the next step (the previous feedback is prepended by
  // the session loop).
  virtual std::string observation() const = 0;

  // Tokens accepted by the parser at this step.
  virtual std::vector<ChoiceToken> tokens() const = 0;
  // Options a scripted random agent picks from and the retry prompt lists.
  virtual std::vector<std::string> choice_options() const;

  virtual std::optional<std::string> parse(std::string_view reply) const;

  // Extra instruction for the single re-prompt after an unparseable reply.
  virtual std::string retry_prompt() const;

  // Action applied when the reply cannot be parsed after the re-prompt.
  virtual std::string fallback_action(const std::optional<std::string>& last_valid) const;

  // Applies an action that parse() or fallback_action() produced.
  virtual StepResult step(const std::string& action) = 0;

  // True when each step is an independent conversation (oddball items).
  virtual bool independent_steps() const { return false; }

  virtual std::string oracle_action() const = 0;
};

}  // namespace reflect
