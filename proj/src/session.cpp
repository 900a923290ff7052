#include "reflect/session.hpp"

#include <fmt/format.h>

#include "reflect/bandit.hpp"
#include "reflect/dcigt.hpp"
#include "reflect/nback.hpp"
#include "reflect/wcst.hpp"
#include "reflect/wpt.hpp"

namespace reflect {

std::unique_ptr<TaskEnvironment> make_environment(const TaskConfig& config, std::uint64_t seed) {
  validate(config);
  switch (config.task) {
    case TaskId::wpt: return std::make_unique<wpt::WptTask>(config, seed);
    case TaskId::wcst: return std::make_unique<wcst::WcstTask>(config, seed);
    case TaskId::oddball:
      return std::make_unique<oddball::OddballTask>(config, seed, oddball::corpus_for(config));
    case TaskId::nback: return std::make_unique<nback::NbackTask>(config, seed);
    case TaskId::dcigt: return std::make_unique<dcigt::DcigtTask>(config, seed);
    case TaskId::prlt: return std::make_unique<bandit::PrltTask>(config, seed);
    case TaskId::mbt: return std::make_unique<bandit::MbtTask>(config, seed);
  }
  throw ConfigError("unknown task");
}

std::string join_prompt(const std::string& feedback, const std::string& observation) {
  if (feedback.empty()) return observation;
  const char last = feedback.back();
  const bool terminated = last == '.' || last == '!' || last == '?';
  return feedback + (terminated ? " " : ". ") + observation;
}

Transcript run_session(TaskEnvironment& env, Agent& agent, const SessionOptions& opt) {
  Transcript t;
  t.session_id = opt.session_id;
  t.task = env.task();
  t.strategy = opt.strategy;
  t.seed = opt.seed;
  t.agent = agent.name();
  t.system_prompt = env.system_prompt();
  t.max_retries = opt.max_retries;
  t.config = env.config();

  agent.begin(env, opt.seed);
  std::vector<ChatMessage> messages{{Role::system, t.system_prompt}};
  std::string feedback;
  std::optional<std::string> last_valid;

  try {
    while (!env.done()) {
      if (env.independent_steps()) messages.resize(1);
      TrialRecord rec;
      rec.index = env.steps_taken() + 1;
      rec.prompt = apply_strategy(join_prompt(feedback, env.observation()), opt.strategy);
      messages.push_back({Role::user, rec.prompt});

      AgentContext ctx{env.task(), rec.index, env.choice_options(), feedback, false};
      AgentReply reply = agent.respond(messages, ctx);
      messages.push_back({Role::assistant, reply.text});
      auto parsed = env.parse(reply.text);
      nlohmann::json rejected = nlohmann::json::array();
      while (!parsed && rec.retries_used < opt.max_retries) {
        rejected.push_back(reply.text);
        ++rec.retries_used;
        messages.push_back({Role::user, env.retry_prompt()});
        ctx.retry = true;
        reply = agent.respond(messages, ctx);
        messages.push_back({Role::assistant, reply.text});
        parsed = env.parse(reply.text);
      }

      rec.raw_response = reply.text;
      rec.valid = parsed.has_value();
      rec.parsed_action = parsed;
      rec.action = parsed ? *parsed : env.fallback_action(last_valid);
      if (!reply.meta.empty()) rec.meta = reply.meta;
      if (!rejected.empty()) rec.meta["rejected_replies"] = rejected;

      StepResult step = env.step(rec.action);
      rec.feedback = step.feedback;
      rec.outcome = std::move(step.outcome);
      if (parsed) last_valid = parsed;
      feedback = rec.feedback;
      t.records.push_back(std::move(rec));
    }
  } catch (const TransportError& e) {
    t.status = SessionStatus::aborted;
    t.error = fmt::format("agent transport failure after {} attempt(s): {}", e.attempts(), e.what());
    return t;
  }
  t.score = reflect::score_transcript(t, opt.embedder);
  return t;
}

TaskScore score_transcript(const Transcript& t, oddball::Embedder* embedder) {
  switch (t.task) {
    case TaskId::wpt: return wpt::score_transcript(t);
    case TaskId::wcst: return wcst::score_transcript(t);
    case TaskId::oddball: return oddball::score_transcript(t, embedder);
    case TaskId::nback: return nback::score_transcript(t);
    case TaskId::dcigt: return dcigt::score_transcript(t);
    case TaskId::prlt: return bandit::score_prlt_transcript(t);
    case TaskId::mbt: return bandit::score_mbt_transcript(t);
  }
  throw ValidationError("unknown task");
}

TaskScore replay(const Transcript& t, oddball::Embedder* embedder) {
  if (t.status != SessionStatus::completed) {
    throw ValidationError(fmt::format("session {} was aborted: {}", t.session_id, t.error));
  }
  if (t.config.task != t.task) throw ValidationError("header task and config task disagree");
  validate_structure(t);
  std::unique_ptr<TaskEnvironment> env;
  try {
    env = make_environment(t.config, t.seed);
  } catch (const ConfigError& e) {
    throw ValidationError(fmt::format("stored config is invalid: {}", e.what()));
  }
  if (env->system_prompt() != t.system_prompt) throw ValidationError("system prompt does not match the config");

  std::string feedback;
  std::optional<std::string> last_valid;
  for (const auto& r : t.records) {
    auto fail = [&](std::string_view what) {
      throw ValidationError(fmt::format("record {}: {}", r.index, what), r.index);
    };
    if (env->done()) fail("more records than the environment has steps");
    const auto prompt = apply_strategy(join_prompt(feedback, env->observation()), t.strategy);
    if (prompt != r.prompt) fail("prompt does not match the re-simulated environment");
    if (r.valid) {
      if (env->parse(r.raw_response) != r.parsed_action) fail("parsed_action does not match raw_response");
      if (r.action != *r.parsed_action) fail("action differs from parsed_action");
    } else if (r.action != env->fallback_action(last_valid)) {
      fail("action is not the fallback action");
    }
    StepResult step;
    try {
      step = env->step(r.action);
    } catch (const std::exception& e) {
      fail(fmt::format("action rejected by the environment ({})", e.what()));
    }
    if (step.feedback != r.feedback) fail("feedback does not match the re-simulated environment");
    if (step.outcome != r.outcome) fail("outcome does not match the re-simulated environment");
    if (r.valid) last_valid = r.parsed_action;
    feedback = step.feedback;
  }
  return reflect::score_transcript(t, embedder);
}

}  // namespace reflect
