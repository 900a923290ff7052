#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "reflect/agents.hpp"
#include "reflect/environment.hpp"
#include "reflect/oddball.hpp"
#include "reflect/transcript.hpp"

namespace reflect {

// Fresh environment for a config; all hidden randomness comes from the
// session seed. Validates the config first.
std::unique_ptr<TaskEnvironment> make_environment(const TaskConfig& config, std::uint64_t session_seed);

struct SessionOptions {
  std::string session_id = "1";
  Strategy strategy = Strategy::free;
  std::uint64_t seed = 0;
  int max_retries = 1;
  // Oddball scoring; the hash embedder is used when null.
  oddball::Embedder* embedder = nullptr;
};

// Feedback from the previous step followed by the next observation.
std::string join_prompt(const std::string& feedback, const std::string& observation);

// Runs the trial loop to completion. A TransportError from the agent ends the
// session early: the transcript comes back with status aborted, the records
// played so far, the error text, and no score.
Transcript run_session(TaskEnvironment& env, Agent& agent, const SessionOptions& options);

// Pure scoring of a stored transcript.
TaskScore score_transcript(const Transcript& transcript, oddball::Embedder* embedder = nullptr);

// Validates structure, re-simulates the environment from the stored config
// and seed using the stored actions, checks that every prompt, feedback and
// outcome is reproduced, and scores. Throws ValidationError naming the first
// record that disagrees.
TaskScore replay(const Transcript& transcript, oddball::Embedder* embedder = nullptr);

}  // namespace reflect
