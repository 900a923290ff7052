#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/types.hpp"

namespace reflect {

// Suffix appended to every user prompt; empty for free output.
std::string_view strategy_suffix(Strategy strategy);
std::string apply_strategy(std::string_view user_prompt, Strategy strategy);

struct ChoiceToken {
  std::string canonical;
  std::vector<std::string> aliases;  // extra surface forms, canonical included implicitly
};

// Lower-cases and replaces every run of non-alphanumeric characters with a
// single space, so tokens match at word boundaries only ("no" never matches
// inside "not").
std::string normalize_reply(std::string_view text);

// Scans for every surface form of every token and returns the canonical token
// whose occurrence starts last in the reply (final-answer convention).
std::optional<std::string> parse_choice(std::span<const ChoiceToken> tokens,
                                        std::string_view reply);

// Default token tables (WCST uses the default desk).
std::vector<ChoiceToken> task_tokens(TaskId task);
std::optional<std::string> parse_choice(TaskId task, std::string_view reply);

// "Respond with exactly one of: a, b, c."
std::string retry_instruction(std::span<const std::string> options);

}  // namespace reflect
