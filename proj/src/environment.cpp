#include "reflect/environment.hpp"

namespace reflect {

std::vector<std::string> TaskEnvironment::choice_options() const {
  std::vector<std::string> out;
  for (const auto& token : tokens()) out.push_back(token.canonical);
  return out;
}

std::optional<std::string> TaskEnvironment::parse(std::string_view reply) const {
  const auto table = tokens();
  return parse_choice(table, reply);
}

std::string TaskEnvironment::retry_prompt() const {
  const auto options = choice_options();
  return retry_instruction(options);
}

std::string TaskEnvironment::fallback_action(const std::optional<std::string>& last_valid) const {
  if (last_valid) return *last_valid;
  return choice_options().front();
}

}  // namespace reflect
