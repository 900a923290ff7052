#include "reflect/parse.hpp"

#include <cctype>

#include "reflect/wcst.hpp"

namespace reflect {

std::string_view strategy_suffix(Strategy strategy) {
  switch (strategy) {
    case Strategy::free: return "";
    case Strategy::direct:
      return "respond only with your choice directly without outputting any other "
             "information or analysis.";
    case Strategy::cot: return "let's think step by step.";
  }
  return "";
}

std::string apply_strategy(std::string_view user_prompt, Strategy strategy) {
  const auto suffix = strategy_suffix(strategy);
  std::string out(user_prompt);
  if (!suffix.empty()) {
    out += ' ';
    out += suffix;
  }
  return out;
}

std::string normalize_reply(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::optional<std::string> parse_choice(std::span<const ChoiceToken> tokens,
                                        std::string_view reply) {
  const std::string text = normalize_reply(reply);
  std::optional<std::string> best;
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  auto consider = [&](const std::string& form, const std::string& canonical) {
    const std::string needle = normalize_reply(form);
    if (needle.empty()) return;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + 1)) {
      const bool left_ok = pos == 0 || text[pos - 1] == ' ';
      const std::size_t end = pos + needle.size();
      const bool right_ok = end == text.size() || text[end] == ' ';
      if (!left_ok || !right_ok) continue;
      if (!best || pos > best_start || (pos == best_start && needle.size() > best_len)) {
        best = canonical;
        best_start = pos;
        best_len = needle.size();
      }
    }
  };
  for (const auto& token : tokens) {
    consider(token.canonical, token.canonical);
    for (const auto& alias : token.aliases) consider(alias, token.canonical);
  }
  return best;
}

std::vector<ChoiceToken> task_tokens(TaskId task) {
  switch (task) {
    case TaskId::wpt:
      return {{"sunny", {}}, {"rainy", {}}};
    case TaskId::wcst: {
      std::vector<ChoiceToken> out;
      for (const auto& card : wcst::default_desk()) out.push_back({wcst::to_string(card), {}});
      return out;
    }
    case TaskId::nback:
      return {{"Yes", {}}, {"No", {}}, {"Not Available", {"N/A"}}};
    case TaskId::dcigt:
      return {{"AAA", {}}, {"BBB", {}}, {"CCC", {}}, {"DDD", {}}};
    case TaskId::prlt:
    case TaskId::mbt:
      return {{"left arm", {"left"}}, {"right arm", {"right"}}};
    case TaskId::oddball:
      return {};
  }
  return {};
}

std::optional<std::string> parse_choice(TaskId task, std::string_view reply) {
  const auto tokens = task_tokens(task);
  return parse_choice(tokens, reply);
}

std::string retry_instruction(std::span<const std::string> options) {
  std::string out = "Respond with exactly one of: ";
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += ", ";
    out += options[i];
  }
  out += '.';
  return out;
}

}  // namespace reflect
