#include "reflect/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace reflect {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(TaskId task) {
  switch (task) {
    case TaskId::wpt: return "wpt";
    case TaskId::wcst: return "wcst";
    case TaskId::oddball: return "oddball";
    case TaskId::nback: return "nback";
    case TaskId::dcigt: return "dcigt";
    case TaskId::prlt: return "prlt";
    case TaskId::mbt: return "mbt";
  }
  return "?";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::free: return "free";
    case Strategy::direct: return "direct";
    case Strategy::cot: return "cot";
  }
  return "?";
}

std::string_view to_string(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::easy: return "easy";
    case Difficulty::hard: return "hard";
    case Difficulty::custom: return "custom";
  }
  return "?";
}

TaskId parse_task(std::string_view text) {
  const std::string t = lower(text);
  if (t == "wpt" || t == "weather") return TaskId::wpt;
  if (t == "wcst") return TaskId::wcst;
  if (t == "oddball") return TaskId::oddball;
  if (t == "nback" || t == "n-back" || t == "2-back") return TaskId::nback;
  if (t == "dcigt" || t == "dc-igt" || t == "igt") return TaskId::dcigt;
  if (t == "prlt") return TaskId::prlt;
  if (t == "mbt") return TaskId::mbt;
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

Strategy parse_strategy(std::string_view text) {
  const std::string t = lower(text);
  if (t == "free") return Strategy::free;
  if (t == "direct") return Strategy::direct;
  if (t == "cot") return Strategy::cot;
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

Difficulty parse_difficulty(std::string_view text) {
  const std::string t = lower(text);
  if (t == "easy") return Difficulty::easy;
  if (t == "hard") return Difficulty::hard;
  if (t == "custom") return Difficulty::custom;
  throw ConfigError("unknown difficulty '" + std::string(text) + "'");
}

}  // namespace reflect
