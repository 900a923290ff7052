#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reflect {

enum class TaskId { wpt, wcst, oddball, nback, dcigt, prlt, mbt };
enum class Strategy { free, direct, cot };
enum class Difficulty { easy, hard, custom };

inline constexpr std::array<TaskId, 7> kAllTasks = {
    TaskId::wpt,   TaskId::wcst, TaskId::oddball, TaskId::nback,
    TaskId::dcigt, TaskId::prlt, TaskId::mbt};

// Thrown for bad user input: flags, config files, parameter values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed transcript or a replay that does not reproduce the stored data.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string message, int record_index = 0)
      : std::runtime_error(std::move(message)), record_index_(record_index) {}
  int record_index() const { return record_index_; }

 private:
  int record_index_;
};

// A remote call (or the human input stream) failed after the retry budget.
class TransportError : public std::runtime_error {
 public:
  TransportError(std::string message, int attempts = 0)
      : std::runtime_error(std::move(message)), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class UnsupportedTaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(TaskId task);
std::string_view to_string(Strategy strategy);
std::string_view to_string(Difficulty difficulty);

// Parsers accept the lower-case names above plus common aliases
// ("n-back", "dc-igt", "2-back"). They throw ConfigError on anything else.
TaskId parse_task(std::string_view text);
Strategy parse_strategy(std::string_view text);
Difficulty parse_difficulty(std::string_view text);

}  // namespace reflect
