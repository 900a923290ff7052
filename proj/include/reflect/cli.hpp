#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reflect {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitValidation = 4;

// Entry point of the reflection_bench tool: `run`, `chance`, `report`.
// `in` feeds the human agent; `out` and `err` receive all console output.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace reflect
