#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "reflect/agents.hpp"
#include "reflect/config.hpp"
#include "reflect/session.hpp"
#include "reflect/transcript.hpp"

namespace testing {

inline reflect::Transcript play(const reflect::TaskConfig& config, reflect::Agent& agent, std::uint64_t seed,
                                reflect::Strategy strategy = reflect::Strategy::free) {
  auto env = reflect::make_environment(config, seed);
  reflect::SessionOptions opt;
  opt.seed = seed;
  opt.strategy = strategy;
  opt.session_id = "t-1";
  return reflect::run_session(*env, agent, opt);
}

inline reflect::Transcript play(const reflect::TaskConfig& config, const std::string& baseline, std::uint64_t seed,
                                reflect::Strategy strategy = reflect::Strategy::free) {
  auto agent = reflect::make_baseline(baseline);
  return play(config, *agent, seed, strategy);
}

inline std::string dump(const reflect::Transcript& t) {
  std::ostringstream out;
  reflect::write_jsonl(t, out);
  return out.str();
}

// Fresh directory under the build tree, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("reflect_" + name + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace testing
