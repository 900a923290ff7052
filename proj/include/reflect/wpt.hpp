#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

// Weather prediction: a two-state weather chain whose transition matrix is
// picked each day by a two-device sensor cue.
namespace reflect::wpt {

enum class Weather { sunny = 0, rainy = 1 };
// stay_cue is the sensor reading [1,0], switch_cue is [0,1].
enum class Sensor { stay_cue = 0, switch_cue = 1 };

// matrix[today][next]
using Matrix2 = std::array<std::array<double, 2>, 2>;

struct Matrices {
  std::array<Matrix2, 2> by_sensor{};  // indexed by Sensor
  const Matrix2& operator[](Sensor s) const { return by_sensor[static_cast<int>(s)]; }
  Matrix2& operator[](Sensor s) { return by_sensor[static_cast<int>(s)]; }
};

struct Trial {
  Weather today;
  Sensor sensor;
  Weather prediction;
  Weather actual_next;
};

struct TransitionEstimate {
  Matrices matrices;
  std::array<std::array<int, 2>, 2> counts{};  // [sensor][today]
};

enum class Pattern { A, B, C, D, E };

// Cut-offs for pattern labels. The labels are qualitative; these are tunable.
struct PatternThresholds {
  double match = 0.15;        // max entry error for a sensor context to "match"
  double stay_rate = 0.85;    // B: predicts today's weather in both contexts
  double sensor_spread = 0.5; // C: prediction depends on the sensor...
  double today_spread = 0.15; // ...but not on today's weather
};

std::string_view to_string(Weather w);
std::string_view to_string(Sensor s);  // "[1,0]" / "[0,1]"
std::string_view to_string(Pattern p);
Weather other(Weather w);
Weather parse_weather(std::string_view text);
Sensor parse_sensor(std::string_view text);

Matrices true_matrices(double p);

class Chain {
 public:
  // Initial weather and sensor are uniform draws from `rng`.
  Chain(double p, Rng rng);

  Weather today() const { return today_; }
  Sensor sensor() const { return sensor_; }
  double p() const { return p_; }

  // Samples tomorrow from the sensor-selected row of today, records the
  // trial, and draws the next sensor uniformly.
  Weather step(Weather prediction);

  const std::vector<Trial>& history() const { return history_; }

 private:
  double p_;
  Rng rng_;
  Weather today_;
  Sensor sensor_;
  std::vector<Trial> history_;
};

// entry (today -> next | sensor) = share of predictions equal to `next` in
// that context; unobserved contexts get the uniform row.
TransitionEstimate estimate_internal_matrices(std::span<const Trial> history);

double mean_absolute_error(const Matrices& estimate, const Matrices& truth);
// Mean over entries of max(t, 1 - t): the error of the most wrong estimate.
double max_mean_absolute_error(const Matrices& truth);
// (1 - MAE / Max_MAE) * 100 clamped to [0, 100]. Throws std::domain_error
// when Max_MAE is zero.
double score(const Matrices& estimate, const Matrices& truth);

Pattern classify_pattern(const Matrices& estimate, const Matrices& truth,
                         const PatternThresholds& thresholds = {});

// Prediction a Bayes-optimal deterministic forecaster makes.
Weather optimal_prediction(double p, Weather today, Sensor sensor);

class WptTask : public TaskEnvironment {
 public:
  WptTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::wpt; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return config_.trials; }
  int steps_taken() const override { return static_cast<int>(chain_.history().size()); }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  std::string fallback_action(const std::optional<std::string>& last_valid) const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

 private:
  TaskConfig config_;
  Chain chain_;
};

TaskScore score_transcript(const Transcript& transcript);

}  // namespace reflect::wpt
