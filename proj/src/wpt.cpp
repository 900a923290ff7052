#include "reflect/wpt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace reflect::wpt {
namespace {

constexpr std::string_view kSystemPrompt =
    "You are an expert forecaster working in a weather station. There are two devices "
    "collecting data from nature. Your task is to predict tomorrow's weather based on (1) "
    "today's weather and (2) the current states of four sensor devices in the weather "
    "station. Here's how the task works: 1. There are two devices, each represented by "
    "either 0 (inactive) or 1 (active). 2. The device states will be given to you in the "
    "format [d1,d2], where each d is either 0 or 1; 3. Based on these device states and "
    "today's weather, you need to predict whether tomorrow's weather will be sunny or rainy. "
    "4. After your prediction, I will inform you of the actual weather outcome. 5. We will "
    "repeat this process multiple times, and you should try to improve your predictions "
    "based on the feedback. At each time, make your prediction of the next day's weather "
    "('sunny' or 'rainy').";

int idx(Weather w) { return static_cast<int>(w); }
int idx(Sensor s) { return static_cast<int>(s); }

constexpr std::array<Sensor, 2> kSensors = {Sensor::stay_cue, Sensor::switch_cue};
constexpr std::array<Weather, 2> kWeathers = {Weather::sunny, Weather::rainy};

bool context_matches(const Matrices& est, const Matrices& truth, Sensor s, double tol) {
  for (auto today : kWeathers) {
    for (auto next : kWeathers) {
      if (std::abs(est[s][idx(today)][idx(next)] - truth[s][idx(today)][idx(next)]) > tol) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Weather w) { return w == Weather::sunny ? "sunny" : "rainy"; }
std::string_view to_string(Sensor s) { return s == Sensor::stay_cue ? "[1,0]" : "[0,1]"; }
std::string_view to_string(Pattern p) {
  static constexpr std::array<std::string_view, 5> names = {"A", "B", "C", "D", "E"};
  return names[static_cast<int>(p)];
}

Weather other(Weather w) { return w == Weather::sunny ? Weather::rainy : Weather::sunny; }

Weather parse_weather(std::string_view text) {
  if (text == "sunny") return Weather::sunny;
  if (text == "rainy") return Weather::rainy;
  throw ValidationError(fmt::format("unknown weather '{}'", text));
}

Sensor parse_sensor(std::string_view text) {
  if (text == "[1,0]") return Sensor::stay_cue;
  if (text == "[0,1]") return Sensor::switch_cue;
  throw ValidationError(fmt::format("unknown sensor state '{}'", text));
}

Matrices true_matrices(double p) {
  Matrices m;
  m[Sensor::stay_cue] = Matrix2{{{p, 1 - p}, {1 - p, p}}};
  m[Sensor::switch_cue] = Matrix2{{{1 - p, p}, {p, 1 - p}}};
  return m;
}

Chain::Chain(double p, Rng rng) : p_(p), rng_(rng) {
  today_ = rng_.below(2) == 0 ? Weather::sunny : Weather::rainy;
  sensor_ = rng_.below(2) == 0 ? Sensor::stay_cue : Sensor::switch_cue;
}

Weather Chain::step(Weather prediction) {
  const double stay = sensor_ == Sensor::stay_cue ? p_ : 1.0 - p_;
  const Weather next = rng_.bernoulli(stay) ? today_ : other(today_);
  history_.push_back({today_, sensor_, prediction, next});
  today_ = next;
  sensor_ = rng_.below(2) == 0 ? Sensor::stay_cue : Sensor::switch_cue;
  return next;
}

TransitionEstimate estimate_internal_matrices(std::span<const Trial> history) {
  TransitionEstimate est;
  std::array<std::array<std::array<int, 2>, 2>, 2> predicted{};  // [sensor][today][next]
  for (const auto& t : history) {
    ++est.counts[idx(t.sensor)][idx(t.today)];
    ++predicted[idx(t.sensor)][idx(t.today)][idx(t.prediction)];
  }
  for (auto s : kSensors) {
    for (auto today : kWeathers) {
      const int n = est.counts[idx(s)][idx(today)];
      for (auto next : kWeathers) {
        est.matrices[s][idx(today)][idx(next)] =
            n == 0 ? 0.5 : static_cast<double>(predicted[idx(s)][idx(today)][idx(next)]) / n;
      }
    }
  }
  return est;
}

double mean_absolute_error(const Matrices& estimate, const Matrices& truth) {
  double sum = 0.0;
  for (auto s : kSensors)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum += std::abs(estimate[s][i][j] - truth[s][i][j]);
  return sum / 8.0;
}

double max_mean_absolute_error(const Matrices& truth) {
  double sum = 0.0;
  for (auto s : kSensors)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum += std::max(truth[s][i][j], 1.0 - truth[s][i][j]);
  return sum / 8.0;
}

double score(const Matrices& estimate, const Matrices& truth) {
  const double max_mae = max_mean_absolute_error(truth);
  if (max_mae <= 0.0) throw std::domain_error("wpt: maximum MAE is zero");
  const double s = (1.0 - mean_absolute_error(estimate, truth) / max_mae) * 100.0;
  return std::clamp(s, 0.0, 100.0);
}

Pattern classify_pattern(const Matrices& est, const Matrices& truth,
                         const PatternThresholds& th) {
  const bool stay_match = context_matches(est, truth, Sensor::stay_cue, th.match);
  const bool switch_match = context_matches(est, truth, Sensor::switch_cue, th.match);
  if (stay_match && switch_match) return Pattern::A;

  auto stay_rate = [&](Sensor s) {
    return (est[s][0][0] + est[s][1][1]) / 2.0;
  };
  if (stay_rate(Sensor::stay_cue) >= th.stay_rate && stay_rate(Sensor::switch_cue) >= th.stay_rate) {
    return Pattern::B;
  }

  // Probability of predicting sunny in each context.
  auto q = [&](Sensor s, Weather today) { return est[s][idx(today)][idx(Weather::sunny)]; };
  double sensor_spread = 0.0;
  for (auto today : kWeathers) sensor_spread += std::abs(q(Sensor::stay_cue, today) - q(Sensor::switch_cue, today));
  sensor_spread /= 2.0;
  double today_spread = 0.0;
  for (auto s : kSensors) today_spread += std::abs(q(s, Weather::sunny) - q(s, Weather::rainy));
  today_spread /= 2.0;
  if (sensor_spread >= th.sensor_spread && today_spread <= th.today_spread) return Pattern::C;

  if (stay_match != switch_match) return Pattern::D;
  return Pattern::E;
}

Weather optimal_prediction(double p, Weather today, Sensor sensor) {
  const double stay = sensor == Sensor::stay_cue ? p : 1.0 - p;
  return stay >= 0.5 ? today : other(today);
}

WptTask::WptTask(TaskConfig config, std::uint64_t session_seed)
    : config_(std::move(config)),
      chain_(config_.param("p"), Rng::stream(session_seed, "environment")) {}

std::string WptTask::system_prompt() const { return std::string(kSystemPrompt); }

std::string WptTask::observation() const {
  return fmt::format("Today's weather: {}. Sensor states: {}.", to_string(chain_.today()),
                     to_string(chain_.sensor()));
}

std::vector<ChoiceToken> WptTask::tokens() const { return task_tokens(TaskId::wpt); }

std::string WptTask::fallback_action(const std::optional<std::string>&) const {
  return std::string(to_string(chain_.today()));
}

StepResult WptTask::step(const std::string& action) {
  const Weather today = chain_.today();
  const Sensor sensor = chain_.sensor();
  const Weather next = chain_.step(parse_weather(action));
  StepResult r;
  r.feedback = fmt::format("The actual weather is {}.", to_string(next));
  r.outcome = {{"today", to_string(today)}, {"sensor", to_string(sensor)}, {"actual", to_string(next)}};
  return r;
}

std::string WptTask::oracle_action() const {
  return std::string(to_string(optimal_prediction(chain_.p(), chain_.today(), chain_.sensor())));
}

TaskScore score_transcript(const Transcript& t) {
  std::vector<Trial> history;
  history.reserve(t.records.size());
  for (const auto& r : t.records) {
    history.push_back({parse_weather(outcome_at(r, "today").get<std::string>()),
                       parse_sensor(outcome_at(r, "sensor").get<std::string>()),
                       parse_weather(r.action),
                       parse_weather(outcome_at(r, "actual").get<std::string>())});
  }
  const Matrices truth = true_matrices(t.config.param("p"));
  const TransitionEstimate est = estimate_internal_matrices(history);

  TaskScore s;
  s.task = TaskId::wpt;
  s.score = score(est.matrices, truth);
  s.metrics = {{"mae", mean_absolute_error(est.matrices, truth)},
               {"max_mae", max_mean_absolute_error(truth)}};
  nlohmann::json matrices;
  for (auto sensor : kSensors) {
    matrices[std::string(to_string(sensor))] = est.matrices[sensor];
  }
  s.behavior = {{"pattern", to_string(classify_pattern(est.matrices, truth))},
                {"estimate", matrices},
                {"counts", est.counts}};
  return s;
}

}  // namespace reflect::wpt
