#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

// Oddball perception: seven on-topic sentences with one unrelated sentence
// mixed in. The agent comments freely; surprise is the best cosine
// similarity between any sentence of the reply and a standard surprise
// sentence.
namespace reflect::oddball {

inline constexpr int kSentences = 8;
inline constexpr int kMinDeviant = 2;  // 1-based deviant positions
inline constexpr int kMaxDeviant = 7;

struct Item {
  std::string id;
  std::string topic;
  std::vector<std::string> sentences;  // all eight, deviant included
  int deviant = 5;                     // 1-based position in `sentences`

  const std::string& deviant_sentence() const { return sentences[deviant - 1]; }
  std::string text() const;
};

// Throws ConfigError for anything but eight sentences with the deviant in
// [2, 7].
void check_item(const Item& item);

// Moves the deviant to `position`, keeping the topic sentences in order.
Item with_deviant_at(const Item& item, int position);

const std::vector<Item>& builtin_corpus();

// One JSON object per line: {id, topic, sentences[8], deviant_index}, with a
// 1-based deviant_index.
std::vector<Item> load_corpus(const std::filesystem::path& path);
void save_corpus(std::span<const Item> items, const std::filesystem::path& path);

// The four graded responses to the Great Wall item, levels 0..3.
struct AnnotatedResponse {
  int level;
  std::string text;
};
const std::vector<AnnotatedResponse>& annotated_examples();

// Splits on runs of . ! ? followed by whitespace (or the end). Common
// abbreviations do not end a sentence. Text without a terminator comes back
// whole.
std::vector<std::string> split_sentences(std::string_view text);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

// Offline embedder: word unigrams and bigrams feature-hashed (FNV-1a) into a
// fixed number of buckets, raw counts.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimensions = 4096) : dims_(dimensions) {}
  std::string name() const override { return "hash"; }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;
  std::vector<double> embed_one(std::string_view text) const;

 private:
  std::size_t dims_;
};

double cosine(std::span<const double> a, std::span<const double> b);

struct SurpriseScore {
  std::vector<std::string> sentences;
  std::vector<double> similarities;
  double max_similarity = 0.0;
  double score = 0.0;  // 100 * max_similarity clamped to [0, 100]
  std::optional<int> human_label;
};

SurpriseScore score_surprise(std::string_view response, std::string_view standard_sentence,
                             Embedder& embedder);

// Pearson r between the means of consecutive groups of `aggregation` pairs
// (a trailing partial group is dropped). Throws std::invalid_argument with
// fewer than two groups or zero variance.
double validate_scoring(std::span<const double> automated, std::span<const double> human,
                        int aggregation = 10);
double pearson(std::span<const double> x, std::span<const double> y);

class OddballTask : public TaskEnvironment {
 public:
  // Items are the first config.trials corpus entries; with randomize_deviant
  // each deviant moves to a seeded position in [2, 7].
  OddballTask(TaskConfig config, std::uint64_t session_seed,
              std::vector<Item> corpus = builtin_corpus());

  TaskId task() const override { return TaskId::oddball; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return static_cast<int>(items_.size()); }
  int steps_taken() const override { return position_; }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override { return {}; }
  std::vector<std::string> choice_options() const override { return {}; }
  std::optional<std::string> parse(std::string_view reply) const override;
  std::string retry_prompt() const override;
  std::string fallback_action(const std::optional<std::string>& last_valid) const override;
  StepResult step(const std::string& action) override;
  bool independent_steps() const override { return true; }
  std::string oracle_action() const override;

  const std::vector<Item>& items() const { return items_; }

 private:
  TaskConfig config_;
  std::vector<Item> items_;
  int position_ = 0;
};

// Corpus named by the "corpus" option, else the built-in one.
std::vector<Item> corpus_for(const TaskConfig& config);

// Mean surprise over scored items. Invalid records score 0. When `embedder`
// fails for an item (TransportError) the item is left unscored and a warning
// is recorded. Without an embedder the hash embedder is used for "hash"
// configs; otherwise per-item scores stored in the transcript summary are
// reused.
TaskScore score_transcript(const Transcript& transcript, Embedder* embedder = nullptr);

}  // namespace reflect::oddball
