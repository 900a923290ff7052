#include "reflect/oddball.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "reflect/parse.hpp"

namespace reflect::oddball {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_abbreviation(std::string_view word) {
  std::string w;
  for (char c : word) {
    if (c != '.' && c != '(' && c != '"' && c != '\'') w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  static const std::vector<std::string> known = {"mr", "mrs", "ms", "dr", "prof", "sr",
                                                 "jr", "st", "vs", "eg", "ie", "approx"};
  return std::find(known.begin(), known.end(), w) != known.end();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

Item make_item(std::string id, std::string topic, std::vector<std::string> sentences, int deviant) {
  Item it{std::move(id), std::move(topic), std::move(sentences), deviant};
  check_item(it);
  return it;
}

}  // namespace

std::string Item::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

void check_item(const Item& item) {
  if (item.sentences.size() != kSentences) {
    throw ConfigError(fmt::format("oddball item '{}': expected {} sentences, got {}", item.id,
                                  kSentences, item.sentences.size()));
  }
  if (item.deviant < kMinDeviant || item.deviant > kMaxDeviant) {
    throw ConfigError(fmt::format("oddball item '{}': deviant position {} outside [{}, {}]", item.id,
                                  item.deviant, kMinDeviant, kMaxDeviant));
  }
  for (const auto& s : item.sentences) {
    if (trim(s).empty()) throw ConfigError(fmt::format("oddball item '{}': empty sentence", item.id));
  }
}

Item with_deviant_at(const Item& item, int position) {
  Item out = item;
  std::string deviant = item.deviant_sentence();
  out.sentences.erase(out.sentences.begin() + (item.deviant - 1));
  out.sentences.insert(out.sentences.begin() + (position - 1), std::move(deviant));
  out.deviant = position;
  return out;
}

const std::vector<Item>& builtin_corpus() {
  static const std::vector<Item> corpus = {
      make_item("great-wall", "the Great Wall of China",
                {"The Great Wall of China is an ancient structure.", "It stretches over 13,000 miles.",
                 "The wall was built for defense purposes.", "Many tourists visit it each year.",
                 "Bananas are rich in potassium.", "Parts of the wall date back to the 7th century BCE.",
                 "Some sections are well-preserved.", "The wall is visible from space."},
                5),
      make_item("honeybees", "honeybees",
                {"Honeybees live in large colonies.", "Each colony has a single queen.",
                 "Worker bees gather nectar from flowers.", "The stock market closed higher on Friday.",
                 "Bees communicate through a waggle dance.", "Honey is made from stored nectar.",
                 "Drones exist mainly to mate with the queen.", "Bees help pollinate many crops."},
                4),
      make_item("volcanoes", "volcanoes",
                {"Volcanoes form where magma reaches the surface.", "Many sit along tectonic plate boundaries.",
                 "Eruptions can send ash high into the sky.", "Lava cools into new rock.",
                 "Some volcanoes have been dormant for centuries.", "My cousin prefers blue socks.",
                 "Scientists monitor tremors to predict eruptions.", "Volcanic soil is often very fertile."},
                6),
      make_item("photosynthesis", "photosynthesis",
                {"Plants make food through photosynthesis.", "Jazz originated in New Orleans.",
                 "Chlorophyll captures energy from sunlight.", "Carbon dioxide enters through the leaves.",
                 "Water is drawn up from the roots.", "Glucose is produced as a result.",
                 "Oxygen is released into the air.", "Most of this happens in the leaves."},
                2),
      make_item("moon", "the Moon",
                {"The Moon orbits the Earth about once a month.", "It has no atmosphere to speak of.",
                 "Its surface is covered in craters.", "The same side always faces us.",
                 "Astronauts first walked there in 1969.", "Its gravity drives the ocean tides.",
                 "Carrots grow best in loose soil.", "The Moon slowly drifts away from Earth."},
                7),
      make_item("coffee", "coffee",
                {"Coffee is brewed from roasted beans.", "The plant is grown in tropical regions.",
                 "Penguins cannot fly.", "Arabica and robusta are the main varieties.",
                 "Caffeine is its best-known ingredient.", "Espresso is made under high pressure.",
                 "Many people drink it every morning.", "Light roasts keep more acidity."},
                3),
      make_item("chess", "chess",
                {"Chess is played on a board of 64 squares.", "Each player starts with sixteen pieces.",
                 "The knight moves in an L shape.", "The goal is to checkmate the king.",
                 "A mountain goat can climb steep cliffs.", "Pawns can be promoted on the last rank.",
                 "Castling moves the king and a rook together.", "Openings have been studied for centuries."},
                5),
      make_item("bicycles", "bicycles",
                {"Bicycles are powered by pedaling.", "Most have two wheels and a chain drive.",
                 "Gears make climbing hills easier.", "Mozart wrote his first symphony as a child.",
                 "Brakes press pads against the rims or discs.", "Helmets reduce the risk of head injury.",
                 "Many cities now have bike lanes.", "Cycling is good aerobic exercise."},
                4),
      make_item("heart", "the human heart",
                {"The human heart has four chambers.", "It pumps blood through the whole body.",
                 "Valves keep the blood flowing one way.", "An adult heart beats about seventy times a minute.",
                 "The right side sends blood to the lungs.", "Glaciers carve deep valleys over time.",
                 "Coronary arteries supply the heart muscle.", "Exercise strengthens the heart."},
                6),
      make_item("lighthouses", "lighthouses",
                {"Lighthouses guide ships near dangerous coasts.", "Strawberries are not true berries.",
                 "Their lamps were once fueled by oil.", "A lens focuses the light into a beam.",
                 "Each lighthouse has its own flash pattern.", "Keepers used to live on site.",
                 "Most are now fully automated.", "Many old towers are museums today."},
                2),
  };
  return corpus;
}

std::vector<Item> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open oddball corpus {}", path.string()));
  std::vector<Item> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Item it{j.at("id").get<std::string>(), j.value("topic", std::string{}),
              j.at("sentences").get<std::vector<std::string>>(), j.at("deviant_index").get<int>()};
      check_item(it);
      items.push_back(std::move(it));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  if (items.empty()) throw ConfigError(fmt::format("oddball corpus {} is empty", path.string()));
  return items;
}

void save_corpus(std::span<const Item> items, const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& it : items) {
    nlohmann::json j = {{"id", it.id}, {"topic", it.topic}, {"sentences", it.sentences},
                        {"deviant_index", it.deviant}};
    out << j.dump() << '\n';
  }
}

const std::vector<AnnotatedResponse>& annotated_examples() {
  static const std::vector<AnnotatedResponse> examples = {
      {0, "Wow, 13,000 miles is long! Ancient defense against potassium-rich invaders? Not sure "
          "about being visible from space, that's a myth. It's still amazing though!"},
      {1, "The Great Wall of China is truly ancient and impressive. Over 13,000 miles is an "
          "astonishing length! Defense was a primary reason for its construction. It's clearly a "
          "major tourist attraction. Interesting note about bananas being rich in potassium. Some "
          "sections dating back to the 7th century BCE adds to its historical significance. It's "
          "good to know some parts are well-preserved. There’s debate about its visibility "
          "from space, but it remains a popular claim."},
      {2, "The Great Wall of China is indeed a remarkable ancient structure. Stretching over 13,000 "
          "miles showcases its immense scale. It was primarily built for defense, highlighting its "
          "historical significance. Its popularity among tourists reflects its cultural importance. "
          "Interesting fact about bananas being rich in potassium, though unrelated to the Great "
          "Wall. Parts dating back to the 7th century BCE emphasize its long history. "
          "Well-preserved sections allow visitors to appreciate its original construction. The "
          "idea that the wall is visible from space is a common misconception."},
      {3, "Interesting fact about the wall's age... wait, what's with the bananas? That seems out "
          "of place. Anyway, 7th century BCE is impressive. I'm not sure if it's entirely visible "
          "from space, though - I've heard that's a myth."},
  };
  return examples;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    while (i < text.size() && (text[i] == '.' || text[i] == '!' || text[i] == '?')) ++i;
    // Closing quotes and brackets stay with their sentence.
    while (i < text.size() && (text[i] == '"' || text[i] == '\'' || text[i] == ')')) ++i;
    if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) continue;
    if (i - run_begin == 1 && text[run_begin] == '.') {
      std::size_t w = run_begin;
      while (w > start && !std::isspace(static_cast<unsigned char>(text[w - 1]))) --w;
      if (is_abbreviation(text.substr(w, run_begin - w))) continue;
    }
    emit(i);
  }
  emit(text.size());
  return out;
}

std::vector<double> HashEmbedder::embed_one(std::string_view text) const {
  std::vector<double> v(dims_, 0.0);
  const std::string norm = normalize_reply(text);
  std::vector<std::string_view> words;
  std::string_view rest = norm;
  while (!rest.empty()) {
    const auto sp = rest.find(' ');
    words.push_back(rest.substr(0, sp));
    if (sp == std::string_view::npos) break;
    rest.remove_prefix(sp + 1);
  }
  for (std::size_t k = 0; k < words.size(); ++k) {
    v[fnv1a(words[k]) % dims_] += 1.0;
    if (k + 1 < words.size()) {
      std::string bigram(words[k]);
      bigram += ' ';
      bigram += words[k + 1];
      v[fnv1a(bigram) % dims_] += 1.0;
    }
  }
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SurpriseScore score_surprise(std::string_view response, std::string_view standard_sentence,
                             Embedder& embedder) {
  SurpriseScore s;
  s.sentences = split_sentences(response);
  if (s.sentences.empty()) return s;
  std::vector<std::string> batch{std::string(standard_sentence)};
  batch.insert(batch.end(), s.sentences.begin(), s.sentences.end());
  const auto vecs = embedder.embed(batch);
  if (vecs.size() != batch.size()) throw std::runtime_error("embedder returned the wrong number of vectors");
  s.max_similarity = -1.0;
  for (std::size_t i = 1; i < vecs.size(); ++i) {
    const double c = cosine(vecs[0], vecs[i]);
    s.similarities.push_back(c);
    s.max_similarity = std::max(s.max_similarity, c);
  }
  s.score = 100.0 * std::clamp(s.max_similarity, 0.0, 1.0);
  return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need paired data");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double validate_scoring(std::span<const double> automated, std::span<const double> human,
                        int aggregation) {
  if (automated.size() != human.size()) throw std::invalid_argument("validate_scoring: unpaired data");
  if (aggregation < 1) throw std::invalid_argument("validate_scoring: aggregation must be positive");
  const std::size_t groups = automated.size() / aggregation;
  if (groups < 2) throw std::invalid_argument("validate_scoring: fewer than two aggregated points");
  std::vector<double> a(groups), h(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto off = g * aggregation;
    a[g] = std::accumulate(automated.begin() + off, automated.begin() + off + aggregation, 0.0) / aggregation;
    h[g] = std::accumulate(human.begin() + off, human.begin() + off + aggregation, 0.0) / aggregation;
  }
  return pearson(a, h);
}

std::vector<Item> corpus_for(const TaskConfig& config) {
  const auto path = config.option("corpus");
  return path.empty() ? builtin_corpus() : load_corpus(path);
}

OddballTask::OddballTask(TaskConfig config, std::uint64_t session_seed, std::vector<Item> corpus)
    : config_(std::move(config)) {
  if (config_.trials > static_cast<int>(corpus.size())) {
    throw ConfigError(fmt::format("oddball: {} items requested but the corpus has {}", config_.trials,
                                  corpus.size()));
  }
  Rng rng = Rng::stream(session_seed, "environment");
  const bool randomize = config_.flag("randomize_deviant");
  for (int i = 0; i < config_.trials; ++i) {
    const auto& item = corpus[i];
    if (randomize) {
      const int pos = kMinDeviant + static_cast<int>(rng.below(kMaxDeviant - kMinDeviant + 1));
      items_.push_back(with_deviant_at(item, pos));
    } else {
      items_.push_back(item);
    }
  }
}

std::string OddballTask::system_prompt() const {
  return "You are playing a game and will be presented with a sequence of sentences about a "
         "specific topic. Just make some short comments on the material.";
}

std::string OddballTask::observation() const { return items_[position_].text(); }

std::optional<std::string> OddballTask::parse(std::string_view reply) const {
  auto t = trim(reply);
  if (t.empty()) return std::nullopt;
  return t;
}

std::string OddballTask::retry_prompt() const {
  return "Please make some short comments on the material.";
}

std::string OddballTask::fallback_action(const std::optional<std::string>&) const { return ""; }

StepResult OddballTask::step(const std::string&) {
  const auto& item = items_[position_++];
  StepResult r;
  r.outcome = {{"item", item.id}, {"deviant_position", item.deviant}};
  return r;
}

std::string OddballTask::oracle_action() const { return config_.option("standard_sentence"); }

TaskScore score_transcript(const Transcript& t, Embedder* embedder) {
  const std::string standard = t.config.option("standard_sentence");
  HashEmbedder hash;
  const bool reuse = embedder == nullptr && t.config.option("embedder") != "hash";
  if (embedder == nullptr) embedder = &hash;

  nlohmann::json stored;
  if (reuse) {
    if (!t.score || !t.score->metrics.contains("item_scores")) {
      throw ValidationError("oddball: remote-embedded transcript has no stored item scores");
    }
    stored = t.score->metrics["item_scores"];
    if (stored.size() != t.records.size()) {
      throw ValidationError("oddball: stored item scores do not match the records");
    }
  }

  nlohmann::json item_scores = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();
  double total = 0.0;
  int scored = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    outcome_at(r, "item");
    std::optional<double> value;
    if (!r.valid) {
      value = 0.0;
    } else if (reuse) {
      if (!stored[i].is_null()) value = stored[i].get<double>();
    } else {
      try {
        value = score_surprise(r.action, standard, *embedder).score;
      } catch (const TransportError& e) {
        warnings.push_back(fmt::format("record {}: unscored ({})", r.index, e.what()));
      }
    }
    if (value) {
      item_scores.push_back(*value);
      total += *value;
      ++scored;
    } else {
      item_scores.push_back(nullptr);
    }
  }

  TaskScore s;
  s.task = TaskId::oddball;
  s.score = scored ? total / scored : 0.0;
  s.metrics = {{"item_scores", item_scores}, {"scored", scored},
               {"unscored", static_cast<int>(t.records.size()) - scored},
               {"embedder", reuse ? t.config.option("embedder") : embedder->name()}};
  if (!warnings.empty()) s.metrics["warnings"] = warnings;
  return s;
}

}  // namespace reflect::oddball
