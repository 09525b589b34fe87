#include "wbl/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "wbl/error.hpp"
#include "wbl/sentiment.hpp"
#include "wbl/spe_model.hpp"

namespace wbl::synth {

namespace {

// Topic vocabulary: none of these are lexicon entries.
const std::map<std::string, std::vector<std::string>, std::less<>>& topic_words() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> words = {
      {"gratitude", {"mother", "teacher", "gift", "neighbor", "mentor", "letter"}},
      {"perfect_day", {"morning", "beach", "breakfast", "sunshine", "walk", "afternoon"}},
      {"pride", {"award", "project", "graduation", "marathon", "promotion", "degree"}},
      {"tv_show", {"episode", "series", "character", "season", "plot", "streaming"}},
      {"romance", {"partner", "date", "dinner", "anniversary", "wedding", "restaurant"}},
      {"self_critical", {"mirror", "habits", "procrastinate", "weight", "temper", "patience"}},
      {"future_goals", {"exercise", "daily", "routine", "gym", "reading", "schedule"}},
      {"challenges", {"illness", "surgery", "divorce", "moving", "exam", "recovery"}},
      {"evaluate_others", {"coworker", "boss", "roommate", "attitude", "gossip", "arrogant"}},
      {"guilt", {"lied", "forgot", "apologize", "cheated", "promise", "argument"}},
      {"depression", {"winter", "bed", "isolation", "therapy", "medication", "darkness"}},
      {"hurt_feelings", {"insult", "comment", "sister", "betrayal", "rumor", "silence"}},
      {"regret_journal", {"grandfather", "conversation", "words", "told", "never", "goodbye"}},
      {"regret_chatbot", {"grandmother", "conversation", "words", "told", "never", "goodbye"}},
      {"childhood", {"siblings", "house", "holidays", "school", "parents", "memories"}},
  };
  return words;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {"i", "the", "about", "was", "that", "it", "my", "and", "so", "really"};
  return words;
}

// Lexicon words by sign and weight in tenths.
struct ValenceWords {
  std::map<int, std::vector<std::string>> positive, negative;
};

const ValenceWords& valence_words() {
  static const ValenceWords words = [] {
    ValenceWords w;
    for (const auto& [word, weight] : fallback_lexicon()) {
      const int tenths = static_cast<int>(std::lround(std::fabs(weight) * 10.0));
      (weight > 0 ? w.positive : w.negative)[tenths].push_back(word);
    }
    return w;
  }();
  return words;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

const std::vector<std::string>& topic_order() {
  static const std::vector<std::string> order = {"gratitude", "perfect_day",     "pride", "tv_show",
                                                 "romance",   "self_critical",   "future_goals", "challenges",
                                                 "evaluate_others", "guilt", "depression", "hurt_feelings"};
  return order;
}

namespace {
std::optional<std::size_t> order_index(std::string_view topic_id) {
  const auto& order = topic_order();
  auto it = std::find(order.begin(), order.end(), topic_id);
  if (it == order.end()) return std::nullopt;
  return static_cast<std::size_t>(it - order.begin());
}
}  // namespace

double topic_base_sentiment(const Config& config, std::string_view topic_id) {
  const auto i = order_index(topic_id);
  if (!i) return 5.0;
  const double frac = static_cast<double>(*i) / static_cast<double>(topic_order().size() - 1);
  return config.sentiment_top + (config.sentiment_bottom - config.sentiment_top) * frac;
}

double topic_journal_mean(const Config& config, std::string_view topic_id) {
  const auto i = order_index(topic_id);
  const double rank_step = i ? static_cast<double>(*i) : (topic_order().size() - 1) / 2.0;
  return config.journal_top + config.journal_rank_slope * rank_step;
}

std::string compose_text(double target, std::string_view topic_id, Rng& rng, std::size_t length) {
  length = std::max<std::size_t>(length, 8);
  const std::size_t slots = length - 4;
  target = std::clamp(target, 1.0, 9.0);
  // weight sum needed, in tenths
  long need = std::lround((target - 5.0) / 5.0 * static_cast<double>(length) * 10.0);
  const long cap = static_cast<long>(slots) * 10;
  need = std::clamp(need, -cap, cap);

  std::vector<std::string> tokens;
  const auto& vw = valence_words();
  while (need != 0 && tokens.size() < slots) {
    const int sign = need > 0 ? 1 : -1;
    const long mag = std::labs(need);
    long w = std::min<long>(mag, 10);
    if (mag == 1) w = 3;                // overshoot, fixed by a 0.2 word of the other sign
    else if (mag - w == 1) w -= 1;      // never leave a single tenth behind
    const auto& bucket = (sign > 0 ? vw.positive : vw.negative).at(static_cast<int>(w));
    tokens.push_back(pick(bucket, rng));
    need -= sign * w;
  }
  const auto words = topic_words().find(topic_id);
  while (tokens.size() < length) {
    if (words != topic_words().end() && rng.below(2) == 0)
      tokens.push_back(pick(words->second, rng));
    else
      tokens.push_back(pick(filler_words(), rng));
  }
  rng.shuffle(std::span<std::string>(tokens));
  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text + ".";
}

namespace {

double observed_score(const Config& config, double target, const std::string& text) {
  if (config.sentiments == SentimentSource::targets) return round_to(target, 0.01);
  return lexicon_fallback_score(text).value;
}

void add_utterance(Conversation& c, Role role, std::string text, std::int64_t ts, std::optional<double> s) {
  const int idx = static_cast<int>(c.utterances.size());
  c.utterances.push_back({c.id, idx, role, std::move(text), ts, s});
}

std::optional<double> stored(const Config& config, double score) {
  if (config.sentiments == SentimentSource::none) return std::nullopt;
  return score;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

void set_covariates(Participant& p, Rng& rng) {
  p.covariates["age"] = std::round(std::clamp(rng.normal(38.0, 12.0), 18.0, 80.0));
  p.covariates["education"] = std::round(std::clamp(rng.normal(15.0, 2.5), 8.0, 22.0));
  p.covariates["gender"] = std::string(rng.below(2) == 0 ? "female" : "male");
  p.covariates["phq9_total"] = std::round(std::clamp(std::fabs(rng.normal(5.0, 5.0)), 0.0, 27.0));
}

// Noisy ratings are kept to two decimals; noiseless ones stay exact.
double rating(const Config& config, double y) {
  y = spe::clamp_happiness(y);
  return config.happiness_sd > 0.0 ? round_to(y, 0.01) : y;
}

double clamp_sentiment(double v) { return std::clamp(v, 0.0, 10.0); }

}  // namespace

Corpus generate(const Config& config) {
  if (config.min_pairs < 1 || config.max_pairs < config.min_pairs)
    fail(Errc::InvalidArgument, "synth: need 1 <= min_pairs <= max_pairs");
  Corpus corpus;
  corpus.topics = default_catalog();
  corpus.provenance = {{"generator", "wbl-synth"},
                       {"seed", std::to_string(config.seed)},
                       {"happiness_mode", config.mode == HappinessMode::spe ? "spe" : "additive"}};
  const std::int64_t epoch = 1'700'000'000'000;

  auto journal_topics = catalog_ids(corpus.topics, Condition::journal);
  std::vector<std::string> chat_topics;
  for (const auto& t : corpus.topics)
    if (t.in_chatbot && (!config.comparable_topics_only || !t.excluded_from_comparison)) chat_topics.push_back(t.id);
  if (chat_topics.size() < 3) fail(Errc::InvalidArgument, "synth: fewer than 3 chatbot topics");

  auto additive_mean = [&](const std::string& topic, bool chatbot) {
    double m = topic_journal_mean(config, topic);
    if (!chatbot) return m;
    const auto i = order_index(topic);
    const double step = i ? static_cast<double>(*i) : (topic_order().size() - 1) / 2.0;
    m += config.chatbot_boost + config.chatbot_rank_delta * step;
    m += topic_journal_mean(config, topic) < 50.0 ? config.boost_negative : config.boost_positive;
    return m;
  };

  for (std::size_t p = 0; p < config.journal_participants; ++p) {
    // per-participant streams keep participants independent of corpus size
    Rng rng = Rng::substream(config.seed, 2 * p);
    Participant part;
    char buf[16];
    std::snprintf(buf, sizeof buf, "j%04zu", p + 1);
    part.id = buf;
    part.condition = Condition::journal;
    if (config.covariates) set_covariates(part, rng);
    const double mood = rng.normal(0.0, config.mood_sd);
    const double offset = rng.normal(0.0, config.subject_sd);
    auto order = journal_topics;
    rng.shuffle(std::span<std::string>(order));
    std::int64_t clock = epoch + static_cast<std::int64_t>(p) * 10'000'000;
    for (std::size_t k = 0; k < order.size(); ++k) {
      Conversation c;
      c.id = part.id + "-" + std::to_string(k + 1);
      c.participant_id = part.id;
      c.topic_id = order[k];
      c.condition = Condition::journal;
      const Topic* topic = corpus.find_topic(order[k]);
      add_utterance(c, Role::topic_prompt, topic->prompt_text, 0, std::nullopt);
      const double target = clamp_sentiment(topic_base_sentiment(config, order[k]) + mood +
                                            rng.normal(0.0, config.first_noise_sd));
      const std::string text = compose_text(target, order[k], rng, 16 + rng.below(11));
      const double s = observed_score(config, target, text);
      const std::int64_t written = 60'000 + static_cast<std::int64_t>(rng.below(60'000));
      add_utterance(c, Role::user, text, written, stored(config, s));
      double y = config.mode == HappinessMode::spe ? config.intercept + config.beta_first * (s - 5.0)
                                                    : additive_mean(order[k], false);
      y += offset + rng.normal(0.0, config.happiness_sd);
      c.happiness_post = rating(config, y);
      c.started_at = clock;
      c.ended_at = clock + written + 1000;
      clock = c.ended_at + 30'000;
      corpus.conversations.push_back(std::move(c));
    }
    corpus.participants.push_back(std::move(part));
  }

  for (std::size_t p = 0; p < config.chatbot_participants; ++p) {
    Rng rng = Rng::substream(config.seed, 2 * p + 1);
    Participant part;
    char buf[16];
    std::snprintf(buf, sizeof buf, "c%04zu", p + 1);
    part.id = buf;
    part.condition = Condition::chatbot;
    if (config.covariates) set_covariates(part, rng);
    const double mood = rng.normal(0.0, config.mood_sd);
    const double offset = rng.normal(0.0, config.subject_sd);
    auto pool = chat_topics;
    rng.shuffle(std::span<std::string>(pool));
    std::int64_t clock = epoch + 5'000'000'000 + static_cast<std::int64_t>(p) * 10'000'000;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string& topic_id = pool[k];
      Conversation c;
      c.id = part.id + "-" + std::to_string(k + 1);
      c.participant_id = part.id;
      c.topic_id = topic_id;
      c.condition = Condition::chatbot;
      add_utterance(c, Role::topic_prompt, corpus.find_topic(topic_id)->prompt_text, 0, std::nullopt);

      const int n_pairs = config.min_pairs + static_cast<int>(rng.below(config.max_pairs - config.min_pairs + 1));
      const bool trailing = rng.uniform() < config.trailing_user_prob;
      double u = clamp_sentiment(topic_base_sentiment(config, topic_id) + mood + rng.normal(0.0, config.first_noise_sd));
      double b = clamp_sentiment(config.mirror_intercept + config.mirror_slope * u + rng.normal(0.0, config.bot_sd));
      std::vector<double> user_scores;
      std::vector<std::string> user_texts, bot_texts;
      std::vector<double> bot_targets;
      std::int64_t ts = 0;
      const int user_turns = n_pairs + (trailing ? 1 : 0);
      for (int t = 0; t < user_turns; ++t) {
        if (t > 0) {
          const double un = config.user_const + config.user_auto * u + config.user_cross * b +
                            rng.normal(0.0, config.user_sd);
          const double bn = config.bot_const + config.bot_auto * b + config.bot_cross * u +
                            rng.normal(0.0, config.bot_sd);
          u = clamp_sentiment(un);
          b = clamp_sentiment(bn);
        }
        ts += 15'000 + static_cast<std::int64_t>(rng.below(30'000));
        const std::string ut = compose_text(u, topic_id, rng, 16 + rng.below(11));
        const double us = observed_score(config, u, ut);
        add_utterance(c, Role::user, ut, ts, stored(config, us));
        user_scores.push_back(us);
        user_texts.push_back(ut);
        if (t < n_pairs) {
          ts += 3'000 + static_cast<std::int64_t>(rng.below(5'000));
          const std::string bt = compose_text(b, topic_id, rng, 20 + rng.below(11));
          add_utterance(c, Role::chatbot, bt, ts, stored(config, observed_score(config, b, bt)));
          bot_texts.push_back(bt);
          bot_targets.push_back(b);
        }
      }

      double user_role = 0.0, bot_role = 0.0;
      if (config.sentiments == SentimentSource::targets) {
        for (double v : user_scores) user_role += v;
        for (double v : bot_targets) bot_role += round_to(v, 0.01);
        user_role /= static_cast<double>(user_scores.size());
        bot_role /= static_cast<double>(bot_targets.size());
      } else {
        user_role = lexicon_fallback_score(join_lines(user_texts), Granularity::conversation_role).value;
        bot_role = lexicon_fallback_score(join_lines(bot_texts), Granularity::conversation_role).value;
      }
      if (config.role_scores && config.sentiments != SentimentSource::none) {
        c.user_role_sentiment = user_role;
        c.chatbot_role_sentiment = bot_role;
      }

      double y;
      if (config.mode == HappinessMode::spe) {
        const auto f = spe::spe_features_from_sentiments(c.id, user_scores);
        y = config.intercept + config.beta_first * f.first + config.beta_middle * f.middle +
            config.beta_last * f.last + config.chatbot_constant;
      } else {
        y = additive_mean(topic_id, true);
      }
      y += offset + rng.normal(0.0, config.happiness_sd);
      c.happiness_post = rating(config, y);
      c.started_at = clock;
      c.ended_at = clock + std::max<std::int64_t>(ts + 2'000, 240'000 + static_cast<std::int64_t>(rng.below(120'000)));
      clock = c.ended_at + 30'000;
      corpus.conversations.push_back(std::move(c));
    }
    corpus.participants.push_back(std::move(part));
  }
  validate_corpus(corpus);
  return corpus;
}

}  // namespace wbl::synth
