#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wbl/corpus.hpp"
#include "wbl/rng.hpp"

namespace wbl::synth {

// What ends up in the sentiment fields of the generated corpus.
//   targets: the generator's continuous sentiments
//   lexicon: offline fallback scores of the generated texts
//   none:    left empty (happiness still follows the lexicon scores, so
//            scoring the corpus with the fallback provider recovers them)
enum class SentimentSource { targets, lexicon, none };

// spe:      happiness follows the sPE model of the user sentiments
// additive: happiness = journal topic mean + chatbot effect + noise
enum class HappinessMode { spe, additive };

struct Config {
  std::uint64_t seed = 1;
  std::size_t journal_participants = 40;
  std::size_t chatbot_participants = 60;
  // false draws chatbot topics from the full chatbot catalog
  bool comparable_topics_only = true;
  bool covariates = true;
  bool role_scores = true;
  SentimentSource sentiments = SentimentSource::targets;
  HappinessMode mode = HappinessMode::spe;

  // user sentiment of a first message: topic base + participant mood + noise;
  // the topic base falls linearly from top to bottom over the 12 shared topics
  double sentiment_top = 8.5;
  double sentiment_bottom = 1.5;
  double mood_sd = 0.8;
  double first_noise_sd = 0.8;

  // conversation length in complete pairs, uniform
  int min_pairs = 1;
  int max_pairs = 8;
  double trailing_user_prob = 0.15;

  // C_1 = mirror_intercept + mirror_slope * U_1 + e, then for t >= 2
  // U_t = user_const + user_auto U_{t-1} + user_cross C_{t-1} + e
  // C_t = bot_const + bot_auto C_{t-1} + bot_cross U_{t-1} + e
  double mirror_intercept = 3.9, mirror_slope = 0.59;
  double user_const = 2.51, user_auto = 0.21, user_cross = 0.35, user_sd = 0.8;
  double bot_const = 3.875, bot_auto = 0.18, bot_cross = 0.35, bot_sd = 0.5;

  // spe mode
  double intercept = 52.0;
  double beta_first = 2.2, beta_middle = 0.55, beta_last = 0.97;
  double chatbot_constant = 0.0;  // added to every chatbot rating

  // additive mode
  double journal_top = 72.0;         // mean happiness of the rank-1 topic
  double journal_rank_slope = -2.6;  // per rank step
  double chatbot_rank_delta = 0.0;   // chatbot slope minus journal slope
  double chatbot_boost = 0.0;
  double boost_positive = 0.0;  // by the generator's valence (topic mean >= 50)
  double boost_negative = 0.0;

  double happiness_sd = 10.0;
  double subject_sd = 0.0;
};

// The generator's ordering of the 12 shared topics, happiest first.
const std::vector<std::string>& topic_order();
// Generator's base first-message sentiment for a topic (excluded topics get
// the midpoint).
double topic_base_sentiment(const Config& config, std::string_view topic_id);
// Additive-mode journal mean happiness for a topic.
double topic_journal_mean(const Config& config, std::string_view topic_id);

// Text of `length` tokens (at least 8) whose fallback lexicon score lands
// within 0.25 / length of `target`, mixed with topic words. At most length - 4
// tokens carry valence, which bounds how far from 5 a short text can reach;
// targets beyond [1, 9] are pulled inside first.
std::string compose_text(double target, std::string_view topic_id, Rng& rng, std::size_t length = 20);

Corpus generate(const Config& config);

}  // namespace wbl::synth
