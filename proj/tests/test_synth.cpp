#include <cmath>

#include "doctest.h"
#include "wbl/corpus.hpp"
#include "wbl/error.hpp"
#include "wbl/sentiment.hpp"
#include "wbl/synth.hpp"

using namespace wbl;

namespace {

synth::Config small(std::uint64_t seed) {
  synth::Config c;
  c.seed = seed;
  c.journal_participants = 6;
  c.chatbot_participants = 9;
  return c;
}

}  // namespace

TEST_CASE("compose_text hits the lexicon target") {
  Rng rng(5);
  for (int i = 0; i <= 80; ++i) {
    const double target = 1.0 + 0.1 * i;
    for (std::size_t length : {20u, 26u}) {
      const std::string text = synth::compose_text(target, "pride", rng, length);
      CHECK(tokenize(text).size() == length);
      CHECK(std::fabs(lexicon_fallback_score(text).value - target) <= 0.25 / length + 1e-9);
    }
  }
  // out-of-range targets are pulled into [1, 9]
  CHECK(lexicon_fallback_score(synth::compose_text(12.0, "pride", rng, 20)).value == doctest::Approx(9.0));
  CHECK(lexicon_fallback_score(synth::compose_text(-3.0, "guilt", rng, 20)).value == doctest::Approx(1.0));
  // short texts saturate
  CHECK(lexicon_fallback_score(synth::compose_text(9.0, "pride", rng, 8)).value == doctest::Approx(7.5));
}

TEST_CASE("generation is deterministic and valid") {
  const Corpus a = synth::generate(small(3));
  const Corpus b = synth::generate(small(3));
  CHECK(a == b);
  CHECK(export_corpus(a) == export_corpus(b));
  CHECK(corpus_fingerprint(a) != corpus_fingerprint(synth::generate(small(4))));
  CHECK_NOTHROW(validate_corpus(a));
  CHECK(a.participants.size() == 15);
  std::size_t journal = 0, chat = 0;
  for (const auto& c : a.conversations) {
    (c.condition == Condition::journal ? journal : chat) += 1;
    CHECK(c.happiness_post);
    CHECK(*c.happiness_post >= 0.0);
    CHECK(*c.happiness_post <= 100.0);
  }
  CHECK(journal == 6 * 13);
  CHECK(chat == 9 * 3);
  CHECK(a.provenance.at("seed") == "3");
}

TEST_CASE("participants do not depend on corpus size") {
  auto big = small(7);
  big.chatbot_participants = 20;
  big.journal_participants = 10;
  const Corpus a = synth::generate(small(7));
  const Corpus b = synth::generate(big);
  for (const auto& p : a.participants) {
    REQUIRE(b.find_participant(p.id));
    CHECK(*b.find_participant(p.id) == p);
    const auto ca = a.conversations_of(p.id);
    const auto cb = b.conversations_of(p.id);
    REQUIRE(ca.size() == cb.size());
    for (std::size_t i = 0; i < ca.size(); ++i) CHECK(*ca[i] == *cb[i]);
  }
}

TEST_CASE("sentiment sources") {
  auto cfg = small(8);
  cfg.sentiments = synth::SentimentSource::lexicon;
  const Corpus lex = synth::generate(cfg);
  for (const auto& c : lex.conversations) {
    for (const auto& u : c.utterances) {
      if (u.role == Role::topic_prompt) {
        CHECK_FALSE(u.sentiment);
        continue;
      }
      REQUIRE(u.sentiment);
      CHECK(*u.sentiment == lexicon_fallback_score(u.text).value);
    }
  }

  cfg.sentiments = synth::SentimentSource::none;
  const Corpus bare = synth::generate(cfg);
  for (const auto& c : bare.conversations) {
    CHECK_FALSE(c.user_role_sentiment);
    for (const auto& u : c.utterances) CHECK_FALSE(u.sentiment);
  }
  // same texts and ratings; scoring with the offline provider restores the lexicon corpus
  FallbackProvider provider(64);
  Scorer scorer(provider);
  Corpus scored = score_corpus(bare, scorer);
  CHECK(scored.provenance.at("sentiment_provider") == provider.provider_id());
  scored.provenance.erase("sentiment_provider");
  CHECK(scored == lex);
}

TEST_CASE("targets mode stores rounded targets and role means") {
  const Corpus c = synth::generate(small(9));
  for (const auto& conv : c.conversations) {
    double sum = 0;
    int n = 0;
    for (const auto* u : conv.user_utterances()) {
      REQUIRE(u->sentiment);
      CHECK(std::fabs(*u->sentiment * 100 - std::round(*u->sentiment * 100)) < 1e-6);
      sum += *u->sentiment;
      ++n;
    }
    if (conv.condition == Condition::chatbot) {
      REQUIRE(conv.user_role_sentiment);
      CHECK(*conv.user_role_sentiment == doctest::Approx(sum / n));
    }
  }
}

TEST_CASE("additive happiness follows the configured topic means") {
  synth::Config cfg;
  cfg.seed = 10;
  cfg.mode = synth::HappinessMode::additive;
  cfg.happiness_sd = 0.0;
  cfg.chatbot_boost = 3.0;
  cfg.boost_negative = 5.0;
  cfg.chatbot_rank_delta = 0.5;
  const Corpus c = synth::generate(cfg);
  const auto& order = synth::topic_order();
  for (const auto& conv : c.conversations) {
    const auto it = std::find(order.begin(), order.end(), conv.topic_id);
    if (it == order.end()) continue;
    const double step = static_cast<double>(it - order.begin());
    double expected = 72.0 - 2.6 * step;
    if (conv.condition == Condition::chatbot) expected += 3.0 + 0.5 * step + (72.0 - 2.6 * step < 50.0 ? 5.0 : 0.0);
    CHECK(*conv.happiness_post == doctest::Approx(expected));
  }
}

TEST_CASE("bad configuration") {
  auto cfg = small(1);
  cfg.min_pairs = 0;
  CHECK_THROWS_AS(synth::generate(cfg), Error);
  cfg.min_pairs = 4;
  cfg.max_pairs = 3;
  CHECK_THROWS_AS(synth::generate(cfg), Error);
}
