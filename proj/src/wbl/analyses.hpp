#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wbl/corpus.hpp"
#include "wbl/sentiment.hpp"
#include "wbl/spe_model.hpp"
#include "wbl/stats/regression.hpp"
#include "wbl/stats/tests.hpp"

// Condition-comparison analyses. Unless noted, only rated conversations on
// comparable topics enter, and topic ranks/valence come from the corpus
// catalog (run with_topic_stats first).
namespace wbl::analyses {

struct TopicSummary {
  std::string topic_id;
  std::optional<int> rank;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double sem = 0.0;
};

struct AnovaResult {
  stats::TestResult test;
  std::vector<TopicSummary> topics;  // by rank
  std::string filter;
};

AnovaResult journal_topic_anova(const Corpus& corpus);

struct TopicContrast {
  std::string topic_id;
  std::optional<int> rank;
  TopicSummary journal, chatbot;
  double difference = 0.0;  // chatbot - journal
  std::optional<stats::TestResult> test;  // Welch, chatbot vs journal
  double p_adjusted = 1.0;
};

struct ConditionComparison {
  stats::TestResult overall;  // Welch on per-participant mean happiness, chatbot vs journal
  double journal_mean = 0.0, chatbot_mean = 0.0;
  std::size_t journal_participants = 0, chatbot_participants = 0;
  std::vector<TopicContrast> topics;
  std::size_t significant_positive = 0;  // adjusted p < .05 and chatbot higher
  std::vector<std::string> notices;
  std::string filter;
};

ConditionComparison condition_comparison(const Corpus& corpus);

// Happiness substituted per conversation id, for simulated reruns.
using HappinessOverride = std::map<std::string, double>;

struct InteractionFit {
  // headline term and its estimate from the fixed-effects fit
  std::string term;
  double estimate = 0.0, se = 0.0, t = 0.0, p = 1.0;
  stats::RegressionFit fe_fit;      // participant effects absorbed, CR0
  stats::RegressionFit pooled_fit;  // intercept + all terms, CR0 by participant
  std::size_t n_rows = 0;
  std::size_t n_participants = 0;
  std::string filter;
};

struct RankInteractionOptions {
  bool covariates = false;
};

// happiness ~ chatbot + rank + chatbot:rank [+ z-scored covariates and
// covariate:rank terms].
InteractionFit topic_rank_interaction(const Corpus& corpus, const RankInteractionOptions& options = {},
                                      const HappinessOverride* happiness = nullptr);

struct ValenceInteraction {
  InteractionFit fit;  // happiness ~ chatbot + negative + chatbot:negative
  // Welch, chatbot vs journal, on per-participant means within each group
  std::optional<stats::TestResult> positive, negative;
  std::vector<std::string> notices;
};

ValenceInteraction valence_group_interaction(const Corpus& corpus, const HappinessOverride* happiness = nullptr);

struct BoostSummary {
  Label label = Label::best;
  std::size_t n = 0;
  double mean_boost = 0.0;
  double sem = 0.0;
  stats::TestResult test;  // one-sample t vs 0
};

struct BoostComparison {
  Label higher = Label::middle, lower = Label::best;  // boost(higher) - boost(lower)
  stats::TestResult test;                            // paired t
};

struct BestMiddleWorst {
  std::vector<BoostSummary> labels;         // best, middle, worst
  std::vector<BoostComparison> comparisons;  // middle-best, worst-middle, worst-best
  std::size_t participants = 0;
  std::size_t skipped = 0;
  std::string filter;
};

BestMiddleWorst best_middle_worst_boost(const Corpus& corpus);

struct FirstMessageTopic {
  std::string topic_id;
  std::size_t n_journal = 0, n_chatbot = 0;
  double words_journal = 0.0, words_chatbot = 0.0;
  std::optional<stats::TestResult> word_test;  // Welch, chatbot vs journal
  double word_p_adjusted = 1.0;
  double sentiment_journal = 0.0, sentiment_chatbot = 0.0;
  std::optional<stats::TestResult> sentiment_test;
  double sentiment_p_adjusted = 1.0;
  double centroid_cosine = 0.0;  // journal vs chatbot mean embedding
};

struct FirstMessageEquivalence {
  std::vector<FirstMessageTopic> topics;
  double statistic = 0.0;  // mean of centroid_cosine over topics
  double statistic_sd = 0.0;
  double permutation_p = 1.0;
  int n_perms = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> notices;
  std::string filter;
};

// First user message of each conversation. Sentiments are taken from the
// corpus when present and scored with `scorer` otherwise; embeddings always
// come from `scorer`. The null pairs each topic's journal centroid with a
// shuffled topic's chatbot centroid.
FirstMessageEquivalence first_message_equivalence(const Corpus& corpus, Scorer& scorer, int n_perms,
                                                  std::uint64_t seed);

struct SimulatedReproduction {
  InteractionFit observed_rank, simulated_rank;
  ValenceInteraction observed_valence, simulated_valence;
  std::size_t chatbot_rows = 0, journal_rows = 0;
  std::size_t chatbot_rows_without_simulation = 0;
  bool rank_sign_matches = false;
  bool valence_sign_matches = false;
};

// Chatbot happiness replaced by simulate_happiness(cv), journal happiness by
// entry-level predictions of cv.full_three; observed analyses run on the
// same rows.
SimulatedReproduction simulated_data_reproduction(const Corpus& corpus, const spe::CvReport& cv);

}  // namespace wbl::analyses
