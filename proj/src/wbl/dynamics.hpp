#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wbl/corpus.hpp"
#include "wbl/stats/regression.hpp"
#include "wbl/stats/tests.hpp"

namespace wbl::dynamics {

inline constexpr std::size_t kMaxPairs = 6;

struct UtterancePair {
  std::string conversation_id;
  int pair_index = 1;  // 1-based
  double user_sentiment = 0.0;
  double chatbot_sentiment = 0.0;

  bool operator==(const UtterancePair&) const = default;
};

// User utterance followed immediately by a chatbot reply, in order after the
// topic prompt. A trailing unanswered user utterance is dropped.
std::vector<UtterancePair> build_pairs(const Conversation& conversation, std::size_t max_pairs = kMaxPairs);

struct PairedConversation {
  std::string conversation_id;
  std::string participant_id;
  std::string topic_id;
  std::vector<UtterancePair> pairs;
};

struct PairSelection {
  std::size_t max_pairs = kMaxPairs;
  // empty = every chatbot topic
  std::set<std::string> topics;
};

// Pairs for every chatbot conversation in the corpus (journal ones skipped).
std::vector<PairedConversation> corpus_pairs(const Corpus& corpus, const PairSelection& selection = {});

struct PairingSummary {
  std::size_t conversations = 0;
  double mean_pairs = 0.0;  // before truncation
  double sd_pairs = 0.0;
  std::map<int, std::size_t> histogram;  // complete pairs -> conversations
  // user and chatbot utterances beyond max_pairs, over all of them
  double excluded_fraction = 0.0;
};
PairingSummary pairing_summary(const Corpus& corpus, std::size_t max_pairs = kMaxPairs);

enum class Normalization { raw_pair_index, percent_position };
std::string_view to_string(Normalization n) noexcept;

struct TrajectoryBin {
  double position = 0.0;  // pair index, or bin midpoint in [0,1]
  std::size_t n = 0;
  double mean_user = 0.0;
  double sem_user = 0.0;
  double mean_chatbot = 0.0;
  double sem_chatbot = 0.0;
};

struct TrajectoryFit {
  Normalization normalization = Normalization::raw_pair_index;
  double slope_user = 0.0, se_user = 0.0;
  double slope_chatbot = 0.0, se_chatbot = 0.0;
  double interaction = 0.0, se_interaction = 0.0;  // role x position, chatbot = 1
  double p_interaction = 1.0;
  std::size_t n_conversations = 0;
  stats::RegressionFit fit;  // columns position, role, role_x_position
  std::vector<TrajectoryBin> bins;
};

// Long-format sentiment ~ position * role with participant fixed effects and
// cluster-robust SEs. percent_position maps pair i of n to (i-1)/(n-1), a
// single pair to 0, and adds 10 equal display bins.
TrajectoryFit trajectory_regression(const std::vector<PairedConversation>& conversations, Normalization normalization);

enum class ChangeStatus { tested, no_change, constant_shift };
std::string_view to_string(ChangeStatus s) noexcept;

struct TopicChange {
  std::string topic_id;
  std::size_t n = 0;
  double mean_first = 0.0;
  double mean_last = 0.0;
  ChangeStatus status = ChangeStatus::tested;
  std::optional<stats::TestResult> test;  // paired t of first vs last; d < 0 means sentiment rose
  double p_adjusted = 1.0;               // BH across tested topics
};

struct FirstLastReport {
  std::vector<TopicChange> topics;
  std::vector<std::string> notices;
};

// Per topic, paired t of first vs last user-utterance sentiment over chatbot
// conversations with >= 2 user utterances. Topics with fewer than
// min_conversations are skipped with a notice.
FirstLastReport first_last_topic_tests(const Corpus& corpus, std::size_t min_conversations = 2);

struct TopicMirroring {
  std::string topic_id;
  std::size_t n = 0;
  stats::RegressionFit fit;
};

struct MirroringReport {
  stats::RegressionFit fit;  // chatbot ~ 1 + user, one row per participant
  std::size_t n_participants = 0;
  double percent_chatbot_above_user = 0.0;  // over participant averages
  std::vector<TopicMirroring> per_topic;    // rows per participant and topic
  std::vector<std::string> notices;
};

// Chatbot role sentiment regressed on user role sentiment, both averaged per
// participant, CR0 SEs.
stats::RegressionFit mirroring_regression(const Corpus& corpus);
MirroringReport mirroring_analysis(const Corpus& corpus);

// Post-conversation happiness ~ user role + chatbot role sentiment with
// participant fixed effects.
stats::RegressionFit happiness_on_role_sentiment(const Corpus& corpus);

struct LaggedRow {
  std::string participant_id;
  std::string conversation_id;
  std::string topic_id;
  int t = 2;
  double user = 0.0, chatbot = 0.0;
  double user_lag = 0.0, chatbot_lag = 0.0;
};
std::vector<LaggedRow> lagged_rows(const std::vector<PairedConversation>& conversations);

struct CrossLaggedOptions {
  // participant fixed effects instead of pooled OLS with an intercept
  bool fixed_effects = false;
  // rank main effect and rank x lag interactions; topics without a rank are dropped
  bool topic_rank = false;
  std::size_t min_rows = 30;
};

struct CrossLaggedFit {
  stats::RegressionFit user_model;     // U_t ~ U_{t-1} + C_{t-1}
  stats::RegressionFit chatbot_model;  // C_t ~ C_{t-1} + U_{t-1}
  stats::TestResult cross_difference;  // chatbot->user minus user->chatbot
  std::size_t n_rows = 0;
  CrossLaggedOptions options;
};

CrossLaggedFit cross_lagged_fit(const std::vector<PairedConversation>& conversations, const Corpus& corpus,
                                const CrossLaggedOptions& options = {});
CrossLaggedFit cross_lagged_fit(const std::vector<LaggedRow>& rows, const std::map<std::string, int>& topic_rank,
                                const CrossLaggedOptions& options = {});

struct TopicImportance {
  std::string topic_id;
  std::size_t n_rows = 0;
  stats::LmgShares user_model;     // predictors user_lag, chatbot_lag
  stats::LmgShares chatbot_model;  // predictors chatbot_lag, user_lag
};

struct ImportanceReport {
  std::vector<TopicImportance> topics;
  // mean percentage of the chatbot's lag in the user model, by valence group
  std::optional<double> chatbot_share_positive;
  std::optional<double> chatbot_share_negative;
  std::vector<std::string> notices;
};

ImportanceReport relative_importance_by_topic(const std::vector<PairedConversation>& conversations,
                                              const Corpus& corpus, std::size_t min_rows = 10);

}  // namespace wbl::dynamics
