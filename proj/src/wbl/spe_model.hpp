#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wbl/corpus.hpp"
#include "wbl/stats/regression.hpp"
#include "wbl/stats/tests.hpp"

namespace wbl::spe {

// Sentiment prediction errors of one conversation's user utterances
// s_1..s_n: first = s_1 - 5, sPE_i = s_i - s_1, middle = mean(sPE_2..sPE_{n-1}),
// last = sPE_n. middle is 0 for n <= 2 and last is 0 for n = 1.
struct SpeFeatures {
  std::string conversation_id;
  double first = 0.0;
  double middle = 0.0;
  double last = 0.0;
  int n_user_utterances = 0;

  bool operator==(const SpeFeatures&) const = default;
};

SpeFeatures compute_spe_features(const Conversation& conversation);
SpeFeatures spe_features_from_sentiments(std::string conversation_id, std::span<const double> sentiments);

enum class Variant { three_weight, uniform_weight };
std::string_view to_string(Variant v) noexcept;

struct SpeObservation {
  std::string participant_id;
  SpeFeatures features;
  double happiness = 0.0;
};

// Rated conversations of one condition as model rows, in corpus order.
// Conversations without a happiness rating are skipped.
std::vector<SpeObservation> spe_dataset(const Corpus& corpus, Condition condition = Condition::chatbot);

// Drops participants that do not have exactly k rows.
std::vector<SpeObservation> complete_participants(std::span<const SpeObservation> rows, std::size_t k = 3);

struct HappinessModel {
  Variant variant = Variant::three_weight;
  // group-level intercept: mean(y) - beta . mean(x) over the training rows
  double intercept = 0.0;
  double beta_first = 0.0;
  double beta_middle = 0.0;
  double beta_last = 0.0;
  double se_first = 0.0;
  double se_middle = 0.0;
  double se_last = 0.0;
  std::size_t n = 0;
  double rmse_train = 0.0;
  // absorbed per-participant intercepts
  std::map<std::string, double> subject_intercepts;
  stats::RegressionFit fit;

  double linear_part(const SpeFeatures& f) const noexcept {
    return beta_first * f.first + beta_middle * f.middle + beta_last * f.last;
  }
  // Group-level prediction.
  double predict(const SpeFeatures& f) const noexcept { return intercept + linear_part(f); }
  // Uses the participant's own intercept when the participant was in training.
  double predict(const std::string& participant_id, const SpeFeatures& f) const;
};

// Least squares with participant fixed effects absorbed. three_weight fits
// first, middle and last separately; uniform_weight fits one weight on their
// sum.
HappinessModel fit_spe_model(std::span<const SpeObservation> rows, Variant variant);

struct CvPrediction {
  std::string conversation_id;
  std::string participant_id;
  int fold = 0;
  double actual = 0.0;
  double three_weight = 0.0;
  double uniform_weight = 0.0;
};

struct CvReport {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::size_t n_conversations = 0;
  std::vector<double> fold_rmse_three;
  std::vector<double> fold_rmse_uniform;
  double rmse_three = 0.0;    // pooled out-of-fold
  double rmse_uniform = 0.0;
  std::vector<CvPrediction> predictions;  // one per conversation, input order
  HappinessModel full_three;              // fitted on every row
  HappinessModel full_uniform;
  std::map<std::string, std::string> metadata;
};

// Grouped k-fold CV: each participant's k conversations land in k distinct
// folds via a seeded permutation per participant. Held-out predictions use
// the participant's intercept estimated from their training rows.
CvReport cross_validate(std::span<const SpeObservation> rows, std::size_t k, std::uint64_t seed, unsigned jobs = 1);

// fold[i] for rows[i]; participants are visited in id order.
std::vector<int> assign_folds(std::span<const SpeObservation> rows, std::size_t k, std::uint64_t seed);

struct JournalEntryPrediction {
  std::string conversation_id;
  std::string participant_id;
  std::string topic_id;
  double predicted = 0.0;
  std::optional<double> actual;
};

struct ParticipantPrediction {
  std::string participant_id;
  double predicted_mean = 0.0;
  double actual_mean = 0.0;
  std::size_t n = 0;
};

struct JournalGeneralization {
  std::vector<JournalEntryPrediction> entries;
  std::vector<ParticipantPrediction> participants;
  stats::TestResult correlation;
};

// intercept + beta_first * (s - 5) for every journal entry.
std::vector<JournalEntryPrediction> journal_entry_predictions(const HappinessModel& model, const Corpus& corpus);
// Per-participant means of predicted and rated happiness and their Pearson r.
JournalGeneralization predict_journal_happiness(const HappinessModel& model, const Corpus& corpus);

struct SimulatedHappiness {
  std::string conversation_id;
  std::string participant_id;
  double value = 0.0;
};

inline double clamp_happiness(double v) noexcept { return v < 0.0 ? 0.0 : (v > 100.0 ? 100.0 : v); }

// Out-of-fold three_weight predictions clamped to [0,100]; no noise.
std::vector<SimulatedHappiness> simulate_happiness(const CvReport& cv);

}  // namespace wbl::spe
