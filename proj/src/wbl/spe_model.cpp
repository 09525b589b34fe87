#include "wbl/spe_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "wbl/error.hpp"
#include "wbl/parallel.hpp"
#include "wbl/rng.hpp"

namespace wbl::spe {

std::string_view to_string(Variant v) noexcept { return v == Variant::three_weight ? "three_weight" : "uniform_weight"; }

SpeFeatures spe_features_from_sentiments(std::string conversation_id, std::span<const double> s) {
  if (s.empty()) fail(Errc::NoUserUtterances, "conversation '" + conversation_id + "' has no user utterances");
  SpeFeatures f;
  f.conversation_id = std::move(conversation_id);
  f.n_user_utterances = static_cast<int>(s.size());
  f.first = s[0] - 5.0;
  const std::size_t n = s.size();
  if (n >= 2) f.last = s[n - 1] - s[0];
  if (n >= 3) {
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) sum += s[i] - s[0];
    f.middle = sum / static_cast<double>(n - 2);
  }
  return f;
}

SpeFeatures compute_spe_features(const Conversation& conversation) {
  std::vector<double> s;
  for (const auto* u : conversation.user_utterances()) {
    if (!u->sentiment)
      fail(Errc::MissingSentiment, "conversation '" + conversation.id + "' utterance " + std::to_string(u->index) +
                                       " has no sentiment");
    s.push_back(*u->sentiment);
  }
  if (conversation.condition == Condition::journal && s.size() > 1)
    fail(Errc::MalformedRecord, "journal conversation '" + conversation.id + "' has more than one user utterance");
  return spe_features_from_sentiments(conversation.id, s);
}

std::vector<SpeObservation> spe_dataset(const Corpus& corpus, Condition condition) {
  std::vector<SpeObservation> rows;
  for (const auto& c : corpus.conversations) {
    if (c.condition != condition || !c.happiness_post) continue;
    rows.push_back({c.participant_id, compute_spe_features(c), *c.happiness_post});
  }
  return rows;
}

std::vector<SpeObservation> complete_participants(std::span<const SpeObservation> rows, std::size_t k) {
  std::unordered_map<std::string, std::size_t> count;
  for (const auto& r : rows) ++count[r.participant_id];
  std::vector<SpeObservation> out;
  for (const auto& r : rows)
    if (count[r.participant_id] == k) out.push_back(r);
  return out;
}

double HappinessModel::predict(const std::string& participant_id, const SpeFeatures& f) const {
  auto it = subject_intercepts.find(participant_id);
  return (it == subject_intercepts.end() ? intercept : it->second) + linear_part(f);
}

HappinessModel fit_spe_model(std::span<const SpeObservation> rows, Variant variant) {
  if (rows.size() < 10)
    fail(Errc::TooFewObservations, "sPE model needs at least 10 conversations, got " + std::to_string(rows.size()));
  const std::size_t n = rows.size();
  std::vector<double> first(n), middle(n), last(n), sum(n), y(n);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    if (!(r.happiness >= 0.0 && r.happiness <= 100.0))
      fail(Errc::OutOfRange, "happiness rating outside [0,100] for '" + r.features.conversation_id + "'");
    first[i] = r.features.first;
    middle[i] = r.features.middle;
    last[i] = r.features.last;
    sum[i] = first[i] + middle[i] + last[i];
    y[i] = r.happiness;
    ids[i] = r.participant_id;
  }
  stats::DesignMatrix X(n);
  if (variant == Variant::three_weight)
    X.add_column("first", first).add_column("middle", middle).add_column("last", last);
  else
    X.add_column("spe_sum", sum);

  HappinessModel m;
  m.variant = variant;
  m.n = n;
  try {
    m.fit = stats::fe_ols_fit(X, y, ids);
  } catch (const Error& e) {
    if (e.code() != Errc::NoWithinVariation) throw;
    fail(Errc::RankDeficient, "sPE design is degenerate: " + std::string(e.what()), e.detail());
  }
  if (variant == Variant::three_weight) {
    m.beta_first = m.fit.coef("first");
    m.beta_middle = m.fit.coef("middle");
    m.beta_last = m.fit.coef("last");
    m.se_first = m.fit.se("first");
    m.se_middle = m.fit.se("middle");
    m.se_last = m.fit.se("last");
  } else {
    m.beta_first = m.beta_middle = m.beta_last = m.fit.coef("spe_sum");
    m.se_first = m.se_middle = m.se_last = m.fit.se("spe_sum");
  }
  m.rmse_train = m.fit.rmse();

  double resid_sum = 0.0;
  std::map<std::string, std::pair<double, double>> per_subject;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - m.linear_part(rows[i].features);
    resid_sum += r;
    auto& acc = per_subject[ids[i]];
    acc.first += r;
    acc.second += 1.0;
  }
  m.intercept = resid_sum / static_cast<double>(n);
  for (const auto& [id, acc] : per_subject) m.subject_intercepts[id] = acc.first / acc.second;
  return m;
}

std::vector<int> assign_folds(std::span<const SpeObservation> rows, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(Errc::InvalidArgument, "cross-validation needs k >= 2");
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < rows.size(); ++i) by_participant[rows[i].participant_id].push_back(i);
  std::vector<int> fold(rows.size(), -1);
  Rng rng(seed);
  for (const auto& [pid, idx] : by_participant) {
    if (idx.size() != k)
      fail(Errc::WrongConversationCount, "participant '" + pid + "' has " + std::to_string(idx.size()) +
                                             " conversations, expected " + std::to_string(k));
    const auto perm = rng.permutation(k);
    for (std::size_t j = 0; j < k; ++j) fold[idx[j]] = static_cast<int>(perm[j]);
  }
  return fold;
}

CvReport cross_validate(std::span<const SpeObservation> rows, std::size_t k, std::uint64_t seed, unsigned jobs) {
  const auto fold = assign_folds(rows, k, seed);
  CvReport report;
  report.k = k;
  report.seed = seed;
  report.n_conversations = rows.size();
  report.predictions.resize(rows.size());
  report.fold_rmse_three.assign(k, 0.0);
  report.fold_rmse_uniform.assign(k, 0.0);

  parallel_for(k, jobs, [&](std::size_t f) {
    std::vector<SpeObservation> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<std::size_t>(fold[i]) == f)
        test.push_back(i);
      else
        train.push_back(rows[i]);
    }
    const auto three = fit_spe_model(train, Variant::three_weight);
    const auto uniform = fit_spe_model(train, Variant::uniform_weight);
    double ss3 = 0.0, ssu = 0.0;
    for (std::size_t i : test) {
      const auto& r = rows[i];
      CvPrediction p;
      p.conversation_id = r.features.conversation_id;
      p.participant_id = r.participant_id;
      p.fold = static_cast<int>(f);
      p.actual = r.happiness;
      p.three_weight = three.predict(r.participant_id, r.features);
      p.uniform_weight = uniform.predict(r.participant_id, r.features);
      ss3 += (p.three_weight - p.actual) * (p.three_weight - p.actual);
      ssu += (p.uniform_weight - p.actual) * (p.uniform_weight - p.actual);
      report.predictions[i] = std::move(p);
    }
    report.fold_rmse_three[f] = std::sqrt(ss3 / static_cast<double>(test.size()));
    report.fold_rmse_uniform[f] = std::sqrt(ssu / static_cast<double>(test.size()));
  });

  double ss3 = 0.0, ssu = 0.0;
  for (const auto& p : report.predictions) {
    ss3 += (p.three_weight - p.actual) * (p.three_weight - p.actual);
    ssu += (p.uniform_weight - p.actual) * (p.uniform_weight - p.actual);
  }
  report.rmse_three = std::sqrt(ss3 / static_cast<double>(rows.size()));
  report.rmse_uniform = std::sqrt(ssu / static_cast<double>(rows.size()));
  report.full_three = fit_spe_model(rows, Variant::three_weight);
  report.full_uniform = fit_spe_model(rows, Variant::uniform_weight);
  report.metadata = {{"fold_assignment", "per-participant seeded permutation"},
                     {"prediction_intercept", "participant intercept from training rows"},
                     {"simulation_source", "out_of_fold"},
                     {"simulation_noise", "none"}};
  return report;
}

std::vector<JournalEntryPrediction> journal_entry_predictions(const HappinessModel& model, const Corpus& corpus) {
  std::vector<JournalEntryPrediction> out;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::journal) continue;
    const auto users = c.user_utterances();
    if (users.empty() || !users.front()->sentiment)
      fail(Errc::UnscoredEntries, "journal entry '" + c.id + "' has no sentiment score");
    JournalEntryPrediction p;
    p.conversation_id = c.id;
    p.participant_id = c.participant_id;
    p.topic_id = c.topic_id;
    p.predicted = model.intercept + model.beta_first * (*users.front()->sentiment - 5.0);
    p.actual = c.happiness_post;
    out.push_back(std::move(p));
  }
  return out;
}

JournalGeneralization predict_journal_happiness(const HappinessModel& model, const Corpus& corpus) {
  JournalGeneralization g;
  g.entries = journal_entry_predictions(model, corpus);
  std::map<std::string, ParticipantPrediction> acc;
  for (const auto& e : g.entries) {
    if (!e.actual) continue;
    auto& p = acc[e.participant_id];
    p.participant_id = e.participant_id;
    p.predicted_mean += e.predicted;
    p.actual_mean += *e.actual;
    ++p.n;
  }
  std::vector<double> predicted, actual;
  for (auto& [_, p] : acc) {
    p.predicted_mean /= static_cast<double>(p.n);
    p.actual_mean /= static_cast<double>(p.n);
    predicted.push_back(p.predicted_mean);
    actual.push_back(p.actual_mean);
    g.participants.push_back(p);
  }
  g.correlation = stats::pearson_r(predicted, actual);
  return g;
}

std::vector<SimulatedHappiness> simulate_happiness(const CvReport& cv) {
  if (cv.n_conversations == 0 || cv.predictions.size() != cv.n_conversations)
    fail(Errc::IncompleteCv, "cross-validation report lacks out-of-fold predictions for some conversations");
  std::vector<SimulatedHappiness> out;
  out.reserve(cv.predictions.size());
  for (const auto& p : cv.predictions) {
    if (p.conversation_id.empty() || !std::isfinite(p.three_weight))
      fail(Errc::IncompleteCv, "missing out-of-fold prediction", p.conversation_id);
    out.push_back({p.conversation_id, p.participant_id, clamp_happiness(p.three_weight)});
  }
  return out;
}

}  // namespace wbl::spe
