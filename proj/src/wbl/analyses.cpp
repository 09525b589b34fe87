#include "wbl/analyses.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wbl/error.hpp"

namespace wbl::analyses {

namespace {

// The corpus itself when its catalog carries ranks, otherwise a copy with
// ranks derived from its journal ratings.
class Ranked {
 public:
  explicit Ranked(const Corpus& corpus) : ptr_(&corpus) {
    const bool ranked = std::any_of(corpus.topics.begin(), corpus.topics.end(), [](const Topic& t) { return t.rank; });
    if (!ranked) {
      owned_ = with_topic_stats(corpus);
      ptr_ = &*owned_;
    }
  }
  const Corpus& corpus() const noexcept { return *ptr_; }

 private:
  std::optional<Corpus> owned_;
  const Corpus* ptr_;
};

struct Row {
  const Conversation* conv;
  const Topic* topic;
  double happiness;
};

// Rated conversations on comparable topics. With an override only the
// conversations it names enter, with its values.
std::vector<Row> comparable_rows(const Corpus& corpus, const HappinessOverride* happiness) {
  std::vector<Row> rows;
  for (const auto& c : corpus.conversations) {
    const Topic* t = corpus.find_topic(c.topic_id);
    if (!t || t->excluded_from_comparison) continue;
    if (happiness) {
      auto it = happiness->find(c.id);
      if (it == happiness->end()) continue;
      rows.push_back({&c, t, it->second});
    } else if (c.happiness_post) {
      rows.push_back({&c, t, *c.happiness_post});
    }
  }
  return rows;
}

std::string row_filter(const HappinessOverride* happiness, std::string_view extra) {
  std::string f = happiness ? "conversations in happiness override" : "rated conversations";
  f += "; comparable topics";
  if (!extra.empty()) f += "; " + std::string(extra);
  return f;
}

TopicSummary summarize(const Topic& t, const std::vector<double>& v) {
  TopicSummary s;
  s.topic_id = t.id;
  s.rank = t.rank;
  s.n = v.size();
  if (!v.empty()) s.mean = stats::mean(v);
  if (v.size() > 1) {
    s.sd = std::sqrt(stats::sample_variance(v));
    s.sem = s.sd / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

// A test whose samples carry no variance and no difference reports t = 0,
// p = 1; anything else degenerate stays an error.
stats::TestResult null_result(stats::TestKind kind, std::size_t n) {
  stats::TestResult r;
  r.kind = kind;
  r.statistic = 0.0;
  r.df = n > 0 ? static_cast<double>(n - 1) : 0.0;
  r.p_value = 1.0;
  r.p_one_sided = 0.5;
  r.effect_size = 0.0;
  r.n = n;
  return r;
}

bool all_equal(std::span<const double> v, double x) {
  return std::all_of(v.begin(), v.end(), [&](double y) { return y == x; });
}

stats::TestResult one_sample_or_null(std::span<const double> a) {
  if (a.size() >= 2 && all_equal(a, 0.0)) return null_result(stats::TestKind::one_sample_t, a.size());
  return stats::one_sample_t(a);
}

stats::TestResult paired_or_null(std::span<const double> a, std::span<const double> b) {
  if (a.size() == b.size() && a.size() >= 2 && std::equal(a.begin(), a.end(), b.begin()))
    return null_result(stats::TestKind::paired_t, a.size());
  return stats::paired_t(a, b);
}

// Welch t of a vs b, or nullopt with a notice when the groups are too small
// or both constant at different values.
std::optional<stats::TestResult> welch_or_notice(std::span<const double> a, std::span<const double> b,
                                                 const std::string& what, std::vector<std::string>& notices) {
  if (a.size() < 2 || b.size() < 2) {
    notices.push_back(what + ": fewer than two observations in a condition");
    return std::nullopt;
  }
  if (all_equal(a, a.front()) && all_equal(b, b.front())) {
    if (a.front() == b.front()) {
      auto r = null_result(stats::TestKind::welch_t, a.size() + b.size());
      r.df = static_cast<double>(a.size() + b.size() - 2);
      return r;
    }
    notices.push_back(what + ": both conditions constant");
    return std::nullopt;
  }
  return stats::welch_t(a, b);
}

void adjust(std::vector<std::optional<stats::TestResult>*> tests, std::vector<double*> targets) {
  std::vector<double> p;
  std::vector<double*> out;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!*tests[i]) continue;
    p.push_back((*tests[i])->p_value);
    out.push_back(targets[i]);
  }
  if (p.empty()) return;
  const auto adj = stats::bh_adjust(p);
  for (std::size_t i = 0; i < adj.size(); ++i) *out[i] = adj[i];
}

// Per-participant mean happiness by condition, participants in id order.
std::pair<std::vector<double>, std::vector<double>> participant_means(const std::vector<Row>& rows) {
  std::map<std::string, std::pair<double, std::size_t>> journal, chatbot;
  for (const auto& r : rows) {
    auto& acc = (r.conv->condition == Condition::chatbot ? chatbot : journal)[r.conv->participant_id];
    acc.first += r.happiness;
    ++acc.second;
  }
  auto flatten = [](const auto& m) {
    std::vector<double> out;
    for (const auto& [_, acc] : m) out.push_back(acc.first / static_cast<double>(acc.second));
    return out;
  };
  return {flatten(chatbot), flatten(journal)};
}

void require_both_conditions(const std::vector<Row>& rows, std::string_view analysis) {
  bool journal = false, chatbot = false;
  for (const auto& r : rows) (r.conv->condition == Condition::chatbot ? chatbot : journal) = true;
  if (!journal || !chatbot)
    fail(Errc::MissingCondition, std::string(analysis) + " needs rows from both conditions",
         journal ? "no chatbot rows" : "no journal rows");
}

// Checked before ranking, which would otherwise fail first with a vaguer error.
void require_both_in_corpus(const Corpus& corpus, std::string_view analysis) {
  bool journal = false, chatbot = false;
  for (const auto& c : corpus.conversations) (c.condition == Condition::chatbot ? chatbot : journal) = true;
  if (!journal || !chatbot)
    fail(Errc::MissingCondition, std::string(analysis) + " needs rows from both conditions",
         journal ? "no chatbot rows" : "no journal rows");
}

struct Regressors {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values) {
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
  }
};

InteractionFit fit_interaction(const std::string& term, const Regressors& regs, const std::vector<double>& y,
                               const std::vector<std::string>& subjects, std::string filter) {
  InteractionFit out;
  out.term = term;
  out.n_rows = y.size();
  out.n_participants = std::set<std::string>(subjects.begin(), subjects.end()).size();
  out.filter = std::move(filter);

  stats::DesignMatrix fe(y.size());
  for (std::size_t j = 0; j < regs.names.size(); ++j) fe.add_column(regs.names[j], regs.columns[j]);
  out.fe_fit = stats::fe_ols_fit(fe, y, subjects, {.drop_constant_columns = true});

  stats::DesignMatrix pooled(y.size());
  pooled.add_intercept();
  for (std::size_t j = 0; j < regs.names.size(); ++j) pooled.add_column(regs.names[j], regs.columns[j]);
  pooled.set_clusters(subjects);
  out.pooled_fit = stats::ols_fit(pooled, y);

  const auto& headline = out.fe_fit.has(term) ? out.fe_fit : out.pooled_fit;
  const std::size_t k = headline.index_of(term);
  out.estimate = headline.coefficients[k];
  out.se = headline.std_errors[k];
  out.t = headline.t_values[k];
  out.p = headline.p_values[k];
  return out;
}

// z-scores of one numeric covariate over the given participants.
std::optional<std::map<std::string, double>> zscores(const std::map<std::string, double>& raw) {
  std::vector<double> v;
  for (const auto& [_, x] : raw) v.push_back(x);
  if (v.size() < 2) return std::nullopt;
  const double m = stats::mean(v);
  const double sd = std::sqrt(stats::sample_variance(v));
  if (sd == 0.0) return std::nullopt;
  std::map<std::string, double> out;
  for (const auto& [id, x] : raw) out[id] = (x - m) / sd;
  return out;
}

}  // namespace

AnovaResult journal_topic_anova(const Corpus& corpus) {
  const Ranked ranked(corpus);
  const Corpus& cp = ranked.corpus();
  std::map<std::pair<int, std::string>, std::pair<const Topic*, std::vector<double>>> groups;
  for (const auto& r : comparable_rows(cp, nullptr)) {
    if (r.conv->condition != Condition::journal || !r.topic->rank) continue;
    auto& g = groups[{*r.topic->rank, r.topic->id}];
    g.first = r.topic;
    g.second.push_back(r.happiness);
  }
  AnovaResult out;
  out.filter = row_filter(nullptr, "journal condition; ranked topics");
  std::vector<std::vector<double>> samples;
  for (const auto& [_, g] : groups) {
    samples.push_back(g.second);
    out.topics.push_back(summarize(*g.first, g.second));
  }
  out.test = stats::one_way_anova(samples);
  return out;
}

ConditionComparison condition_comparison(const Corpus& corpus) {
  require_both_in_corpus(corpus, "condition comparison");
  const Ranked ranked(corpus);
  const Corpus& cp = ranked.corpus();
  const auto rows = comparable_rows(cp, nullptr);
  require_both_conditions(rows, "condition comparison");

  ConditionComparison out;
  out.filter = row_filter(nullptr, "overall test on per-participant means");
  const auto [chat, journal] = participant_means(rows);
  out.overall = stats::welch_t(chat, journal);
  out.chatbot_mean = stats::mean(chat);
  out.journal_mean = stats::mean(journal);
  out.chatbot_participants = chat.size();
  out.journal_participants = journal.size();

  std::vector<const Topic*> topics;
  for (const auto& t : cp.topics)
    if (!t.excluded_from_comparison && t.in_journal && t.in_chatbot) topics.push_back(&t);
  std::stable_sort(topics.begin(), topics.end(), [](const Topic* a, const Topic* b) {
    return a->rank.value_or(1 << 30) < b->rank.value_or(1 << 30);
  });
  for (const Topic* t : topics) {
    std::vector<double> j, c;
    for (const auto& r : rows)
      if (r.topic == t) (r.conv->condition == Condition::chatbot ? c : j).push_back(r.happiness);
    if (j.empty() && c.empty()) continue;
    TopicContrast tc;
    tc.topic_id = t->id;
    tc.rank = t->rank;
    tc.journal = summarize(*t, j);
    tc.chatbot = summarize(*t, c);
    tc.difference = tc.chatbot.mean - tc.journal.mean;
    tc.test = welch_or_notice(c, j, "topic " + t->id, out.notices);
    out.topics.push_back(std::move(tc));
  }
  std::vector<std::optional<stats::TestResult>*> tests;
  std::vector<double*> targets;
  for (auto& tc : out.topics) {
    tests.push_back(&tc.test);
    targets.push_back(&tc.p_adjusted);
  }
  adjust(tests, targets);
  for (const auto& tc : out.topics)
    if (tc.test && tc.p_adjusted < 0.05 && tc.difference > 0) ++out.significant_positive;
  return out;
}

InteractionFit topic_rank_interaction(const Corpus& corpus, const RankInteractionOptions& options,
                                      const HappinessOverride* happiness) {
  require_both_in_corpus(corpus, "topic-rank interaction");
  const Ranked ranked(corpus);
  const Corpus& cp = ranked.corpus();
  auto rows = comparable_rows(cp, happiness);
  std::erase_if(rows, [](const Row& r) { return !r.topic->rank; });
  if (rows.empty()) fail(Errc::UnrankedTopics, "no rated conversation falls on a ranked topic");

  std::string extra = "ranked topics";
  std::vector<std::pair<std::string, std::map<std::string, double>>> covs;
  if (options.covariates) {
    std::map<std::string, std::map<std::string, double>> raw;
    static const std::vector<std::string> numeric = {"age", "education", "phq9_total"};
    std::set<std::string> complete;
    for (const auto& r : rows) {
      const Participant* p = cp.find_participant(r.conv->participant_id);
      if (!p) continue;
      bool ok = p->covariates.count("gender") > 0;
      for (const auto& k : numeric) {
        auto it = p->covariates.find(k);
        ok = ok && it != p->covariates.end() && std::holds_alternative<double>(it->second);
      }
      if (ok) complete.insert(p->id);
    }
    std::erase_if(rows, [&](const Row& r) { return !complete.count(r.conv->participant_id); });
    for (const auto& id : complete) {
      const Participant* p = cp.find_participant(id);
      for (const auto& k : numeric) raw[k][id] = std::get<double>(p->covariates.at(k));
      const auto& g = p->covariates.at("gender");
      raw["male"][id] = std::holds_alternative<std::string>(g) && std::get<std::string>(g) == "male" ? 1.0 : 0.0;
    }
    for (const auto& k : numeric) {
      if (auto z = zscores(raw[k])) covs.emplace_back(k + "_z", std::move(*z));
      else extra += "; " + k + " constant, omitted";
    }
    std::set<double> levels;
    for (const auto& [_, x] : raw["male"]) levels.insert(x);
    if (levels.size() > 1) covs.emplace_back("male", std::move(raw["male"]));
    else extra += "; gender constant, omitted";
    extra += "; participants with all covariates (z-scored across conditions)";
    if (rows.empty()) fail(Errc::InsufficientData, "no participant has every covariate");
  }
  require_both_conditions(rows, "topic-rank interaction");

  std::vector<double> y, cond, rank, inter;
  std::vector<std::string> subjects;
  Regressors regs;
  std::vector<std::vector<double>> cov_main(covs.size()), cov_inter(covs.size());
  for (const auto& r : rows) {
    const double c = r.conv->condition == Condition::chatbot ? 1.0 : 0.0;
    const double k = *r.topic->rank;
    y.push_back(r.happiness);
    cond.push_back(c);
    rank.push_back(k);
    inter.push_back(c * k);
    subjects.push_back(r.conv->participant_id);
    for (std::size_t i = 0; i < covs.size(); ++i) {
      const double v = covs[i].second.at(r.conv->participant_id);
      cov_main[i].push_back(v);
      cov_inter[i].push_back(v * k);
    }
  }
  regs.add("chatbot", cond);
  regs.add("rank", rank);
  regs.add("chatbot_x_rank", inter);
  for (std::size_t i = 0; i < covs.size(); ++i) {
    regs.add(covs[i].first, cov_main[i]);
    regs.add(covs[i].first + "_x_rank", cov_inter[i]);
  }
  return fit_interaction("chatbot_x_rank", regs, y, subjects, row_filter(happiness, extra));
}

ValenceInteraction valence_group_interaction(const Corpus& corpus, const HappinessOverride* happiness) {
  require_both_in_corpus(corpus, "valence-group interaction");
  const Ranked ranked(corpus);
  auto rows = comparable_rows(ranked.corpus(), happiness);
  std::erase_if(rows, [](const Row& r) { return !r.topic->valence_group; });
  if (rows.empty()) fail(Errc::UnrankedTopics, "no rated conversation falls on a topic with a valence group");
  require_both_conditions(rows, "valence-group interaction");

  std::vector<double> y, cond, neg, inter;
  std::vector<std::string> subjects;
  std::vector<Row> positive, negative;
  for (const auto& r : rows) {
    const double c = r.conv->condition == Condition::chatbot ? 1.0 : 0.0;
    const double n = *r.topic->valence_group == ValenceGroup::negative ? 1.0 : 0.0;
    y.push_back(r.happiness);
    cond.push_back(c);
    neg.push_back(n);
    inter.push_back(c * n);
    subjects.push_back(r.conv->participant_id);
    (n > 0 ? negative : positive).push_back(r);
  }
  Regressors regs;
  regs.add("chatbot", cond);
  regs.add("negative", neg);
  regs.add("chatbot_x_negative", inter);

  ValenceInteraction out;
  out.fit = fit_interaction("chatbot_x_negative", regs, y, subjects, row_filter(happiness, "topics with valence group"));
  auto group_test = [&](const std::vector<Row>& g, const std::string& name) -> std::optional<stats::TestResult> {
    const auto [c, j] = participant_means(g);
    return welch_or_notice(c, j, name + " topics", out.notices);
  };
  out.positive = group_test(positive, "positive");
  out.negative = group_test(negative, "negative");
  return out;
}

BestMiddleWorst best_middle_worst_boost(const Corpus& corpus) {
  const Ranked ranked(corpus);
  const Corpus& cp = ranked.corpus();
  BestMiddleWorst out;
  out.filter = "chatbot participants with exactly three rated conversations on ranked topics";
  std::map<Label, std::vector<double>> boosts;
  for (const auto& p : cp.participants) {
    if (p.condition != Condition::chatbot) continue;
    std::map<std::string, Label> labels;
    try {
      labels = label_best_middle_worst(p, cp);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    std::map<Label, double> b;
    for (const auto& [conv_id, label] : labels) {
      const Conversation* c = nullptr;
      for (const auto* x : cp.conversations_of(p.id))
        if (x->id == conv_id) c = x;
      if (!c || !c->happiness_post) break;
      b[label] = *c->happiness_post - *cp.find_topic(c->topic_id)->journal_mean_happiness;
    }
    if (b.size() != 3) {
      ++out.skipped;
      continue;
    }
    for (const auto& [label, v] : b) boosts[label].push_back(v);
    ++out.participants;
  }
  if (out.participants < 2)
    fail(Errc::InsufficientData, "best/middle/worst boosts need at least two labelled chatbot participants");

  for (Label l : {Label::best, Label::middle, Label::worst}) {
    const auto& v = boosts[l];
    BoostSummary s;
    s.label = l;
    s.n = v.size();
    s.mean_boost = stats::mean(v);
    s.sem = std::sqrt(stats::sample_variance(v) / static_cast<double>(v.size()));
    s.test = one_sample_or_null(v);
    out.labels.push_back(s);
  }
  for (auto [hi, lo] : {std::pair{Label::middle, Label::best}, std::pair{Label::worst, Label::middle},
                        std::pair{Label::worst, Label::best}})
    out.comparisons.push_back({hi, lo, paired_or_null(boosts[hi], boosts[lo])});
  return out;
}

FirstMessageEquivalence first_message_equivalence(const Corpus& corpus, Scorer& scorer, int n_perms,
                                                  std::uint64_t seed) {
  struct Side {
    std::vector<double> words, sentiment;
    std::vector<double> centroid;
  };
  std::map<std::string, std::pair<Side, Side>> by_topic;  // journal, chatbot
  std::vector<std::string> order;
  for (const auto& c : corpus.conversations) {
    const Topic* t = corpus.find_topic(c.topic_id);
    if (!t || t->excluded_from_comparison) continue;
    const auto users = c.user_utterances();
    if (users.empty()) continue;
    const Utterance& u = *users.front();
    if (!by_topic.count(t->id)) order.push_back(t->id);
    auto& side = c.condition == Condition::chatbot ? by_topic[t->id].second : by_topic[t->id].first;
    side.words.push_back(static_cast<double>(word_count(u.text)));
    side.sentiment.push_back(u.sentiment ? *u.sentiment : scorer.score_text(u.text, Granularity::utterance).value);
    const auto e = scorer.embed(u.text);
    if (side.centroid.empty()) side.centroid.assign(e.values.size(), 0.0);
    if (e.values.size() != side.centroid.size())
      fail(Errc::DimensionMismatch, "embeddings of first messages differ in dimension");
    for (std::size_t i = 0; i < e.values.size(); ++i) side.centroid[i] += e.values[i];
  }

  FirstMessageEquivalence out;
  out.n_perms = n_perms;
  out.seed = seed;
  out.filter = "first user message of every conversation; comparable topics";
  bool any_journal = false, any_chat = false;
  std::vector<const std::vector<double>*> jc, cc;
  for (const auto& id : order) {
    const auto& [j, c] = by_topic.at(id);
    any_journal = any_journal || !j.words.empty();
    any_chat = any_chat || !c.words.empty();
    if (j.words.empty() || c.words.empty()) {
      out.notices.push_back("topic " + id + ": first messages from one condition only, skipped");
      continue;
    }
    FirstMessageTopic ft;
    ft.topic_id = id;
    ft.n_journal = j.words.size();
    ft.n_chatbot = c.words.size();
    ft.words_journal = stats::mean(j.words);
    ft.words_chatbot = stats::mean(c.words);
    ft.word_test = welch_or_notice(c.words, j.words, "word count, topic " + id, out.notices);
    ft.sentiment_journal = stats::mean(j.sentiment);
    ft.sentiment_chatbot = stats::mean(c.sentiment);
    ft.sentiment_test = welch_or_notice(c.sentiment, j.sentiment, "sentiment, topic " + id, out.notices);
    ft.centroid_cosine = cosine_similarity(j.centroid, c.centroid);
    jc.push_back(&j.centroid);
    cc.push_back(&c.centroid);
    out.topics.push_back(std::move(ft));
  }
  if (!any_journal || !any_chat)
    fail(Errc::MissingCondition, "first-message comparison needs both conditions");
  if (out.topics.empty()) fail(Errc::InsufficientData, "no topic has first messages from both conditions");

  std::vector<std::optional<stats::TestResult>*> wt, st;
  std::vector<double*> wp, sp;
  std::vector<double> cosines;
  for (auto& ft : out.topics) {
    wt.push_back(&ft.word_test);
    wp.push_back(&ft.word_p_adjusted);
    st.push_back(&ft.sentiment_test);
    sp.push_back(&ft.sentiment_p_adjusted);
    cosines.push_back(ft.centroid_cosine);
  }
  adjust(wt, wp);
  adjust(st, sp);
  out.statistic = stats::mean(cosines);
  if (cosines.size() > 1) out.statistic_sd = std::sqrt(stats::sample_variance(cosines));

  auto statistic = [&](std::span<const std::size_t> perm) {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += cosine_similarity(*jc[i], *cc[perm[i]]);
    return s / static_cast<double>(perm.size());
  };
  out.permutation_p = stats::permutation_pvalue(out.statistic, statistic, stats::uniform_shuffler(jc.size()), n_perms, seed);
  return out;
}

SimulatedReproduction simulated_data_reproduction(const Corpus& corpus, const spe::CvReport& cv) {
  const Ranked ranked(corpus);
  const Corpus& cp = ranked.corpus();
  std::map<std::string, double> chat_sim;
  try {
    for (const auto& s : spe::simulate_happiness(cv)) chat_sim[s.conversation_id] = s.value;
  } catch (const Error& e) {
    fail(Errc::IncompleteSimulation, "no usable chatbot simulation", e.what());
  }
  std::map<std::string, double> journal_sim;
  try {
    for (const auto& p : spe::journal_entry_predictions(cv.full_three, cp))
      journal_sim[p.conversation_id] = spe::clamp_happiness(p.predicted);
  } catch (const Error& e) {
    fail(Errc::IncompleteSimulation, "journal entries cannot be simulated", e.what());
  }

  SimulatedReproduction out;
  HappinessOverride observed, simulated;
  for (const auto& r : comparable_rows(cp, nullptr)) {
    const auto& sims = r.conv->condition == Condition::chatbot ? chat_sim : journal_sim;
    auto it = sims.find(r.conv->id);
    if (it == sims.end()) {
      if (r.conv->condition == Condition::chatbot) ++out.chatbot_rows_without_simulation;
      continue;
    }
    observed[r.conv->id] = r.happiness;
    simulated[r.conv->id] = it->second;
    ++(r.conv->condition == Condition::chatbot ? out.chatbot_rows : out.journal_rows);
  }
  if (out.chatbot_rows == 0 || out.journal_rows == 0)
    fail(Errc::IncompleteSimulation, "simulation covers no rows of one condition",
         "chatbot " + std::to_string(out.chatbot_rows) + ", journal " + std::to_string(out.journal_rows));

  out.observed_rank = topic_rank_interaction(cp, {}, &observed);
  out.simulated_rank = topic_rank_interaction(cp, {}, &simulated);
  out.observed_valence = valence_group_interaction(cp, &observed);
  out.simulated_valence = valence_group_interaction(cp, &simulated);
  auto sign = [](double x) { return (x > 0) - (x < 0); };
  out.rank_sign_matches = sign(out.observed_rank.estimate) == sign(out.simulated_rank.estimate);
  out.valence_sign_matches = sign(out.observed_valence.fit.estimate) == sign(out.simulated_valence.fit.estimate);
  return out;
}

}  // namespace wbl::analyses
