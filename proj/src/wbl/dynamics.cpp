#include "wbl/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "wbl/error.hpp"

namespace wbl::dynamics {

namespace {

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double sem(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt(stats::sample_variance(v) / static_cast<double>(v.size()));
}

// Number of complete user->chatbot alternations, ignoring scores.
std::size_t complete_pairs(const Conversation& c) {
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < c.utterances.size(); ++i) {
    if (c.utterances[i].role == Role::user && c.utterances[i + 1].role == Role::chatbot) {
      ++n;
      ++i;
    }
  }
  return n;
}

std::map<std::string, int> catalog_ranks(const Corpus& corpus) {
  std::map<std::string, int> out;
  for (const auto& t : corpus.topics)
    if (t.rank) out[t.id] = *t.rank;
  return out;
}

}  // namespace

std::string_view to_string(Normalization n) noexcept {
  return n == Normalization::raw_pair_index ? "raw_pair_index" : "percent_position";
}

std::string_view to_string(ChangeStatus s) noexcept {
  switch (s) {
    case ChangeStatus::tested: return "tested";
    case ChangeStatus::no_change: return "no_change";
    case ChangeStatus::constant_shift: return "constant_shift";
  }
  return "?";
}

std::vector<UtterancePair> build_pairs(const Conversation& c, std::size_t max_pairs) {
  if (c.condition != Condition::chatbot)
    fail(Errc::NotChatCondition, "conversation '" + c.id + "' is not a chatbot conversation");
  std::vector<UtterancePair> pairs;
  for (std::size_t i = 1; i + 1 < c.utterances.size() && pairs.size() < max_pairs; ++i) {
    const auto& u = c.utterances[i];
    const auto& b = c.utterances[i + 1];
    if (u.role != Role::user || b.role != Role::chatbot) continue;
    if (!u.sentiment || !b.sentiment)
      fail(Errc::UnscoredUtterances, "conversation '" + c.id + "' has unscored utterances",
           "index " + std::to_string(u.sentiment ? b.index : u.index));
    pairs.push_back({c.id, static_cast<int>(pairs.size()) + 1, *u.sentiment, *b.sentiment});
    ++i;
  }
  return pairs;
}

std::vector<PairedConversation> corpus_pairs(const Corpus& corpus, const PairSelection& selection) {
  std::vector<PairedConversation> out;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot) continue;
    if (!selection.topics.empty() && !selection.topics.count(c.topic_id)) continue;
    out.push_back({c.id, c.participant_id, c.topic_id, build_pairs(c, selection.max_pairs)});
  }
  return out;
}

PairingSummary pairing_summary(const Corpus& corpus, std::size_t max_pairs) {
  PairingSummary s;
  std::vector<double> counts;
  std::size_t total = 0, excluded = 0;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot) continue;
    const std::size_t n = complete_pairs(c);
    counts.push_back(static_cast<double>(n));
    ++s.histogram[static_cast<int>(n)];
    std::size_t seen_pairs = 0;
    for (std::size_t i = 1; i < c.utterances.size(); ++i) {
      ++total;
      if (seen_pairs >= max_pairs) ++excluded;
      if (c.utterances[i].role == Role::chatbot && c.utterances[i - 1].role == Role::user) ++seen_pairs;
    }
  }
  s.conversations = counts.size();
  if (!counts.empty()) s.mean_pairs = stats::mean(counts);
  if (counts.size() > 1) s.sd_pairs = std::sqrt(stats::sample_variance(counts));
  s.excluded_fraction = total ? static_cast<double>(excluded) / static_cast<double>(total) : 0.0;
  return s;
}

TrajectoryFit trajectory_regression(const std::vector<PairedConversation>& conversations, Normalization normalization) {
  std::vector<double> y, position, role, inter;
  std::vector<std::string> subjects;
  TrajectoryFit out;
  out.normalization = normalization;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> binned;
  for (const auto& c : conversations) {
    if (c.pairs.empty()) continue;
    ++out.n_conversations;
    const double n = static_cast<double>(c.pairs.size());
    for (const auto& p : c.pairs) {
      double x = p.pair_index;
      int bin = p.pair_index;
      if (normalization == Normalization::percent_position) {
        x = c.pairs.size() > 1 ? (p.pair_index - 1) / (n - 1.0) : 0.0;
        bin = std::min(9, static_cast<int>(std::floor(x * 10.0)));
      }
      for (int r = 0; r < 2; ++r) {
        y.push_back(r ? p.chatbot_sentiment : p.user_sentiment);
        position.push_back(x);
        role.push_back(r);
        inter.push_back(r * x);
        subjects.push_back(c.participant_id);
      }
      binned[bin].first.push_back(p.user_sentiment);
      binned[bin].second.push_back(p.chatbot_sentiment);
    }
  }
  if (y.size() < 4) fail(Errc::DegeneratePositions, "trajectory needs at least 2 utterance pairs");
  if (is_constant(position)) fail(Errc::DegeneratePositions, "every pair has the same position");

  stats::DesignMatrix X(y.size());
  X.add_column("position", position).add_column("role", role).add_column("role_x_position", inter);
  try {
    out.fit = stats::fe_ols_fit(X, y, subjects);
  } catch (const Error& e) {
    if (e.code() != Errc::NoWithinVariation && e.code() != Errc::RankDeficient) throw;
    fail(Errc::DegeneratePositions, "positions do not vary within participants", e.what());
  }
  out.slope_user = out.fit.coef("position");
  out.se_user = out.fit.se("position");
  out.interaction = out.fit.coef("role_x_position");
  out.se_interaction = out.fit.se("role_x_position");
  out.p_interaction = out.fit.p("role_x_position");
  out.slope_chatbot = out.slope_user + out.interaction;
  out.se_chatbot = out.fit.se_of_sum("position", "role_x_position");

  for (const auto& [bin, values] : binned) {
    TrajectoryBin b;
    b.position = normalization == Normalization::percent_position ? (bin + 0.5) / 10.0 : bin;
    b.n = values.first.size();
    b.mean_user = stats::mean(values.first);
    b.sem_user = sem(values.first);
    b.mean_chatbot = stats::mean(values.second);
    b.sem_chatbot = sem(values.second);
    out.bins.push_back(b);
  }
  return out;
}

FirstLastReport first_last_topic_tests(const Corpus& corpus, std::size_t min_conversations) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_topic;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot) continue;
    const auto users = c.user_utterances();
    for (const auto* u : users)
      if (!u->sentiment)
        fail(Errc::UnscoredUtterances, "conversation '" + c.id + "' has unscored user utterances",
             "index " + std::to_string(u->index));
    auto& slot = by_topic[c.topic_id];
    if (users.size() < 2) continue;
    slot.first.push_back(*users.front()->sentiment);
    slot.second.push_back(*users.back()->sentiment);
  }

  FirstLastReport report;
  std::vector<double> p_tested;
  std::vector<std::size_t> tested_index;
  for (const auto& [topic, fl] : by_topic) {
    if (fl.first.size() < std::max<std::size_t>(min_conversations, 2)) {
      report.notices.push_back("first_last: topic '" + topic + "' skipped (TooFewConversations, n = " +
                               std::to_string(fl.first.size()) + ")");
      continue;
    }
    TopicChange tc;
    tc.topic_id = topic;
    tc.n = fl.first.size();
    tc.mean_first = stats::mean(fl.first);
    tc.mean_last = stats::mean(fl.second);
    try {
      tc.test = stats::paired_t(fl.first, fl.second);
      tested_index.push_back(report.topics.size());
      p_tested.push_back(tc.test->p_value);
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroVariance) throw;
      tc.status = tc.mean_first == tc.mean_last ? ChangeStatus::no_change : ChangeStatus::constant_shift;
      report.notices.push_back("first_last: topic '" + topic + "' has zero variance in differences (" +
                               std::string(to_string(tc.status)) + ")");
    }
    report.topics.push_back(std::move(tc));
  }
  const auto adjusted = stats::bh_adjust(p_tested);
  for (std::size_t k = 0; k < tested_index.size(); ++k) report.topics[tested_index[k]].p_adjusted = adjusted[k];
  return report;
}

namespace {

struct RoleMeans {
  double user = 0.0, chatbot = 0.0;
  std::size_t n = 0;
};

void require_role_scores(const Conversation& c) {
  if (!c.user_role_sentiment || !c.chatbot_role_sentiment)
    fail(Errc::UnscoredConversations, "conversation '" + c.id + "' lacks conversation-level role scores");
}

stats::RegressionFit fit_mirroring(const std::vector<std::pair<std::string, RoleMeans>>& rows) {
  std::vector<double> x, y;
  std::vector<std::string> ids;
  for (const auto& [id, m] : rows) {
    x.push_back(m.user / static_cast<double>(m.n));
    y.push_back(m.chatbot / static_cast<double>(m.n));
    ids.push_back(id);
  }
  stats::DesignMatrix X(x.size());
  X.add_intercept().add_column("user", x).set_clusters(ids);
  return stats::ols_fit(X, y);
}

std::map<std::string, RoleMeans> participant_role_means(const Corpus& corpus) {
  std::map<std::string, RoleMeans> out;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot) continue;
    require_role_scores(c);
    auto& m = out[c.participant_id];
    m.user += *c.user_role_sentiment;
    m.chatbot += *c.chatbot_role_sentiment;
    ++m.n;
  }
  if (out.size() < 3) fail(Errc::UnscoredConversations, "mirroring needs role scores from at least 3 participants");
  return out;
}

}  // namespace

stats::RegressionFit mirroring_regression(const Corpus& corpus) {
  const auto means = participant_role_means(corpus);
  return fit_mirroring({means.begin(), means.end()});
}

MirroringReport mirroring_analysis(const Corpus& corpus) {
  MirroringReport report;
  const auto means = participant_role_means(corpus);
  report.fit = fit_mirroring({means.begin(), means.end()});
  report.n_participants = means.size();
  std::size_t above = 0;
  for (const auto& [_, m] : means) above += m.chatbot > m.user;
  report.percent_chatbot_above_user = 100.0 * static_cast<double>(above) / static_cast<double>(means.size());

  std::map<std::string, std::map<std::string, RoleMeans>> per_topic;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot) continue;
    auto& m = per_topic[c.topic_id][c.participant_id];
    m.user += *c.user_role_sentiment;
    m.chatbot += *c.chatbot_role_sentiment;
    ++m.n;
  }
  for (const auto& [topic, rows] : per_topic) {
    if (rows.size() < 3) {
      report.notices.push_back("mirroring: topic '" + topic + "' skipped (fewer than 3 participants)");
      continue;
    }
    try {
      report.per_topic.push_back({topic, rows.size(), fit_mirroring({rows.begin(), rows.end()})});
    } catch (const Error& e) {
      if (e.code() != Errc::RankDeficient) throw;
      report.notices.push_back("mirroring: topic '" + topic + "' skipped (user sentiment constant)");
    }
  }
  return report;
}

stats::RegressionFit happiness_on_role_sentiment(const Corpus& corpus) {
  std::vector<double> user, chatbot, y;
  std::vector<std::string> ids;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::chatbot || !c.happiness_post) continue;
    require_role_scores(c);
    user.push_back(*c.user_role_sentiment);
    chatbot.push_back(*c.chatbot_role_sentiment);
    y.push_back(*c.happiness_post);
    ids.push_back(c.participant_id);
  }
  stats::DesignMatrix X(y.size());
  X.add_column("user", user).add_column("chatbot", chatbot);
  return stats::fe_ols_fit(X, y, ids);
}

std::vector<LaggedRow> lagged_rows(const std::vector<PairedConversation>& conversations) {
  std::vector<LaggedRow> rows;
  for (const auto& c : conversations) {
    for (std::size_t t = 1; t < c.pairs.size(); ++t) {
      const auto& prev = c.pairs[t - 1];
      const auto& cur = c.pairs[t];
      rows.push_back({c.participant_id, c.conversation_id, c.topic_id, cur.pair_index, cur.user_sentiment,
                      cur.chatbot_sentiment, prev.user_sentiment, prev.chatbot_sentiment});
    }
  }
  return rows;
}

CrossLaggedFit cross_lagged_fit(const std::vector<PairedConversation>& conversations, const Corpus& corpus,
                                const CrossLaggedOptions& options) {
  return cross_lagged_fit(lagged_rows(conversations), catalog_ranks(corpus), options);
}

CrossLaggedFit cross_lagged_fit(const std::vector<LaggedRow>& all_rows, const std::map<std::string, int>& topic_rank,
                                const CrossLaggedOptions& options) {
  std::vector<const LaggedRow*> rows;
  for (const auto& r : all_rows)
    if (!options.topic_rank || topic_rank.count(r.topic_id)) rows.push_back(&r);
  if (options.topic_rank && rows.empty()) fail(Errc::UnrankedTopics, "no lagged rows on ranked topics");
  if (rows.size() < options.min_rows)
    fail(Errc::TooFewLaggedRows, "cross-lagged models need at least " + std::to_string(options.min_rows) +
                                     " lagged rows, got " + std::to_string(rows.size()));

  const std::size_t n = rows.size();
  std::vector<double> u(n), c(n), ul(n), cl(n), rank(n), rank_ul(n), rank_cl(n);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = *rows[i];
    u[i] = r.user;
    c[i] = r.chatbot;
    ul[i] = r.user_lag;
    cl[i] = r.chatbot_lag;
    ids[i] = r.participant_id;
    if (options.topic_rank) {
      rank[i] = topic_rank.at(r.topic_id);
      rank_ul[i] = rank[i] * ul[i];
      rank_cl[i] = rank[i] * cl[i];
    }
  }
  if (is_constant(ul) || is_constant(cl))
    fail(Errc::ConstantSeries, std::string(is_constant(ul) ? "user" : "chatbot") + " sentiment is constant");

  auto design = [&](bool user_model) {
    stats::DesignMatrix X(n);
    if (!options.fixed_effects) X.add_intercept();
    if (user_model)
      X.add_column("user_lag", ul).add_column("chatbot_lag", cl);
    else
      X.add_column("chatbot_lag", cl).add_column("user_lag", ul);
    if (options.topic_rank) {
      X.add_column("rank", rank);
      if (user_model)
        X.add_column("rank_x_user_lag", rank_ul).add_column("rank_x_chatbot_lag", rank_cl);
      else
        X.add_column("rank_x_chatbot_lag", rank_cl).add_column("rank_x_user_lag", rank_ul);
    }
    if (!options.fixed_effects) X.set_clusters(ids);
    return X;
  };
  auto fit = [&](const stats::DesignMatrix& X, const std::vector<double>& y) {
    if (!options.fixed_effects) return stats::ols_fit(X, y);
    return stats::fe_ols_fit(X, y, ids, {.drop_constant_columns = true});
  };

  CrossLaggedFit out;
  out.options = options;
  out.n_rows = n;
  out.user_model = fit(design(true), u);
  out.chatbot_model = fit(design(false), c);
  out.cross_difference = stats::coeff_difference_z(out.user_model.coef("chatbot_lag"), out.user_model.se("chatbot_lag"),
                                                   out.chatbot_model.coef("user_lag"), out.chatbot_model.se("user_lag"));
  return out;
}

ImportanceReport relative_importance_by_topic(const std::vector<PairedConversation>& conversations,
                                              const Corpus& corpus, std::size_t min_rows) {
  std::map<std::string, std::vector<LaggedRow>> by_topic;
  for (auto& r : lagged_rows(conversations)) by_topic[r.topic_id].push_back(std::move(r));

  ImportanceReport report;
  std::vector<double> positive, negative;
  for (const auto& [topic, rows] : by_topic) {
    if (rows.size() < std::max<std::size_t>(min_rows, 4)) {
      report.notices.push_back("relative_importance: topic '" + topic + "' skipped (TooFewLaggedRows, n = " +
                               std::to_string(rows.size()) + ")");
      continue;
    }
    const std::size_t n = rows.size();
    std::vector<double> u(n), c(n), ul(n), cl(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rows[i].user;
      c[i] = rows[i].chatbot;
      ul[i] = rows[i].user_lag;
      cl[i] = rows[i].chatbot_lag;
    }
    TopicImportance ti;
    ti.topic_id = topic;
    ti.n_rows = n;
    try {
      stats::DesignMatrix Xu(n), Xc(n);
      Xu.add_column("user_lag", ul).add_column("chatbot_lag", cl);
      Xc.add_column("chatbot_lag", cl).add_column("user_lag", ul);
      ti.user_model = stats::lmg_shares(Xu, u);
      ti.chatbot_model = stats::lmg_shares(Xc, c);
    } catch (const Error& e) {
      if (e.code() != Errc::RankDeficient) throw;
      report.notices.push_back("relative_importance: topic '" + topic + "' skipped (lagged predictors collinear)");
      continue;
    }
    if (const Topic* t = corpus.find_topic(topic); t && t->valence_group && ti.user_model.r_squared > 0.0)
      (*t->valence_group == ValenceGroup::positive ? positive : negative).push_back(ti.user_model.percentages[1]);
    report.topics.push_back(std::move(ti));
  }
  if (!positive.empty()) report.chatbot_share_positive = stats::mean(positive);
  if (!negative.empty()) report.chatbot_share_negative = stats::mean(negative);
  return report;
}

}  // namespace wbl::dynamics
