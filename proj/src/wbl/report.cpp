#include "wbl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace wbl::report {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? to_json(*v) : json(nullptr);
}

json summary_json(const analyses::TopicSummary& s) {
  return {{"topic_id", s.topic_id}, {"rank", opt(s.rank)}, {"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"sem", s.sem}};
}

}  // namespace

json to_json(const stats::TestResult& t) {
  json j{{"kind", to_string(t.kind)}, {"statistic", t.statistic}, {"df", t.df},
         {"p", t.p_value},            {"estimate", t.estimate},   {"n", t.n}};
  if (t.kind == stats::TestKind::anova_F) j["df2"] = t.df2;
  if (t.p_one_sided) j["p_one_sided"] = *t.p_one_sided;
  if (t.effect_size) j["effect_size"] = *t.effect_size;
  return j;
}

json to_json(const stats::RegressionFit& f) {
  json terms = json::array();
  for (std::size_t i = 0; i < f.names.size(); ++i)
    terms.push_back({{"name", f.names[i]},
                     {"estimate", f.coefficients[i]},
                     {"se", f.std_errors[i]},
                     {"t", f.t_values[i]},
                     {"p", f.p_values[i]}});
  json j{{"terms", std::move(terms)},
         {"r_squared", f.r_squared},
         {"n", f.n},
         {"df", f.df},
         {"se_kind", f.se_kind == stats::SeKind::classical ? "classical" : "cluster_robust"},
         {"n_clusters", f.n_clusters}};
  if (f.absorbed_groups) j["absorbed_groups"] = f.absorbed_groups;
  if (!f.absorbed_columns.empty()) j["absorbed_columns"] = f.absorbed_columns;
  return j;
}

json to_json(const stats::LmgShares& s) {
  return {{"names", s.names}, {"shares", s.shares}, {"percentages", s.percentages}, {"r_squared", s.r_squared}};
}

json to_json(const analyses::AnovaResult& r) {
  json topics = json::array();
  for (const auto& t : r.topics) topics.push_back(summary_json(t));
  return {{"test", to_json(r.test)}, {"topics", std::move(topics)}};
}

json to_json(const analyses::ConditionComparison& r) {
  json topics = json::array();
  for (const auto& t : r.topics)
    topics.push_back({{"topic_id", t.topic_id},
                      {"rank", opt(t.rank)},
                      {"journal", summary_json(t.journal)},
                      {"chatbot", summary_json(t.chatbot)},
                      {"difference", t.difference},
                      {"test", opt_json(t.test)},
                      {"p_adjusted", t.p_adjusted}});
  return {{"overall", to_json(r.overall)},
          {"journal_mean", r.journal_mean},
          {"chatbot_mean", r.chatbot_mean},
          {"journal_participants", r.journal_participants},
          {"chatbot_participants", r.chatbot_participants},
          {"topics", std::move(topics)},
          {"significant_positive", r.significant_positive},
          {"notices", r.notices}};
}

json to_json(const analyses::InteractionFit& r) {
  return {{"term", r.term},
          {"estimate", r.estimate},
          {"se", r.se},
          {"t", r.t},
          {"p", r.p},
          {"fixed_effects", to_json(r.fe_fit)},
          {"pooled", to_json(r.pooled_fit)},
          {"n_rows", r.n_rows},
          {"n_participants", r.n_participants}};
}

json to_json(const analyses::ValenceInteraction& r) {
  return {{"fit", to_json(r.fit)},
          {"positive", opt_json(r.positive)},
          {"negative", opt_json(r.negative)},
          {"notices", r.notices}};
}

json to_json(const analyses::BestMiddleWorst& r) {
  json labels = json::array();
  for (const auto& l : r.labels)
    labels.push_back({{"label", to_string(l.label)},
                      {"n", l.n},
                      {"mean_boost", l.mean_boost},
                      {"sem", l.sem},
                      {"test", to_json(l.test)}});
  json comps = json::array();
  for (const auto& c : r.comparisons)
    comps.push_back({{"higher", to_string(c.higher)}, {"lower", to_string(c.lower)}, {"test", to_json(c.test)}});
  return {{"labels", std::move(labels)},
          {"comparisons", std::move(comps)},
          {"participants", r.participants},
          {"skipped", r.skipped}};
}

json to_json(const analyses::FirstMessageEquivalence& r) {
  json topics = json::array();
  for (const auto& t : r.topics)
    topics.push_back({{"topic_id", t.topic_id},
                      {"n_journal", t.n_journal},
                      {"n_chatbot", t.n_chatbot},
                      {"words_journal", t.words_journal},
                      {"words_chatbot", t.words_chatbot},
                      {"word_test", opt_json(t.word_test)},
                      {"word_p_adjusted", t.word_p_adjusted},
                      {"sentiment_journal", t.sentiment_journal},
                      {"sentiment_chatbot", t.sentiment_chatbot},
                      {"sentiment_test", opt_json(t.sentiment_test)},
                      {"sentiment_p_adjusted", t.sentiment_p_adjusted},
                      {"centroid_cosine", t.centroid_cosine}});
  return {{"topics", std::move(topics)},
          {"statistic", r.statistic},
          {"statistic_sd", r.statistic_sd},
          {"permutation_p", r.permutation_p},
          {"n_perms", r.n_perms},
          {"seed", r.seed},
          {"notices", r.notices}};
}

json to_json(const analyses::SimulatedReproduction& r) {
  return {{"observed_rank", to_json(r.observed_rank)},
          {"simulated_rank", to_json(r.simulated_rank)},
          {"observed_valence", to_json(r.observed_valence)},
          {"simulated_valence", to_json(r.simulated_valence)},
          {"chatbot_rows", r.chatbot_rows},
          {"journal_rows", r.journal_rows},
          {"chatbot_rows_without_simulation", r.chatbot_rows_without_simulation},
          {"rank_sign_matches", r.rank_sign_matches},
          {"valence_sign_matches", r.valence_sign_matches}};
}

json to_json(const dynamics::PairingSummary& r) {
  json hist = json::array();
  for (const auto& [pairs, n] : r.histogram) hist.push_back({{"pairs", pairs}, {"conversations", n}});
  return {{"conversations", r.conversations},
          {"mean_pairs", r.mean_pairs},
          {"sd_pairs", r.sd_pairs},
          {"histogram", std::move(hist)},
          {"excluded_fraction", r.excluded_fraction}};
}

json to_json(const dynamics::TrajectoryFit& r) {
  json bins = json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"position", b.position},
                    {"n", b.n},
                    {"mean_user", b.mean_user},
                    {"sem_user", b.sem_user},
                    {"mean_chatbot", b.mean_chatbot},
                    {"sem_chatbot", b.sem_chatbot}});
  return {{"normalization", to_string(r.normalization)},
          {"slope_user", r.slope_user},
          {"se_user", r.se_user},
          {"slope_chatbot", r.slope_chatbot},
          {"se_chatbot", r.se_chatbot},
          {"interaction", r.interaction},
          {"se_interaction", r.se_interaction},
          {"p_interaction", r.p_interaction},
          {"n_conversations", r.n_conversations},
          {"fit", to_json(r.fit)},
          {"bins", std::move(bins)}};
}

json to_json(const dynamics::FirstLastReport& r) {
  json topics = json::array();
  for (const auto& t : r.topics)
    topics.push_back({{"topic_id", t.topic_id},
                      {"n", t.n},
                      {"mean_first", t.mean_first},
                      {"mean_last", t.mean_last},
                      {"status", to_string(t.status)},
                      {"test", opt_json(t.test)},
                      {"p_adjusted", t.p_adjusted}});
  return {{"topics", std::move(topics)}, {"notices", r.notices}};
}

json to_json(const dynamics::MirroringReport& r) {
  json topics = json::array();
  for (const auto& t : r.per_topic) topics.push_back({{"topic_id", t.topic_id}, {"n", t.n}, {"fit", to_json(t.fit)}});
  return {{"fit", to_json(r.fit)},
          {"n_participants", r.n_participants},
          {"percent_chatbot_above_user", r.percent_chatbot_above_user},
          {"per_topic", std::move(topics)},
          {"notices", r.notices}};
}

json to_json(const dynamics::CrossLaggedFit& r) {
  return {{"user_model", to_json(r.user_model)},
          {"chatbot_model", to_json(r.chatbot_model)},
          {"cross_difference", to_json(r.cross_difference)},
          {"n_rows", r.n_rows},
          {"fixed_effects", r.options.fixed_effects},
          {"topic_rank", r.options.topic_rank}};
}

json to_json(const dynamics::ImportanceReport& r) {
  json topics = json::array();
  for (const auto& t : r.topics)
    topics.push_back({{"topic_id", t.topic_id},
                      {"n_rows", t.n_rows},
                      {"user_model", to_json(t.user_model)},
                      {"chatbot_model", to_json(t.chatbot_model)}});
  return {{"topics", std::move(topics)},
          {"chatbot_share_positive", opt(r.chatbot_share_positive)},
          {"chatbot_share_negative", opt(r.chatbot_share_negative)},
          {"notices", r.notices}};
}

json to_json(const spe::HappinessModel& m) {
  return {{"variant", to_string(m.variant)},
          {"intercept", m.intercept},
          {"beta_first", m.beta_first},
          {"beta_middle", m.beta_middle},
          {"beta_last", m.beta_last},
          {"se_first", m.se_first},
          {"se_middle", m.se_middle},
          {"se_last", m.se_last},
          {"n", m.n},
          {"rmse_train", m.rmse_train},
          {"fit", to_json(m.fit)}};
}

json to_json(const spe::CvReport& r) {
  return {{"k", r.k},
          {"seed", r.seed},
          {"n_conversations", r.n_conversations},
          {"fold_rmse_three", r.fold_rmse_three},
          {"fold_rmse_uniform", r.fold_rmse_uniform},
          {"rmse_three", r.rmse_three},
          {"rmse_uniform", r.rmse_uniform},
          {"full_three", to_json(r.full_three)},
          {"full_uniform", to_json(r.full_uniform)},
          {"metadata", r.metadata}};
}

json to_json(const spe::JournalGeneralization& r) {
  json parts = json::array();
  for (const auto& p : r.participants)
    parts.push_back({{"participant_id", p.participant_id},
                     {"predicted_mean", p.predicted_mean},
                     {"actual_mean", p.actual_mean},
                     {"n", p.n}});
  return {{"entries", r.entries.size()}, {"participants", std::move(parts)}, {"correlation", to_json(r.correlation)}};
}

// --- records ---

json ResultRecord::error_json(const Error& e) {
  return {{"code", e.name()}, {"message", e.what()}, {"detail", e.detail()}};
}

json ArtifactHeader::to_json() const {
  return {{"record", "header"},
          {"tool", "wbl"},
          {"command", command},
          {"version", version},
          {"corpus_fingerprint", corpus_fingerprint},
          {"config_hash", config_hash},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"config", config}};
}

ArtifactHeader ArtifactHeader::from_json(const json& j) {
  ArtifactHeader h;
  h.command = j.value("command", "");
  h.version = j.value("version", "");
  h.corpus_fingerprint = j.value("corpus_fingerprint", "");
  h.config_hash = j.value("config_hash", "");
  if (j.contains("seed") && !j["seed"].is_null()) h.seed = j["seed"].get<std::uint64_t>();
  h.config = j.value("config", json::object());
  return h;
}

const ResultRecord* AnalysisReport::find(std::string_view analysis) const noexcept {
  for (const auto& r : results)
    if (r.analysis == analysis) return &r;
  return nullptr;
}

std::string to_jsonl(const AnalysisReport& report) {
  std::string out = report.header.to_json().dump() + "\n";
  for (const auto& r : report.results) {
    json j{{"record", "result"}, {"analysis", r.analysis}, {"filter", r.filter}};
    if (r.ok()) {
      j["status"] = "ok";
      j["data"] = r.data;
    } else {
      j["status"] = "error";
      j["error"] = *r.error;
    }
    out += j.dump() + "\n";
  }
  return out;
}

AnalysisReport parse_jsonl(std::string_view text) {
  AnalysisReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Errc::MalformedRecord, "report line is not a JSON object", std::to_string(lineno));
    const std::string kind = j.value("record", "");
    if (kind == "header") {
      report.header = ArtifactHeader::from_json(j);
      header = true;
    } else if (kind == "result") {
      ResultRecord r;
      r.analysis = j.value("analysis", "");
      r.filter = j.value("filter", "");
      if (j.value("status", "") == "ok") r.data = j.value("data", json(nullptr));
      else r.error = j.value("error", json::object());
      report.results.push_back(std::move(r));
    } else {
      fail(Errc::MalformedRecord, "unknown report record '" + kind + "'", std::to_string(lineno));
    }
  }
  if (!header) fail(Errc::MalformedRecord, "report has no header line");
  return report;
}

// --- formatting ---

std::string fmt(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string fmt(const json& v, int decimals) {
  if (!v.is_number()) return "NA";
  return fmt(v.get<double>(), decimals);
}

std::string fmt_p(const json& v) {
  if (!v.is_number()) return "NA";
  const double p = v.get<double>();
  if (std::isfinite(p) && p < 0.0001) return "<.0001";
  return fmt(p, 4);
}

Table& Table::row(std::vector<std::string> cells) {
  cells.resize(headers_.size());
  rows_.push_back(std::move(cells));
  return *this;
}

std::string Table::render() const {
  std::vector<std::size_t> width(headers_.size());
  for (std::size_t c = 0; c < headers_.size(); ++c) {
    width[c] = headers_[c].size();
    for (const auto& r : rows_) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (c) s += "  ";
      s += c == 0 ? cells[c] + pad : pad + cells[c];
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(headers_);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows_) out += line(r);
  return out;
}

namespace {

std::string str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "NA";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  return fmt(v);
}

// "p = 0.0123" or "p < .0001"
std::string p_clause(const json& p) {
  const std::string v = fmt_p(p);
  return v.front() == '<' ? "p " + v.substr(0, 1) + " " + v.substr(1) : "p = " + v;
}

std::string test_line(const json& t) {
  if (t.is_null()) return "no test";
  const std::string kind = t.value("kind", "");
  std::string s;
  if (kind == "anova_F") s = "F(" + fmt(t["df"], 0) + ", " + fmt(t["df2"], 0) + ") = " + fmt(t["statistic"]);
  else if (kind == "z") s = "z = " + fmt(t["statistic"]);
  else if (kind == "pearson_r") s = "r(" + fmt(t["df"], 0) + ") = " + fmt(t["estimate"]);
  else s = "t(" + fmt(t["df"], 1) + ") = " + fmt(t["statistic"]);
  s += ", " + p_clause(t["p"]);
  if (t.contains("effect_size")) s += ", d = " + fmt(t["effect_size"]);
  return s;
}

std::string coef_table(const json& fit) {
  Table t({"term", "estimate", "se", "t", "p"});
  for (const auto& term : fit["terms"])
    t.row({term["name"].get<std::string>(), fmt(term["estimate"]), fmt(term["se"]), fmt(term["t"]), fmt_p(term["p"])});
  std::string s = t.render();
  s += "n = " + str(fit["n"]) + ", R^2 = " + fmt(fit["r_squared"]) + ", SE " + str(fit["se_kind"]);
  if (fit.value("n_clusters", 0) > 0) s += " (" + str(fit["n_clusters"]) + " clusters)";
  if (fit.contains("absorbed_groups")) s += ", " + str(fit["absorbed_groups"]) + " absorbed intercepts";
  return s + "\n";
}

std::string notices(const json& d) {
  std::string s;
  if (d.contains("notices"))
    for (const auto& n : d["notices"]) s += "note: " + n.get<std::string>() + "\n";
  return s;
}

std::string rank_cell(const json& v) { return v.is_null() ? "-" : v.dump(); }

std::string anova(const json& d) {
  Table t({"topic", "rank", "n", "mean", "sd", "sem"});
  for (const auto& s : d["topics"])
    t.row({str(s["topic_id"]), rank_cell(s["rank"]), str(s["n"]), fmt(s["mean"], 2), fmt(s["sd"], 2), fmt(s["sem"], 2)});
  return t.render() + test_line(d["test"]) + "\n";
}

std::string condition(const json& d) {
  Table t({"topic", "rank", "journal", "chatbot", "difference", "t", "df", "p", "p_adj"});
  for (const auto& c : d["topics"]) {
    const json& test = c["test"];
    t.row({str(c["topic_id"]), rank_cell(c["rank"]), fmt(c["journal"]["mean"], 2), fmt(c["chatbot"]["mean"], 2),
           fmt(c["difference"], 2), test.is_null() ? "NA" : fmt(test["statistic"]),
           test.is_null() ? "NA" : fmt(test["df"], 1), test.is_null() ? "NA" : fmt_p(test["p"]),
           fmt_p(c["p_adjusted"])});
  }
  std::string s = t.render();
  s += "overall: journal " + fmt(d["journal_mean"], 2) + " (" + str(d["journal_participants"]) + " participants), chatbot " +
       fmt(d["chatbot_mean"], 2) + " (" + str(d["chatbot_participants"]) + " participants); " + test_line(d["overall"]) +
       "\n";
  s += "topics with a significant chatbot advantage: " + str(d["significant_positive"]) + "\n";
  return s + notices(d);
}

std::string interaction(const json& d) {
  std::string s = "headline " + str(d["term"]) + " = " + fmt(d["estimate"]) + " (SE " + fmt(d["se"]) +
                  ", " + p_clause(d["p"]) + "); " + str(d["n_rows"]) + " rows, " + str(d["n_participants"]) +
                  " participants\n";
  s += "participant fixed effects:\n" + coef_table(d["fixed_effects"]);
  s += "pooled:\n" + coef_table(d["pooled"]);
  return s;
}

std::string valence(const json& d) {
  std::string s = interaction(d["fit"]);
  s += "positive topics, chatbot vs journal: " + test_line(d["positive"]) + "\n";
  s += "negative topics, chatbot vs journal: " + test_line(d["negative"]) + "\n";
  return s + notices(d);
}

std::string bmw(const json& d) {
  Table t({"topic", "n", "mean boost", "sem", "t", "p"});
  for (const auto& l : d["labels"])
    t.row({str(l["label"]), str(l["n"]), fmt(l["mean_boost"], 2), fmt(l["sem"], 2), fmt(l["test"]["statistic"]),
           fmt_p(l["test"]["p"])});
  Table c({"comparison", "difference", "t", "df", "p"});
  for (const auto& x : d["comparisons"])
    c.row({str(x["higher"]) + " - " + str(x["lower"]), fmt(x["test"]["estimate"], 2), fmt(x["test"]["statistic"]),
           fmt(x["test"]["df"], 0), fmt_p(x["test"]["p"])});
  return t.render() + c.render() + str(d["participants"]) + " participants, " + str(d["skipped"]) + " skipped\n";
}

std::string first_message(const json& d) {
  Table t({"topic", "n_j", "n_c", "words_j", "words_c", "p_adj", "sent_j", "sent_c", "p_adj", "cosine"});
  for (const auto& x : d["topics"])
    t.row({str(x["topic_id"]), str(x["n_journal"]), str(x["n_chatbot"]), fmt(x["words_journal"], 1),
           fmt(x["words_chatbot"], 1), fmt_p(x["word_p_adjusted"]), fmt(x["sentiment_journal"], 2),
           fmt(x["sentiment_chatbot"], 2), fmt_p(x["sentiment_p_adjusted"]), fmt(x["centroid_cosine"])});
  return t.render() + "mean centroid cosine " + fmt(d["statistic"]) + " (sd " + fmt(d["statistic_sd"]) +
         "), permutation " + p_clause(d["permutation_p"]) + " over " + str(d["n_perms"]) + " permutations\n" +
         notices(d);
}

std::string mirroring(const json& d) {
  std::string s = coef_table(d["fit"]);
  s += "chatbot above user for " + fmt(d["percent_chatbot_above_user"], 1) + "% of " + str(d["n_participants"]) +
       " participants\n";
  Table t({"topic", "n", "intercept", "slope", "se", "p"});
  for (const auto& x : d["per_topic"]) {
    const json& terms = x["fit"]["terms"];
    t.row({str(x["topic_id"]), str(x["n"]), fmt(terms[0]["estimate"]), fmt(terms[1]["estimate"]), fmt(terms[1]["se"]),
           fmt_p(terms[1]["p"])});
  }
  if (!t.empty()) s += "by topic:\n" + t.render();
  return s + notices(d);
}

std::string first_last(const json& d) {
  Table t({"topic", "n", "first", "last", "status", "t", "d", "p", "p_adj"});
  for (const auto& x : d["topics"]) {
    const json& test = x["test"];
    t.row({str(x["topic_id"]), str(x["n"]), fmt(x["mean_first"], 2), fmt(x["mean_last"], 2), str(x["status"]),
           test.is_null() ? "NA" : fmt(test["statistic"]),
           test.is_null() || !test.contains("effect_size") ? "NA" : fmt(test["effect_size"]),
           test.is_null() ? "NA" : fmt_p(test["p"]), fmt_p(x["p_adjusted"])});
  }
  return t.render() + notices(d);
}

std::string pairing(const json& d) {
  Table t({"complete pairs", "conversations"});
  for (const auto& h : d["histogram"]) t.row({str(h["pairs"]), str(h["conversations"])});
  return t.render() + str(d["conversations"]) + " conversations, mean " + fmt(d["mean_pairs"], 2) + " pairs (sd " +
         fmt(d["sd_pairs"], 2) + "), " + fmt(d["excluded_fraction"].get<double>() * 100.0, 1) +
         "% of utterances beyond the pair limit\n";
}

std::string trajectory(const json& d) {
  Table t({"position", "n", "user", "sem", "chatbot", "sem"});
  const bool pct = d["normalization"] == "percent_position";
  for (const auto& b : d["bins"])
    t.row({fmt(b["position"], pct ? 2 : 0), str(b["n"]), fmt(b["mean_user"], 2), fmt(b["sem_user"], 2),
           fmt(b["mean_chatbot"], 2), fmt(b["sem_chatbot"], 2)});
  return t.render() + "slope user " + fmt(d["slope_user"]) + " (SE " + fmt(d["se_user"]) + "), chatbot " +
         fmt(d["slope_chatbot"]) + " (SE " + fmt(d["se_chatbot"]) + "), role x position " + fmt(d["interaction"]) +
         " (SE " + fmt(d["se_interaction"]) + ", " + p_clause(d["p_interaction"]) + "), " +
         str(d["n_conversations"]) + " conversations\n";
}

std::string cross_lagged(const json& d) {
  return "user sentiment model:\n" + coef_table(d["user_model"]) + "chatbot sentiment model:\n" +
         coef_table(d["chatbot_model"]) + "chatbot->user minus user->chatbot: " + fmt(d["cross_difference"]["estimate"]) +
         ", " + test_line(d["cross_difference"]) + "; " + str(d["n_rows"]) + " lagged rows\n";
}

std::string importance(const json& d) {
  Table t({"topic", "rows", "user<-user %", "user<-chatbot %", "chatbot<-chatbot %", "chatbot<-user %"});
  for (const auto& x : d["topics"]) {
    const json& u = x["user_model"]["percentages"];
    const json& c = x["chatbot_model"]["percentages"];
    t.row({str(x["topic_id"]), str(x["n_rows"]), fmt(u[0], 1), fmt(u[1], 1), fmt(c[0], 1), fmt(c[1], 1)});
  }
  return t.render() + "mean chatbot share in the user model: positive topics " + fmt(d["chatbot_share_positive"], 1) +
         "%, negative topics " + fmt(d["chatbot_share_negative"], 1) + "%\n" + notices(d);
}

std::string spe_models(const json& d) {
  Table t({"model", "intercept", "first", "se", "middle", "se", "last", "se", "n", "rmse"});
  for (const char* k : {"three_weight", "uniform_weight"}) {
    const json& m = d[k];
    t.row({k, fmt(m["intercept"], 2), fmt(m["beta_first"]), fmt(m["se_first"]), fmt(m["beta_middle"]),
           fmt(m["se_middle"]), fmt(m["beta_last"]), fmt(m["se_last"]), str(m["n"]), fmt(m["rmse_train"])});
  }
  return t.render();
}

std::string spe_cv(const json& d) {
  Table t({"fold", "three_weight", "uniform_weight"});
  for (std::size_t i = 0; i < d["fold_rmse_three"].size(); ++i)
    t.row({std::to_string(i + 1), fmt(d["fold_rmse_three"][i]), fmt(d["fold_rmse_uniform"][i])});
  t.row({"pooled", fmt(d["rmse_three"]), fmt(d["rmse_uniform"])});
  return t.render() + str(d["k"]) + "-fold, seed " + str(d["seed"]) + ", " + str(d["n_conversations"]) +
         " conversations\n";
}

std::string journal_generalization(const json& d) {
  return "predicted vs rated journal happiness, per participant: " + test_line(d["correlation"]) + "; " +
         str(d["entries"]) + " entries\n";
}

std::string reproduction(const json& d) {
  Table t({"analysis", "observed", "se", "simulated", "se", "same sign"});
  t.row({str(d["observed_rank"]["term"]), fmt(d["observed_rank"]["estimate"]), fmt(d["observed_rank"]["se"]),
         fmt(d["simulated_rank"]["estimate"]), fmt(d["simulated_rank"]["se"]), str(d["rank_sign_matches"])});
  t.row({str(d["observed_valence"]["fit"]["term"]), fmt(d["observed_valence"]["fit"]["estimate"]),
         fmt(d["observed_valence"]["fit"]["se"]), fmt(d["simulated_valence"]["fit"]["estimate"]),
         fmt(d["simulated_valence"]["fit"]["se"]), str(d["valence_sign_matches"])});
  return t.render() + str(d["chatbot_rows"]) + " chatbot rows, " + str(d["journal_rows"]) + " journal rows, " +
         str(d["chatbot_rows_without_simulation"]) + " chatbot rows without a simulated value\n";
}

struct Section {
  const char* title;
  std::function<std::string(const json&)> render;
};

const std::map<std::string, Section, std::less<>>& sections() {
  static const std::map<std::string, Section, std::less<>> s = {
      {"journal_topic_anova", {"Journal happiness by topic", anova}},
      {"condition_comparison", {"Chatbot minus journal happiness by topic", condition}},
      {"topic_rank_interaction", {"Condition x topic rank", interaction}},
      {"topic_rank_covariates", {"Condition x topic rank with covariates", interaction}},
      {"valence_interaction", {"Condition x topic valence", valence}},
      {"best_middle_worst", {"Chatbot boost over journal mean by participant topic", bmw}},
      {"first_message_equivalence", {"First messages by condition", first_message}},
      {"mirroring", {"Chatbot vs user role sentiment", mirroring}},
      {"first_last_topics", {"First vs last user sentiment by topic", first_last}},
      {"pairing", {"Utterance pairs per conversation", pairing}},
      {"trajectory_pairs", {"Sentiment by utterance pair", trajectory}},
      {"trajectory_normalized", {"Sentiment by normalized position", trajectory}},
      {"cross_lagged", {"Cross-lagged sentiment models", cross_lagged}},
      {"cross_lagged_rank", {"Cross-lagged sentiment models with topic rank", cross_lagged}},
      {"relative_importance", {"Relative importance of lagged sentiment by topic", importance}},
      {"happiness_role_sentiment",
       {"Happiness on role sentiment", [](const json& d) { return coef_table(d); }}},
      {"spe_model", {"Happiness from sentiment prediction errors", spe_models}},
      {"spe_cv", {"Out-of-fold RMSE", spe_cv}},
      {"journal_generalization", {"Chatbot-fit model on journal entries", journal_generalization}},
      {"simulated_reproduction", {"Observed vs simulated happiness", reproduction}},
  };
  return s;
}

}  // namespace

std::string render_tables(const AnalysisReport& report) {
  const auto& h = report.header;
  std::string out = "wbl " + h.version + " " + h.command + "\n";
  out += "corpus " + h.corpus_fingerprint + "\n";
  out += "config " + h.config_hash + "\n";
  out += "seed " + (h.seed ? std::to_string(*h.seed) : std::string("none")) + "\n";
  for (const auto& r : report.results) {
    auto it = sections().find(r.analysis);
    const std::string title = it == sections().end() ? r.analysis : it->second.title;
    out += "\n== " + title + " [" + r.analysis + "]\n";
    if (!r.filter.empty()) out += "rows: " + r.filter + "\n";
    if (!r.ok()) {
      out += "not computed: " + r.error->value("code", "") + ": " + r.error->value("message", "") + "\n";
      continue;
    }
    if (it != sections().end()) out += it->second.render(r.data);
  }
  return out;
}

}  // namespace wbl::report
