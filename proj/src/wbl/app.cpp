#include "wbl/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "wbl/hash.hpp"
#include "wbl/parallel.hpp"
#include "wbl/service/http.hpp"
#include "wbl/service/service.hpp"

namespace wbl::app {

using nlohmann::json;

std::string_view version() noexcept { return WBL_VERSION; }

// --- config ---

namespace {

[[noreturn]] void bad_config(const std::string& key, const std::string& why) {
  fail(Errc::ConfigError, "config '" + key + "': " + why, key);
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad_config(key, "wrong type");
  }
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad_config(where, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) bad_config(where.empty() ? k : where + "." + k, "unknown key");
}

std::vector<std::string> parse_list(const json& v, const std::string& key) {
  std::vector<std::string> out;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  } else {
    out = get_as<std::vector<std::string>>(v, key);
  }
  return out;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  check_keys(j, "", {"corpus", "provider", "seed", "analyses", "out", "jobs", "include_partial", "cache", "n_perms",
                     "cv_folds", "embedding_dim", "llm", "serve"});
  for (const auto& [k, v] : j.items()) {
    if (v.is_null()) continue;
    if (k == "corpus") c.corpus = get_as<std::string>(v, k);
    else if (k == "provider") c.provider = get_as<std::string>(v, k);
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
    else if (k == "analyses") c.analyses = parse_list(v, k);
    else if (k == "out") c.out = get_as<std::string>(v, k);
    else if (k == "jobs") c.jobs = get_as<unsigned>(v, k);
    else if (k == "include_partial") c.include_partial = get_as<bool>(v, k);
    else if (k == "cache") c.cache = get_as<std::string>(v, k);
    else if (k == "n_perms") c.n_perms = get_as<int>(v, k);
    else if (k == "cv_folds") c.cv_folds = get_as<std::size_t>(v, k);
    else if (k == "embedding_dim") c.embedding_dim = get_as<std::size_t>(v, k);
  }
  if (j.contains("llm")) {
    const json& l = j["llm"];
    check_keys(l, "llm", {"base_url", "model", "embedding_model", "temperature", "prompt_template", "chat_model",
                          "chat_temperature", "timeout_ms", "max_in_flight", "requests_per_second", "burst"});
    auto& ep = c.remote.endpoint;
    for (const auto& [k, v] : l.items()) {
      const std::string key = "llm." + k;
      if (k == "base_url") ep.base_url = get_as<std::string>(v, key);
      else if (k == "model") c.remote.model = get_as<std::string>(v, key);
      else if (k == "embedding_model") c.remote.embedding_model = get_as<std::string>(v, key);
      else if (k == "temperature") c.remote.temperature = get_as<double>(v, key);
      else if (k == "prompt_template") c.remote.prompt_template = get_as<std::string>(v, key);
      else if (k == "chat_model") c.chat.model = get_as<std::string>(v, key);
      else if (k == "chat_temperature") c.chat.temperature = get_as<double>(v, key);
      else if (k == "timeout_ms") ep.timeout_ms = get_as<int>(v, key);
      else if (k == "max_in_flight") ep.max_in_flight = get_as<unsigned>(v, key);
      else if (k == "requests_per_second") ep.requests_per_second = get_as<double>(v, key);
      else if (k == "burst") ep.burst = get_as<double>(v, key);
    }
  }
  if (j.contains("serve")) {
    const json& s = j["serve"];
    check_keys(s, "serve", {"host", "port", "log", "tick_ms", "seed", "timers"});
    for (const auto& [k, v] : s.items()) {
      const std::string key = "serve." + k;
      if (k == "host") c.serve.host = get_as<std::string>(v, key);
      else if (k == "port") c.serve.port = get_as<int>(v, key);
      else if (k == "log") c.serve.log = get_as<std::string>(v, key);
      else if (k == "tick_ms") c.serve.tick_ms = get_as<int>(v, key);
      else if (k == "seed") c.serve.seed = get_as<std::uint64_t>(v, key);
      else if (k == "timers") {
        check_keys(v, key, {"journal_min_ms", "chat_end_allowed_ms", "chat_hard_stop_ms", "warning_marks_ms"});
        auto& t = c.serve.timers;
        for (const auto& [tk, tv] : v.items()) {
          const std::string tkey = key + "." + tk;
          if (tk == "journal_min_ms") t.journal_min_ms = get_as<std::int64_t>(tv, tkey);
          else if (tk == "chat_end_allowed_ms") t.chat_end_allowed_ms = get_as<std::int64_t>(tv, tkey);
          else if (tk == "chat_hard_stop_ms") t.chat_hard_stop_ms = get_as<std::int64_t>(tv, tkey);
          else t.warning_marks_ms = get_as<std::vector<std::int64_t>>(tv, tkey);
        }
      }
    }
  }

  if (c.provider != "fallback" && c.provider != "remote") bad_config("provider", "expected fallback or remote");
  if (c.jobs == 0) bad_config("jobs", "must be at least 1");
  if (c.cv_folds < 2) bad_config("cv_folds", "must be at least 2");
  if (c.embedding_dim == 0) bad_config("embedding_dim", "must be positive");
  if (c.serve.tick_ms <= 0) bad_config("serve.tick_ms", "must be positive");
  const auto& ids = analysis_ids();
  for (const auto& a : c.analyses)
    if (std::find(ids.begin(), ids.end(), a) == ids.end()) bad_config("analyses", "unknown analysis '" + a + "'");

  c.remote.endpoint.api_key = env_or_empty("WBL_LLM_API_KEY");
  c.chat.endpoint = c.remote.endpoint;
  c.serve.admin_token = env_or_empty("WBL_ADMIN_TOKEN");
  return c;
}

namespace {

std::vector<std::string> selected(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& id : analysis_ids())
    if (cfg.analyses.empty() || std::find(cfg.analyses.begin(), cfg.analyses.end(), id) != cfg.analyses.end())
      out.push_back(id);
  return out;
}

}  // namespace

json RunConfig::snapshot() const {
  json j{{"provider", provider},
         {"seed", seed ? json(*seed) : json(nullptr)},
         {"analyses", selected(*this)},
         {"include_partial", include_partial},
         {"n_perms", n_perms},
         {"cv_folds", cv_folds}};
  if (provider == "fallback") {
    j["embedding_dim"] = embedding_dim;
  } else {
    j["llm"] = {{"base_url", remote.endpoint.base_url},
                {"model", remote.model},
                {"embedding_model", remote.embedding_model},
                {"temperature", remote.temperature},
                {"prompt_template", remote.prompt_template}};
  }
  return j;
}

std::string RunConfig::hash() const { return sha256_hex(snapshot().dump()); }

std::filesystem::path RunConfig::cache_path() const {
  return cache.empty() ? std::filesystem::path(out) / "score_cache.jsonl" : std::filesystem::path(cache);
}

// --- io ---

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::IoError, "cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) fail(Errc::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

namespace {

std::string read_file(const std::string& path) {
  if (path.empty()) fail(Errc::ConfigError, "no corpus given", "corpus");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) {
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!line.empty()) return line;
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return "";
}

bool is_report(const std::string& text) {
  json j = json::parse(first_line(text), nullptr, false);
  return j.is_object() && j.value("record", "") == "header";
}

Corpus from_event_log(const std::string& path, bool include_partial) {
  service::OfflineChatProvider chat;
  service::ManualClock clock;
  service::ServiceConfig sc;
  sc.log_path = path;
  service::StudyService svc(sc, chat, clock);
  return svc.export_corpus(include_partial);
}

}  // namespace

Corpus load_input(const RunConfig& cfg) {
  const std::string text = read_file(cfg.corpus);
  const std::string head = first_line(text);
  if (head.rfind(kCorpusHeader, 0) == 0) return parse_corpus(text);
  json j = json::parse(head, nullptr, false);
  if (j.is_object() && j.contains("seq") && j.contains("kind")) return from_event_log(cfg.corpus, cfg.include_partial);
  return parse_corpus(text);  // raises the format error
}

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::data:
    case ErrorCategory::state:
      return 2;
    case ErrorCategory::upstream:
      return 3;
    default:
      return 1;
  }
}

// --- analyses ---

namespace {

struct Context {
  const Corpus& corpus;
  const Corpus& ranked;  // ranks and valence present when the journal data allow
  const RunConfig& cfg;
  Scorer* scorer;
};

struct Output {
  std::string filter;
  json data;
};

struct AnalysisDef {
  std::string id;
  bool seed = false;
  bool provider = false;
  std::function<Output(const Context&)> run;
};

const char* kPairs = "chatbot conversations; complete user/chatbot pairs, first 6";

std::vector<spe::SpeObservation> spe_rows(const Corpus& corpus) {
  return spe::complete_participants(spe::spe_dataset(corpus, Condition::chatbot));
}
const char* kSpeRows = "rated chatbot conversations of participants with exactly three";

const std::vector<AnalysisDef>& registry() {
  using namespace analyses;
  static const std::vector<AnalysisDef> defs = {
      {"journal_topic_anova", false, false,
       [](const Context& c) {
         auto r = journal_topic_anova(c.corpus);
         return Output{r.filter, report::to_json(r)};
       }},
      {"condition_comparison", false, false,
       [](const Context& c) {
         auto r = condition_comparison(c.corpus);
         return Output{r.filter, report::to_json(r)};
       }},
      {"topic_rank_interaction", false, false,
       [](const Context& c) {
         auto r = topic_rank_interaction(c.corpus);
         return Output{r.filter, report::to_json(r)};
       }},
      {"topic_rank_covariates", false, false,
       [](const Context& c) {
         auto r = topic_rank_interaction(c.corpus, {.covariates = true});
         return Output{r.filter, report::to_json(r)};
       }},
      {"valence_interaction", false, false,
       [](const Context& c) {
         auto r = valence_group_interaction(c.corpus);
         return Output{r.fit.filter, report::to_json(r)};
       }},
      {"best_middle_worst", false, false,
       [](const Context& c) {
         auto r = best_middle_worst_boost(c.corpus);
         return Output{r.filter, report::to_json(r)};
       }},
      {"first_message_equivalence", true, true,
       [](const Context& c) {
         auto r = first_message_equivalence(c.corpus, *c.scorer, c.cfg.n_perms, *c.cfg.seed);
         return Output{r.filter, report::to_json(r)};
       }},
      {"mirroring", false, false,
       [](const Context& c) {
         return Output{"chatbot conversations with both role sentiments; averaged per participant, and per participant "
                       "and topic for the topic rows",
                       report::to_json(dynamics::mirroring_analysis(c.ranked))};
       }},
      {"happiness_role_sentiment", false, false,
       [](const Context& c) {
         return Output{"rated chatbot conversations with both role sentiments",
                       report::to_json(dynamics::happiness_on_role_sentiment(c.ranked))};
       }},
      {"first_last_topics", false, false,
       [](const Context& c) {
         return Output{"chatbot conversations with at least two scored user utterances; by topic",
                       report::to_json(dynamics::first_last_topic_tests(c.ranked))};
       }},
      {"pairing", false, false,
       [](const Context& c) {
         return Output{"chatbot conversations", report::to_json(dynamics::pairing_summary(c.ranked))};
       }},
      {"trajectory_pairs", false, false,
       [](const Context& c) {
         return Output{kPairs, report::to_json(dynamics::trajectory_regression(dynamics::corpus_pairs(c.ranked),
                                                                               dynamics::Normalization::raw_pair_index))};
       }},
      {"trajectory_normalized", false, false,
       [](const Context& c) {
         return Output{kPairs,
                       report::to_json(dynamics::trajectory_regression(dynamics::corpus_pairs(c.ranked),
                                                                       dynamics::Normalization::percent_position))};
       }},
      {"cross_lagged", false, false,
       [](const Context& c) {
         return Output{std::string(kPairs) + "; pairs with a preceding pair",
                       report::to_json(dynamics::cross_lagged_fit(dynamics::corpus_pairs(c.ranked), c.ranked))};
       }},
      {"cross_lagged_rank", false, false,
       [](const Context& c) {
         dynamics::CrossLaggedOptions o;
         o.topic_rank = true;
         return Output{std::string(kPairs) + "; pairs with a preceding pair; ranked topics",
                       report::to_json(dynamics::cross_lagged_fit(dynamics::corpus_pairs(c.ranked), c.ranked, o))};
       }},
      {"relative_importance", false, false,
       [](const Context& c) {
         return Output{std::string(kPairs) + "; pairs with a preceding pair; topics with at least 10 lagged rows",
                       report::to_json(dynamics::relative_importance_by_topic(dynamics::corpus_pairs(c.ranked),
                                                                              c.ranked))};
       }},
      {"spe_model", false, false,
       [](const Context& c) {
         const auto rows = spe_rows(c.corpus);
         return Output{kSpeRows,
                       {{"three_weight", report::to_json(spe::fit_spe_model(rows, spe::Variant::three_weight))},
                        {"uniform_weight", report::to_json(spe::fit_spe_model(rows, spe::Variant::uniform_weight))}}};
       }},
      {"spe_cv", true, false,
       [](const Context& c) {
         return Output{kSpeRows, report::to_json(spe::cross_validate(spe_rows(c.corpus), c.cfg.cv_folds, *c.cfg.seed))};
       }},
      {"journal_generalization", false, false,
       [](const Context& c) {
         const auto model = spe::fit_spe_model(spe_rows(c.corpus), spe::Variant::three_weight);
         return Output{"model fitted on " + std::string(kSpeRows) + "; applied to scored journal entries",
                       report::to_json(spe::predict_journal_happiness(model, c.corpus))};
       }},
      {"simulated_reproduction", true, false,
       [](const Context& c) {
         const auto cv = spe::cross_validate(spe_rows(c.corpus), c.cfg.cv_folds, *c.cfg.seed);
         auto r = simulated_data_reproduction(c.corpus, cv);
         return Output{r.observed_rank.filter, report::to_json(r)};
       }},
  };
  return defs;
}

const AnalysisDef& def_of(std::string_view id) {
  for (const auto& d : registry())
    if (d.id == id) return d;
  fail(Errc::ConfigError, "unknown analysis '" + std::string(id) + "'");
}

Corpus ranked_view(const Corpus& corpus) {
  for (const auto& t : corpus.topics)
    if (t.rank) return corpus;
  try {
    return with_topic_stats(corpus);
  } catch (const Error&) {
    return corpus;
  }
}

std::unique_ptr<SentimentProvider> make_provider(const RunConfig& cfg) {
  if (cfg.provider == "fallback") return std::make_unique<FallbackProvider>(cfg.embedding_dim);
  if (cfg.remote.endpoint.api_key.empty())
    fail(Errc::ConfigError, "the remote provider needs WBL_LLM_API_KEY", "WBL_LLM_API_KEY");
  return std::make_unique<RemoteSentimentProvider>(cfg.remote);
}

report::ArtifactHeader header_for(std::string_view command, const Corpus& corpus, const RunConfig& cfg) {
  return {std::string(command), std::string(version()), corpus_fingerprint(corpus), cfg.hash(), cfg.seed,
          cfg.snapshot()};
}

void require_seed(const RunConfig& cfg, const std::vector<std::string>& ids) {
  if (cfg.seed) return;
  std::string need;
  for (const auto& id : ids)
    if (needs_seed(id)) need += (need.empty() ? "" : ", ") + id;
  if (!need.empty()) fail(Errc::ConfigError, "a seed is required for " + need, "seed");
}

}  // namespace

const std::vector<std::string>& analysis_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& d : registry()) v.push_back(d.id);
    return v;
  }();
  return ids;
}

bool needs_seed(std::string_view analysis) { return def_of(analysis).seed; }
bool needs_provider(std::string_view analysis) { return def_of(analysis).provider; }

report::AnalysisReport analyze(const Corpus& corpus, const RunConfig& cfg, std::string_view command) {
  const auto ids = selected(cfg);
  require_seed(cfg, ids);

  std::unique_ptr<SentimentProvider> provider;
  std::unique_ptr<ScoreCache> cache;
  std::unique_ptr<Scorer> scorer;
  if (std::any_of(ids.begin(), ids.end(), [](const std::string& id) { return needs_provider(id); })) {
    provider = make_provider(cfg);
    if (!provider->deterministic()) cache = std::make_unique<ScoreCache>(cfg.cache_path());
    scorer = std::make_unique<Scorer>(*provider, cache.get());
  }

  const Corpus ranked = ranked_view(corpus);
  const Context ctx{corpus, ranked, cfg, scorer.get()};
  report::AnalysisReport rep;
  rep.header = header_for(command, corpus, cfg);
  rep.results.resize(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    auto& r = rep.results[i];
    r.analysis = ids[i];
    try {
      Output o = def_of(ids[i]).run(ctx);
      r.filter = std::move(o.filter);
      r.data = std::move(o.data);
    } catch (const Error& e) {
      // upstream failures abort the run; anything else is this analysis's result
      if (errc_category(e.code()) == ErrorCategory::upstream) throw;
      r.error = report::ResultRecord::error_json(e);
    }
  });
  return rep;
}

report::AnalysisReport simulate(const Corpus& corpus, const RunConfig& cfg) {
  if (!cfg.seed) fail(Errc::ConfigError, "a seed is required for simulate", "seed");
  const auto rows = spe_rows(corpus);
  const auto cv = spe::cross_validate(rows, cfg.cv_folds, *cfg.seed, cfg.jobs);
  const auto sims = spe::simulate_happiness(cv);

  report::AnalysisReport rep;
  rep.header = header_for("simulate", corpus, cfg);
  rep.results.push_back({"spe_cv", kSpeRows, report::to_json(cv), std::nullopt});

  report::ResultRecord repro{"simulated_reproduction", "", nullptr, std::nullopt};
  try {
    auto r = analyses::simulated_data_reproduction(corpus, cv);
    repro.filter = r.observed_rank.filter;
    repro.data = report::to_json(r);
  } catch (const Error& e) {
    repro.error = report::ResultRecord::error_json(e);
  }
  rep.results.push_back(std::move(repro));

  json values = json::array();
  for (const auto& s : sims)
    values.push_back({{"conversation_id", s.conversation_id}, {"participant_id", s.participant_id}, {"value", s.value}});
  rep.results.push_back({"simulated_happiness", "out-of-fold three_weight predictions, clamped to [0,100]",
                         {{"conversations", std::move(values)}}, std::nullopt});
  return rep;
}

// --- commands ---

namespace {

std::filesystem::path out_file(const RunConfig& cfg, const char* name) { return std::filesystem::path(cfg.out) / name; }

json failed_ids(const report::AnalysisReport& rep) {
  json f = json::array();
  for (const auto& r : rep.results)
    if (!r.ok()) f.push_back(r.analysis);
  return f;
}

json corpus_counts(const Corpus& c) {
  std::size_t journal = 0, chatbot = 0, rated = 0, utterances = 0, scored = 0;
  for (const auto& conv : c.conversations) {
    (conv.condition == Condition::journal ? journal : chatbot)++;
    if (conv.happiness_post) ++rated;
    for (const auto& u : conv.utterances) {
      if (u.role == Role::topic_prompt) continue;
      ++utterances;
      if (u.sentiment) ++scored;
    }
  }
  return {{"topics", c.topics.size()},
          {"participants", c.participants.size()},
          {"journal_conversations", journal},
          {"chatbot_conversations", chatbot},
          {"rated_conversations", rated},
          {"utterances", utterances},
          {"scored_utterances", scored}};
}

// Provenance for corpus artifacts; a file cannot carry its own fingerprint,
// so it records the fingerprint of the corpus it was made from.
void stamp(Corpus& corpus, const std::string& source_fingerprint, const RunConfig& cfg, const char* command) {
  corpus.provenance["wbl_command"] = command;
  corpus.provenance["wbl_version"] = std::string(version());
  corpus.provenance["source_fingerprint"] = source_fingerprint;
  corpus.provenance["config_hash"] = cfg.hash();
  corpus.provenance["seed"] = cfg.seed ? std::to_string(*cfg.seed) : "none";
}

}  // namespace

json run_ingest(const RunConfig& cfg) {
  Corpus corpus = load_input(cfg);
  const std::string fp = corpus_fingerprint(corpus);
  json summary = header_for("ingest", corpus, cfg).to_json();
  summary.erase("record");
  summary["counts"] = corpus_counts(corpus);
  const std::string text = read_file(cfg.corpus);
  if (text.rfind(kCorpusHeader, 0) != 0) {
    // event log: write the exported corpus
    stamp(corpus, fp, cfg, "ingest");
    const auto path = out_file(cfg, "corpus.jsonl");
    write_atomic(path, export_corpus(corpus));
    summary["corpus_out"] = path.string();
  }
  const auto path = out_file(cfg, "ingest.json");
  write_atomic(path, summary.dump(2) + "\n");
  summary["artifact"] = path.string();
  return summary;
}

json run_score(const RunConfig& cfg) {
  const Corpus corpus = load_input(cfg);
  const std::string fp = corpus_fingerprint(corpus);
  auto provider = make_provider(cfg);
  ScoreCache cache(cfg.cache_path());
  Scorer scorer(*provider, &cache);
  ScoreCorpusOptions opts;
  opts.jobs = cfg.jobs;
  Corpus scored = score_corpus(corpus, scorer, opts);
  stamp(scored, fp, cfg, "score");
  const auto path = out_file(cfg, "scored_corpus.jsonl");
  write_atomic(path, export_corpus(scored));

  json summary = header_for("score", corpus, cfg).to_json();
  summary.erase("record");
  summary["provider"] = provider->provider_id();
  summary["provider_calls"] = scorer.provider_calls();
  summary["cache_hits"] = scorer.cache_hits();
  summary["cache"] = cfg.cache_path().string();
  summary["scored_fingerprint"] = corpus_fingerprint(scored);
  summary["counts"] = corpus_counts(scored);
  write_atomic(out_file(cfg, "score.json"), summary.dump(2) + "\n");
  summary["artifact"] = path.string();
  return summary;
}

json run_analyze(const RunConfig& cfg) {
  const Corpus corpus = load_input(cfg);
  const auto rep = analyze(corpus, cfg);
  const auto path = out_file(cfg, "analysis.jsonl");
  write_atomic(path, report::to_jsonl(rep));
  return {{"command", "analyze"},
          {"artifact", path.string()},
          {"corpus_fingerprint", rep.header.corpus_fingerprint},
          {"config_hash", rep.header.config_hash},
          {"analyses", rep.results.size()},
          {"failed", failed_ids(rep)}};
}

json run_report(const RunConfig& cfg) {
  const std::string text = read_file(cfg.corpus);
  report::AnalysisReport rep;
  if (is_report(text)) rep = report::parse_jsonl(text);
  else rep = analyze(load_input(cfg), cfg, "report");
  const auto jsonl = out_file(cfg, "report.jsonl");
  const auto tables = out_file(cfg, "report.txt");
  write_atomic(jsonl, report::to_jsonl(rep));
  write_atomic(tables, report::render_tables(rep));
  return {{"command", "report"},
          {"artifacts", {jsonl.string(), tables.string()}},
          {"corpus_fingerprint", rep.header.corpus_fingerprint},
          {"config_hash", rep.header.config_hash},
          {"analyses", rep.results.size()},
          {"failed", failed_ids(rep)}};
}

json run_simulate(const RunConfig& cfg) {
  const Corpus corpus = load_input(cfg);
  const auto rep = simulate(corpus, cfg);
  const auto jsonl = out_file(cfg, "simulation.jsonl");
  const auto tables = out_file(cfg, "simulation.txt");
  write_atomic(jsonl, report::to_jsonl(rep));
  write_atomic(tables, report::render_tables(rep));
  return {{"command", "simulate"},
          {"artifacts", {jsonl.string(), tables.string()}},
          {"corpus_fingerprint", rep.header.corpus_fingerprint},
          {"config_hash", rep.header.config_hash},
          {"failed", failed_ids(rep)}};
}

json run(std::string_view command, const RunConfig& cfg) {
  if (command == "ingest") return run_ingest(cfg);
  if (command == "score") return run_score(cfg);
  if (command == "analyze") return run_analyze(cfg);
  if (command == "report") return run_report(cfg);
  if (command == "simulate") return run_simulate(cfg);
  fail(Errc::ConfigError, "unknown command '" + std::string(command) + "'");
}

// --- serve ---

struct Server::Impl {
  std::unique_ptr<service::ChatProvider> chat;
  service::SystemClock clock;
  std::unique_ptr<service::StudyService> svc;
  std::unique_ptr<service::HttpServer> http;
  int port = 0;
};

Server::Server(const RunConfig& cfg) : impl_(std::make_unique<Impl>()) {
  cfg.serve.timers.validate();
  if (cfg.provider == "remote") {
    if (cfg.chat.endpoint.api_key.empty())
      fail(Errc::ConfigError, "the remote chat provider needs WBL_LLM_API_KEY", "WBL_LLM_API_KEY");
    impl_->chat = std::make_unique<service::RemoteChatProvider>(cfg.chat);
  } else {
    impl_->chat = std::make_unique<service::OfflineChatProvider>();
  }
  service::ServiceConfig sc;
  sc.timers = cfg.serve.timers;
  sc.tick_ms = cfg.serve.tick_ms;
  sc.seed = cfg.serve.seed;
  sc.log_path = cfg.serve.log.empty() ? out_file(cfg, "events.jsonl") : std::filesystem::path(cfg.serve.log);
  if (sc.log_path->has_parent_path()) std::filesystem::create_directories(sc.log_path->parent_path());
  impl_->svc = std::make_unique<service::StudyService>(sc, *impl_->chat, impl_->clock);
  impl_->http = std::make_unique<service::HttpServer>(*impl_->svc, cfg.serve.admin_token);
  impl_->port = impl_->http->bind(cfg.serve.host, cfg.serve.port);
}

Server::~Server() { stop(); }

int Server::port() const noexcept { return impl_->port; }

void Server::run() {
  impl_->svc->start_ticker();
  impl_->http->listen();
  impl_->svc->stop_ticker();
}

void Server::stop() { impl_->http->stop(); }

}  // namespace wbl::app
