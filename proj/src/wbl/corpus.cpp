#include "wbl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "wbl/error.hpp"
#include "wbl/hash.hpp"

namespace wbl {

using nlohmann::json;

std::string_view to_string(Condition c) noexcept { return c == Condition::journal ? "journal" : "chatbot"; }

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::topic_prompt: return "topic_prompt";
    case Role::user: return "user";
    case Role::chatbot: return "chatbot";
  }
  return "user";
}

std::string_view to_string(ValenceGroup g) noexcept { return g == ValenceGroup::positive ? "positive" : "negative"; }

std::string_view to_string(Label l) noexcept {
  switch (l) {
    case Label::best: return "best";
    case Label::middle: return "middle";
    case Label::worst: return "worst";
  }
  return "middle";
}

std::optional<Condition> parse_condition(std::string_view s) noexcept {
  if (s == "journal") return Condition::journal;
  if (s == "chatbot") return Condition::chatbot;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) noexcept {
  if (s == "topic_prompt") return Role::topic_prompt;
  if (s == "user") return Role::user;
  if (s == "chatbot") return Role::chatbot;
  return std::nullopt;
}

std::optional<ValenceGroup> parse_valence_group(std::string_view s) noexcept {
  if (s == "positive") return ValenceGroup::positive;
  if (s == "negative") return ValenceGroup::negative;
  return std::nullopt;
}

std::vector<const Utterance*> Conversation::user_utterances() const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances) {
    if (u.role == Role::user) out.push_back(&u);
  }
  return out;
}

const Topic* Corpus::find_topic(std::string_view id) const noexcept {
  auto it = std::find_if(topics.begin(), topics.end(), [&](const Topic& t) { return t.id == id; });
  return it == topics.end() ? nullptr : &*it;
}

const Participant* Corpus::find_participant(std::string_view id) const noexcept {
  auto it = std::find_if(participants.begin(), participants.end(), [&](const Participant& p) { return p.id == id; });
  return it == participants.end() ? nullptr : &*it;
}

std::vector<const Conversation*> Corpus::conversations_of(std::string_view participant_id) const {
  std::vector<const Conversation*> out;
  for (const auto& c : conversations) {
    if (c.participant_id == participant_id) out.push_back(&c);
  }
  return out;
}

const std::set<std::string>& covariate_schema() {
  static const std::set<std::string> keys = {"age", "education", "gender", "phq9_total"};
  return keys;
}

namespace {

// Where a record came from, for error messages.
struct Origin {
  std::size_t line = 0;
  std::string describe() const { return line ? "line " + std::to_string(line) : std::string("in-memory record"); }
};

[[noreturn]] void malformed(const Origin& at, const std::string& reason) {
  fail(Errc::MalformedRecord, at.describe() + ": " + reason, std::to_string(at.line));
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const Origin& at) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) malformed(at, "unknown field '" + key + "'");
  }
}

const json& require(const json& obj, const char* key, const Origin& at) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(at, std::string("missing field '") + key + "'");
  return *it;
}

std::string get_string(const json& obj, const char* key, const Origin& at) {
  const json& v = require(obj, key, at);
  if (!v.is_string()) malformed(at, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& v, const char* key, const Origin& at) {
  if (!v.is_number()) malformed(at, std::string("field '") + key + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) malformed(at, std::string("field '") + key + "' must be finite");
  return d;
}

std::optional<double> get_optional_number(const json& obj, const char* key, const Origin& at) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get_number(*it, key, at);
}

std::int64_t get_integer(const json& obj, const char* key, const Origin& at) {
  const json& v = require(obj, key, at);
  if (!v.is_number_integer()) malformed(at, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

Provenance get_provenance(const json& obj, const Origin& at) {
  Provenance out;
  auto it = obj.find("provenance");
  if (it == obj.end()) return out;
  if (!it->is_object()) malformed(at, "field 'provenance' must be an object");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_string()) malformed(at, "provenance values must be strings");
    out[k] = v.get<std::string>();
  }
  return out;
}

// --- per-record validation (shared by file loading and in-memory checks) ---

void validate_topic(const Topic& t, const Origin& at) {
  if (t.id.empty()) malformed(at, "topic id must be non-empty");
  if (t.prompt_text.empty()) malformed(at, "topic '" + t.id + "' has empty prompt_text");
  if (!t.in_journal && !t.in_chatbot) malformed(at, "topic '" + t.id + "' has empty availability");
  if (t.rank.has_value() != t.journal_mean_happiness.has_value())
    malformed(at, "topic '" + t.id + "': rank is assigned iff journal_mean_happiness is assigned");
  if (t.rank && *t.rank < 1) malformed(at, "topic '" + t.id + "': rank must be >= 1");
  if (t.journal_mean_happiness && (*t.journal_mean_happiness < 0.0 || *t.journal_mean_happiness > 100.0))
    malformed(at, "topic '" + t.id + "': journal_mean_happiness outside [0,100]");
}

void validate_participant(const Participant& p, const Origin& at) {
  if (p.id.empty()) malformed(at, "participant id must be non-empty");
  for (const auto& [key, value] : p.covariates) {
    if (!covariate_schema().contains(key)) malformed(at, "covariate '" + key + "' is not in the declared schema");
    const bool categorical = key == "gender";
    if (categorical != std::holds_alternative<std::string>(value))
      malformed(at, "covariate '" + key + "' has the wrong type");
    if (auto d = std::get_if<double>(&value); d && !std::isfinite(*d))
      malformed(at, "covariate '" + key + "' must be finite");
  }
}

void validate_conversation_shape(const Conversation& c, const Origin& at) {
  if (c.id.empty()) malformed(at, "conversation id must be non-empty");
  if (c.happiness_post && (*c.happiness_post < 0.0 || *c.happiness_post > 100.0))
    malformed(at, "conversation '" + c.id + "': happiness_post outside [0,100]");
  for (auto role_score : {c.user_role_sentiment, c.chatbot_role_sentiment}) {
    if (role_score && (*role_score < 0.0 || *role_score > 10.0))
      malformed(at, "conversation '" + c.id + "': role sentiment outside [0,10]");
  }
  if (c.utterances.empty()) malformed(at, "conversation '" + c.id + "' has no utterances");
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    const Utterance& u = c.utterances[i];
    if (u.conversation_id != c.id) malformed(at, "utterance conversation_id does not match '" + c.id + "'");
    if (u.index != static_cast<int>(i)) malformed(at, "utterance indexes must be contiguous from 0");
    if (u.text.empty()) malformed(at, "utterance " + std::to_string(i) + " has empty text");
    if (u.timestamp < 0) malformed(at, "utterance " + std::to_string(i) + " has a negative timestamp");
    if (u.sentiment && (*u.sentiment < 0.0 || *u.sentiment > 10.0))
      malformed(at, "utterance " + std::to_string(i) + " sentiment outside [0,10]");
    if ((i == 0) != (u.role == Role::topic_prompt))
      malformed(at, "utterance 0 and only utterance 0 must be the topic_prompt");
  }
  if (c.condition == Condition::journal) {
    if (c.utterances.size() != 2 || c.utterances[1].role != Role::user)
      malformed(at, "journal conversation '" + c.id + "' must contain exactly one user utterance");
  } else {
    for (std::size_t i = 1; i < c.utterances.size(); ++i) {
      const Role expected = (i % 2 == 1) ? Role::user : Role::chatbot;
      if (c.utterances[i].role != expected)
        malformed(at, "chatbot conversation '" + c.id + "' must alternate user/chatbot starting with user");
    }
  }
}

void validate_cross_references(const Corpus& corpus, const std::vector<Origin>& topic_at,
                               const std::vector<Origin>& participant_at, const std::vector<Origin>& conv_at) {
  std::unordered_map<std::string, const Topic*> topics;
  for (std::size_t i = 0; i < corpus.topics.size(); ++i) {
    if (!topics.emplace(corpus.topics[i].id, &corpus.topics[i]).second)
      fail(Errc::DuplicateId, topic_at[i].describe() + ": duplicate topic id '" + corpus.topics[i].id + "'");
  }
  std::unordered_map<std::string, const Participant*> participants;
  for (std::size_t i = 0; i < corpus.participants.size(); ++i) {
    if (!participants.emplace(corpus.participants[i].id, &corpus.participants[i]).second)
      fail(Errc::DuplicateId,
           participant_at[i].describe() + ": duplicate participant id '" + corpus.participants[i].id + "'");
  }
  std::unordered_set<std::string> conversation_ids;
  for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
    const Conversation& c = corpus.conversations[i];
    if (!conversation_ids.insert(c.id).second)
      fail(Errc::DuplicateId, conv_at[i].describe() + ": duplicate conversation id '" + c.id + "'");
    auto p = participants.find(c.participant_id);
    if (p == participants.end())
      fail(Errc::DanglingReference,
           conv_at[i].describe() + ": conversation '" + c.id + "' references unknown participant '" +
               c.participant_id + "'");
    auto t = topics.find(c.topic_id);
    if (t == topics.end())
      fail(Errc::DanglingReference, conv_at[i].describe() + ": conversation '" + c.id +
                                        "' references unknown topic '" + c.topic_id + "'");
    if (p->second->condition != c.condition)
      malformed(conv_at[i], "conversation '" + c.id + "' condition differs from its participant's");
    if (!t->second->available(c.condition))
      malformed(conv_at[i], "topic '" + c.topic_id + "' is not available in the " +
                                std::string(to_string(c.condition)) + " condition");
  }
  // ranks, when present, must be exactly 1..K
  std::vector<int> ranks;
  for (const auto& t : corpus.topics)
    if (t.rank) ranks.push_back(*t.rank);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] != static_cast<int>(i) + 1) malformed(Origin{}, "topic ranks must form 1..K");
  }
}

// --- JSON conversion ---

json topic_to_json(const Topic& t) {
  json j;
  j["kind"] = "topic";
  j["id"] = t.id;
  j["prompt_text"] = t.prompt_text;
  json avail = json::array();
  if (t.in_chatbot) avail.push_back("chatbot");
  if (t.in_journal) avail.push_back("journal");
  j["availability"] = avail;
  if (t.journal_mean_happiness) j["journal_mean_happiness"] = *t.journal_mean_happiness;
  if (t.rank) j["rank"] = *t.rank;
  if (t.valence_group) j["valence_group"] = to_string(*t.valence_group);
  j["excluded_from_comparison"] = t.excluded_from_comparison;
  return j;
}

Topic topic_from_json(const json& j, const Origin& at) {
  check_keys(j,
             {"kind", "id", "prompt_text", "availability", "journal_mean_happiness", "rank", "valence_group",
              "excluded_from_comparison"},
             at);
  Topic t;
  t.id = get_string(j, "id", at);
  t.prompt_text = get_string(j, "prompt_text", at);
  const json& avail = require(j, "availability", at);
  if (!avail.is_array()) malformed(at, "field 'availability' must be an array");
  for (const auto& a : avail) {
    auto c = a.is_string() ? parse_condition(a.get<std::string>()) : std::nullopt;
    if (!c) malformed(at, "availability entries must be 'journal' or 'chatbot'");
    (*c == Condition::journal ? t.in_journal : t.in_chatbot) = true;
  }
  t.journal_mean_happiness = get_optional_number(j, "journal_mean_happiness", at);
  if (j.contains("rank")) t.rank = static_cast<int>(get_integer(j, "rank", at));
  if (j.contains("valence_group")) {
    auto g = parse_valence_group(get_string(j, "valence_group", at));
    if (!g) malformed(at, "valence_group must be 'positive' or 'negative'");
    t.valence_group = g;
  }
  if (auto it = j.find("excluded_from_comparison"); it != j.end()) {
    if (!it->is_boolean()) malformed(at, "field 'excluded_from_comparison' must be a boolean");
    t.excluded_from_comparison = it->get<bool>();
  }
  validate_topic(t, at);
  return t;
}

json participant_to_json(const Participant& p) {
  json j;
  j["kind"] = "participant";
  j["id"] = p.id;
  j["condition"] = to_string(p.condition);
  json cov = json::object();
  for (const auto& [k, v] : p.covariates) {
    std::visit([&](const auto& x) { cov[k] = x; }, v);
  }
  j["covariates"] = cov;
  return j;
}

Condition condition_field(const json& j, const Origin& at) {
  auto c = parse_condition(get_string(j, "condition", at));
  if (!c) malformed(at, "condition must be 'journal' or 'chatbot'");
  return *c;
}

Participant participant_from_json(const json& j, const Origin& at) {
  check_keys(j, {"kind", "id", "condition", "covariates"}, at);
  Participant p;
  p.id = get_string(j, "id", at);
  p.condition = condition_field(j, at);
  if (auto it = j.find("covariates"); it != j.end()) {
    if (!it->is_object()) malformed(at, "field 'covariates' must be an object");
    for (const auto& [k, v] : it->items()) {
      if (v.is_string())
        p.covariates[k] = v.get<std::string>();
      else
        p.covariates[k] = get_number(v, k.c_str(), at);
    }
  }
  validate_participant(p, at);
  return p;
}

json conversation_to_json(const Conversation& c) {
  json j;
  j["kind"] = "conversation";
  j["id"] = c.id;
  j["participant_id"] = c.participant_id;
  j["topic_id"] = c.topic_id;
  j["condition"] = to_string(c.condition);
  json utts = json::array();
  for (const auto& u : c.utterances) {
    json ju;
    ju["conversation_id"] = u.conversation_id;
    ju["index"] = u.index;
    ju["role"] = to_string(u.role);
    ju["text"] = u.text;
    ju["timestamp"] = u.timestamp;
    if (u.sentiment) ju["sentiment"] = *u.sentiment;
    utts.push_back(std::move(ju));
  }
  j["utterances"] = std::move(utts);
  if (c.happiness_post) j["happiness_post"] = *c.happiness_post;
  j["started_at"] = c.started_at;
  j["ended_at"] = c.ended_at;
  if (c.user_role_sentiment) j["user_role_sentiment"] = *c.user_role_sentiment;
  if (c.chatbot_role_sentiment) j["chatbot_role_sentiment"] = *c.chatbot_role_sentiment;
  if (!c.provenance.empty()) j["provenance"] = c.provenance;
  return j;
}

Conversation conversation_from_json(const json& j, const Origin& at) {
  check_keys(j,
             {"kind", "id", "participant_id", "topic_id", "condition", "utterances", "happiness_post", "started_at",
              "ended_at", "user_role_sentiment", "chatbot_role_sentiment", "provenance"},
             at);
  Conversation c;
  c.id = get_string(j, "id", at);
  c.participant_id = get_string(j, "participant_id", at);
  c.topic_id = get_string(j, "topic_id", at);
  c.condition = condition_field(j, at);
  c.happiness_post = get_optional_number(j, "happiness_post", at);
  c.started_at = get_integer(j, "started_at", at);
  c.ended_at = get_integer(j, "ended_at", at);
  c.user_role_sentiment = get_optional_number(j, "user_role_sentiment", at);
  c.chatbot_role_sentiment = get_optional_number(j, "chatbot_role_sentiment", at);
  c.provenance = get_provenance(j, at);
  const json& utts = require(j, "utterances", at);
  if (!utts.is_array()) malformed(at, "field 'utterances' must be an array");
  for (const auto& ju : utts) {
    if (!ju.is_object()) malformed(at, "utterances must be objects");
    check_keys(ju, {"conversation_id", "index", "role", "text", "timestamp", "sentiment"}, at);
    Utterance u;
    u.conversation_id = get_string(ju, "conversation_id", at);
    u.index = static_cast<int>(get_integer(ju, "index", at));
    auto role = parse_role(get_string(ju, "role", at));
    if (!role) malformed(at, "utterance role must be topic_prompt, user or chatbot");
    u.role = *role;
    u.text = get_string(ju, "text", at);
    u.timestamp = get_integer(ju, "timestamp", at);
    u.sentiment = get_optional_number(ju, "sentiment", at);
    c.utterances.push_back(std::move(u));
  }
  validate_conversation_shape(c, at);
  return c;
}

}  // namespace

Corpus parse_corpus(std::string_view text) {
  Corpus corpus;
  std::vector<Origin> topic_at, participant_at, conv_at;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const Origin at{line_no};
    if (!seen_header) {
      if (line != kCorpusHeader) malformed(at, "missing '#wbl-corpus v1' header");
      seen_header = true;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(at, std::string("not a JSON object: ") + e.what());
    }
    if (!j.is_object()) malformed(at, "record must be a JSON object");
    const std::string kind = get_string(j, "kind", at);
    if (kind == "topic") {
      corpus.topics.push_back(topic_from_json(j, at));
      topic_at.push_back(at);
    } else if (kind == "participant") {
      corpus.participants.push_back(participant_from_json(j, at));
      participant_at.push_back(at);
    } else if (kind == "conversation") {
      corpus.conversations.push_back(conversation_from_json(j, at));
      conv_at.push_back(at);
    } else if (kind == "provenance") {
      check_keys(j, {"kind", "provenance"}, at);
      for (auto& [k, v] : get_provenance(j, at)) corpus.provenance[k] = v;
    } else {
      malformed(at, "unknown record kind '" + kind + "'");
    }
  }
  validate_cross_references(corpus, topic_at, participant_at, conv_at);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

void validate_corpus(const Corpus& corpus) {
  const Origin none{};
  for (const auto& t : corpus.topics) validate_topic(t, none);
  for (const auto& p : corpus.participants) validate_participant(p, none);
  for (const auto& c : corpus.conversations) validate_conversation_shape(c, none);
  validate_cross_references(corpus, std::vector<Origin>(corpus.topics.size()),
                            std::vector<Origin>(corpus.participants.size()),
                            std::vector<Origin>(corpus.conversations.size()));
}

std::string export_corpus(const Corpus& corpus) {
  std::string out(kCorpusHeader);
  out.push_back('\n');
  auto emit = [&](const json& j) {
    out += j.dump(-1, ' ', false, json::error_handler_t::strict);
    out.push_back('\n');
  };
  if (!corpus.provenance.empty()) emit(json{{"kind", "provenance"}, {"provenance", corpus.provenance}});
  for (const auto& t : corpus.topics) emit(topic_to_json(t));
  for (const auto& p : corpus.participants) emit(participant_to_json(p));
  for (const auto& c : corpus.conversations) emit(conversation_to_json(c));
  return out;
}

std::string corpus_fingerprint(const Corpus& corpus) { return sha256_hex(export_corpus(corpus)); }

std::vector<Topic> derive_topic_stats(const Corpus& corpus) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& c : corpus.conversations) {
    if (c.condition != Condition::journal || !c.happiness_post) continue;
    auto& s = sums[c.topic_id];
    s.first += *c.happiness_post;
    s.second += 1;
  }
  std::vector<Topic> topics = corpus.topics;
  std::vector<Topic*> rankable;
  for (auto& t : topics) {
    t.journal_mean_happiness.reset();
    t.rank.reset();
    t.valence_group.reset();
    if (!t.in_journal || t.excluded_from_comparison) continue;
    auto it = sums.find(t.id);
    if (it == sums.end() || it->second.second == 0) continue;
    t.journal_mean_happiness = it->second.first / static_cast<double>(it->second.second);
    t.valence_group = *t.journal_mean_happiness < 50.0 ? ValenceGroup::negative : ValenceGroup::positive;
    rankable.push_back(&t);
  }
  if (rankable.empty()) fail(Errc::InsufficientData, "no comparable topic has journal happiness ratings");
  std::sort(rankable.begin(), rankable.end(), [](const Topic* a, const Topic* b) {
    if (*a->journal_mean_happiness != *b->journal_mean_happiness)
      return *a->journal_mean_happiness > *b->journal_mean_happiness;
    return a->id < b->id;
  });
  for (std::size_t i = 0; i < rankable.size(); ++i) rankable[i]->rank = static_cast<int>(i) + 1;
  return topics;
}

Corpus with_topic_stats(Corpus corpus) {
  corpus.topics = derive_topic_stats(corpus);
  return corpus;
}

std::map<std::string, Label> label_best_middle_worst(const Participant& participant, const Corpus& corpus) {
  if (participant.condition != Condition::chatbot)
    fail(Errc::WrongConversationCount, "participant '" + participant.id + "' is not in the chatbot condition");
  auto convs = corpus.conversations_of(participant.id);
  if (convs.size() != 3)
    fail(Errc::WrongConversationCount, "participant '" + participant.id + "' has " + std::to_string(convs.size()) +
                                           " conversations, expected 3");
  struct Entry {
    const Conversation* conv;
    const Topic* topic;
  };
  std::vector<Entry> entries;
  for (const auto* c : convs) {
    const Topic* t = corpus.find_topic(c->topic_id);
    if (!t || !t->journal_mean_happiness)
      fail(Errc::UnrankedTopic, "topic '" + c->topic_id + "' has no journal ranking");
    entries.push_back({c, t});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (*a.topic->journal_mean_happiness != *b.topic->journal_mean_happiness)
      return *a.topic->journal_mean_happiness > *b.topic->journal_mean_happiness;
    if (a.topic->id != b.topic->id) return a.topic->id < b.topic->id;
    return a.conv->id < b.conv->id;
  });
  return {{entries[0].conv->id, Label::best}, {entries[1].conv->id, Label::middle}, {entries[2].conv->id, Label::worst}};
}

}  // namespace wbl
