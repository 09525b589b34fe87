#include "wbl/service/session.hpp"

#include <algorithm>

#include "wbl/error.hpp"
#include "wbl/rng.hpp"

namespace wbl::service {

using nlohmann::json;

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::intake: return "intake";
    case Phase::active_topic: return "active_topic";
    case Phase::rating: return "rating";
    case Phase::outtake: return "outtake";
    case Phase::done: return "done";
  }
  return "?";
}

void TimerPolicy::validate() const {
  if (journal_min_ms < 0) fail(Errc::ConfigError, "journal_min_ms must be non-negative");
  if (!(0 <= chat_end_allowed_ms && chat_end_allowed_ms < chat_hard_stop_ms))
    fail(Errc::ConfigError, "chat_end_allowed_ms must lie below chat_hard_stop_ms");
  for (auto m : warning_marks_ms)
    if (!(m > 0 && m < chat_hard_stop_ms))
      fail(Errc::ConfigError, "warning marks must lie strictly inside (0, chat_hard_stop_ms)",
           std::to_string(m));
}

json Event::to_json() const {
  return json{{"seq", seq}, {"session_id", session_id}, {"kind", kind}, {"payload", payload}, {"ts", ts}};
}

Event Event::from_json(const json& j) {
  try {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.session_id = j.at("session_id").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    e.ts = j.at("ts").get<std::int64_t>();
    return e;
  } catch (const json::exception& ex) {
    fail(Errc::MalformedRecord, "bad event log record", ex.what());
  }
}

bool ActiveConversation::awaiting_reply() const noexcept {
  return !sealed && conversation.condition == Condition::chatbot && conversation.utterances.size() > 1 &&
         conversation.utterances.back().role == Role::user;
}

namespace {

void add_utterance(Conversation& c, Role role, std::string text, std::int64_t at) {
  const int idx = static_cast<int>(c.utterances.size());
  c.utterances.push_back({c.id, idx, role, std::move(text), at, std::nullopt});
}

json utterance_json(const Utterance& u) {
  return {{"index", u.index}, {"role", to_string(u.role)}, {"text", u.text}, {"timestamp", u.timestamp}};
}

json conversation_json(const Conversation& c) {
  json j{{"id", c.id}, {"topic_id", c.topic_id}, {"started_at", c.started_at}, {"ended_at", c.ended_at}};
  json us = json::array();
  for (const auto& u : c.utterances) us.push_back(utterance_json(u));
  j["utterances"] = std::move(us);
  j["happiness_post"] = c.happiness_post ? json(*c.happiness_post) : json(nullptr);
  return j;
}

}  // namespace

void Session::apply(const Event& e) {
  const json& p = e.payload;
  if (e.kind == "created") {
    id_ = e.session_id;
    participant_id_ = p.at("participant_id").get<std::string>();
    condition_ = *parse_condition(p.at("condition").get<std::string>());
    seed_ = p.at("seed").get<std::uint64_t>();
    topic_queue_ = p.at("topic_queue").get<std::vector<std::string>>();
    chat_parameters_ = p.at("chat_parameters").get<Provenance>();
    created_at_ = e.ts;
    phase_ = Phase::intake;
  } else if (e.kind == "survey") {
    surveys_.push_back(json{{"phase", to_string(phase_)}, {"payload", p.at("payload")}, {"ts", e.ts}});
    if (phase_ == Phase::intake) phase_ = Phase::active_topic;
    else if (phase_ == Phase::outtake) phase_ = Phase::done;
  } else if (e.kind == "conversation_started") {
    ActiveConversation a;
    Conversation& c = a.conversation;
    c.id = p.at("conversation_id").get<std::string>();
    c.participant_id = participant_id_;
    c.topic_id = p.at("topic_id").get<std::string>();
    c.condition = condition_;
    c.started_at = e.ts;
    c.provenance = chat_parameters_;
    c.provenance["session_id"] = id_;
    add_utterance(c, Role::topic_prompt, p.at("prompt").get<std::string>(), 0);
    current_ = std::move(a);
    phase_ = Phase::active_topic;
  } else if (e.kind == "user_message") {
    add_utterance(current_->conversation, Role::user, p.at("text").get<std::string>(),
                  e.ts - current_->conversation.started_at);
  } else if (e.kind == "chatbot_reply") {
    add_utterance(current_->conversation, Role::chatbot, p.at("text").get<std::string>(),
                  e.ts - current_->conversation.started_at);
    current_->retry_token.reset();
  } else if (e.kind == "upstream_failure") {
    current_->retry_token = p.at("retry_token").get<std::string>();
  } else if (e.kind == "journal_draft") {
    auto& c = current_->conversation;
    const std::int64_t at = e.ts - c.started_at;
    if (c.utterances.size() > 1) {
      c.utterances[1].text = p.at("text").get<std::string>();
      c.utterances[1].timestamp = at;
    } else {
      add_utterance(c, Role::user, p.at("text").get<std::string>(), at);
    }
  } else if (e.kind == "warning_issued") {
    current_->warnings_issued.insert(p.at("mark_ms").get<std::int64_t>());
  } else if (e.kind == "warning_ack") {
    current_->warnings_acked.insert(p.at("mark_ms").get<std::int64_t>());
  } else if (e.kind == "sealed") {
    current_->sealed = true;
    current_->seal_reason = p.at("reason").get<std::string>();
    current_->conversation.ended_at = p.at("at").get<std::int64_t>();
    phase_ = Phase::rating;
  } else if (e.kind == "happiness") {
    current_->conversation.happiness_post = p.at("rating").get<double>();
    completed_.push_back(std::move(current_->conversation));
    current_.reset();
    ++topic_index_;
    phase_ = topic_index_ < topic_queue_.size() ? Phase::active_topic : Phase::outtake;
  } else {
    fail(Errc::MalformedRecord, "unknown event kind '" + e.kind + "'", std::to_string(e.seq));
  }
}

ClockStatus Session::clock_status(std::int64_t now, const TimerPolicy& timers) const {
  if (!current_ || current_->sealed) fail(Errc::NoActiveConversation, "no active conversation");
  ClockStatus s;
  s.elapsed_ms = now - current_->conversation.started_at;
  const std::int64_t gate = condition_ == Condition::chatbot ? timers.chat_end_allowed_ms : timers.journal_min_ms;
  s.end_allowed = s.elapsed_ms >= gate;
  s.ms_until_end_allowed = std::max<std::int64_t>(0, gate - s.elapsed_ms);
  if (condition_ == Condition::chatbot) {
    for (auto m : timers.warning_marks_ms)
      if (s.elapsed_ms >= m && !current_->warnings_acked.count(m)) s.warnings_due.push_back(m);
  }
  return s;
}

json Session::state_json() const {
  json j;
  j["id"] = id_;
  j["participant_id"] = participant_id_;
  j["condition"] = to_string(condition_);
  j["seed"] = seed_;
  j["phase"] = to_string(phase_);
  j["topic_queue"] = topic_queue_;
  j["topic_index"] = topic_index_;
  j["created_at"] = created_at_;
  j["chat_parameters"] = chat_parameters_;
  json done = json::array();
  for (const auto& c : completed_) done.push_back(conversation_json(c));
  j["completed"] = std::move(done);
  if (current_) {
    json cur = conversation_json(current_->conversation);
    cur["sealed"] = current_->sealed;
    cur["seal_reason"] = current_->seal_reason;
    cur["warnings_issued"] = current_->warnings_issued;
    cur["warnings_acked"] = current_->warnings_acked;
    cur["retry_token"] = current_->retry_token ? json(*current_->retry_token) : json(nullptr);
    cur["awaiting_reply"] = current_->awaiting_reply();
    j["current"] = std::move(cur);
  } else {
    j["current"] = nullptr;
  }
  j["surveys"] = surveys_;
  return j;
}

std::vector<std::string> draw_topics(const std::vector<Topic>& catalog, Condition condition, std::uint64_t seed) {
  auto ids = catalog_ids(catalog, condition);
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));
  if (condition == Condition::chatbot && ids.size() > 3) ids.resize(3);
  return ids;
}

}  // namespace wbl::service
