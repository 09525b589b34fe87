#include "wbl/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "wbl/error.hpp"
#include "wbl/rng.hpp"

namespace wbl::service {

using nlohmann::json;

std::int64_t SystemClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// --- event log ----------------------------------------------------------

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) {
    records_ = read(*path_);
    if (!records_.empty()) seq_ = records_.back().seq;
  }
  out_.open(*path_, std::ios::app | std::ios::binary);
  if (!out_) fail(Errc::IoError, "cannot open event log " + path_->string());
}

Event EventLog::append(Event e) {
  std::lock_guard lock(mu_);
  e.seq = ++seq_;
  if (path_) {
    out_ << e.to_json().dump() << '\n';
    out_.flush();
    if (!out_) fail(Errc::IoError, "cannot append to event log " + path_->string());
  }
  records_.push_back(e);
  return e;
}

std::vector<Event> EventLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

std::vector<Event> EventLog::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open event log " + path.string());
  std::vector<Event> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(Errc::MalformedRecord, "event log line " + std::to_string(n) + " is not JSON");
    out.push_back(Event::from_json(j));
    if (out.size() > 1 && out.back().seq <= out[out.size() - 2].seq)
      fail(Errc::MalformedRecord, "event log sequence numbers must increase", std::to_string(n));
  }
  return out;
}

std::map<std::string, Session> replay(const std::vector<Event>& events) {
  std::map<std::string, Session> sessions;
  for (const auto& e : events) {
    if (e.kind != "created" && !sessions.count(e.session_id))
      fail(Errc::MalformedRecord, "event for unknown session '" + e.session_id + "'", std::to_string(e.seq));
    sessions[e.session_id].apply(e);
  }
  return sessions;
}

// --- service ------------------------------------------------------------

StudyService::StudyService(ServiceConfig config, ChatProvider& chat, Clock& clock)
    : config_(std::move(config)), chat_(chat), clock_(clock), catalog_(default_catalog()) {
  config_.timers.validate();
  if (config_.tick_ms <= 0) fail(Errc::ConfigError, "tick_ms must be positive");
  log_ = config_.log_path ? std::make_unique<EventLog>(*config_.log_path) : std::make_unique<EventLog>();
  if (config_.log_path) {
    for (auto& [id, s] : replay(log_->records())) {
      auto e = std::make_unique<Entry>();
      e->session = std::move(s);
      sessions_[id] = std::move(e);
    }
    created_ = sessions_.size();
  }
}

StudyService::~StudyService() { stop_ticker(); }

StudyService::Entry& StudyService::entry(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(Errc::NotFound, "no session '" + id + "'");
  return *it->second;
}

void StudyService::append(Entry& e, std::string kind, json payload, std::int64_t ts) {
  Event ev;
  ev.session_id = e.session.id();
  ev.kind = std::move(kind);
  ev.payload = std::move(payload);
  ev.ts = ts;
  e.session.apply(log_->append(std::move(ev)));
}

void StudyService::enforce(Entry& e, std::int64_t now) {
  const auto& cur = e.session.current();
  if (!cur || cur->sealed || e.session.condition() != Condition::chatbot) return;
  const std::int64_t start = cur->conversation.started_at;
  const std::int64_t elapsed = now - start;
  const auto& t = config_.timers;
  for (auto m : t.warning_marks_ms)
    if (elapsed >= m && !e.session.current()->warnings_issued.count(m)) append(e, "warning_issued", {{"mark_ms", m}}, now);
  if (elapsed >= t.chat_hard_stop_ms)
    append(e, "sealed", {{"reason", "hard_stop"}, {"at", start + t.chat_hard_stop_ms}}, now);
}

void StudyService::start_next_topic(Entry& e, std::int64_t now) {
  const auto& s = e.session;
  const std::string& topic_id = s.topic_queue().at(s.topic_index());
  auto it = std::find_if(catalog_.begin(), catalog_.end(), [&](const Topic& t) { return t.id == topic_id; });
  append(e, "conversation_started",
         {{"conversation_id", s.id() + "-" + std::to_string(s.topic_index() + 1)},
          {"topic_id", topic_id},
          {"prompt", it->prompt_text}},
         now);
}

json StudyService::snapshot_locked(Entry& e, std::int64_t now) const {
  json j = e.session.state_json();
  j["server_time"] = now;
  j["reply_pending"] = e.in_flight;
  const auto& cur = e.session.current();
  if (cur && !cur->sealed) {
    const auto st = e.session.clock_status(now, config_.timers);
    j["clock"] = {{"elapsed_ms", st.elapsed_ms},
                  {"end_allowed", st.end_allowed},
                  {"ms_until_end_allowed", st.ms_until_end_allowed},
                  {"warnings_due", st.warnings_due}};
  } else {
    j["clock"] = nullptr;
  }
  return j;
}

json StudyService::create_session(std::string_view condition, std::optional<std::uint64_t> seed) {
  const auto cond = parse_condition(condition);
  if (!cond) fail(Errc::UnknownCondition, "unknown condition '" + std::string(condition) + "'");
  const std::int64_t now = clock_.now_ms();
  std::unique_lock lock(map_mu_);
  const std::uint64_t n = ++created_;
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(n));
  const std::string id = buf;
  std::snprintf(buf, sizeof buf, "p%06llu", static_cast<unsigned long long>(n));
  const std::uint64_t s = seed ? *seed : splitmix64(config_.seed + n);
  auto e = std::make_unique<Entry>();
  Entry& ref = *e;
  sessions_[id] = std::move(e);
  std::lock_guard session_lock(ref.mu);
  lock.unlock();
  Event ev;
  ev.session_id = id;
  ev.kind = "created";
  ev.ts = now;
  ev.payload = {{"participant_id", buf},
                {"condition", to_string(*cond)},
                {"seed", s},
                {"topic_queue", draw_topics(catalog_, *cond, s)},
                {"chat_parameters", *cond == Condition::chatbot ? chat_.parameters() : Provenance{}}};
  ref.session.apply(log_->append(std::move(ev)));
  return snapshot_locked(ref, now);
}

json StudyService::snapshot(const std::string& id) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  return snapshot_locked(e, now);
}

ClockStatus StudyService::clock_status(const std::string& id) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  return e.session.clock_status(now, config_.timers);
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void require_active(const Session& s) {
  if (s.phase() != Phase::active_topic)
    fail(Errc::WrongPhase, "session is in phase " + std::string(to_string(s.phase())), "active_topic required");
}

json utterance_json(const Utterance& u) {
  return {{"index", u.index}, {"role", to_string(u.role)}, {"text", u.text}, {"timestamp", u.timestamp}};
}

}  // namespace

json StudyService::post_chat_message(const std::string& id, const std::optional<std::string>& text,
                                     const std::optional<std::string>& retry_token) {
  Entry& e = entry(id);
  std::vector<ChatMessage> history;
  std::string conversation_id;
  {
    std::lock_guard lock(e.mu);
    const std::int64_t now = clock_.now_ms();
    enforce(e, now);
    const Session& s = e.session;
    if (s.condition() != Condition::chatbot) fail(Errc::WrongCondition, "messages belong to chatbot sessions");
    const auto& cur = s.current();
    if (cur && cur->sealed && cur->seal_reason == "hard_stop" && s.phase() == Phase::rating)
      fail(Errc::ConversationOver, "the conversation reached its time limit", std::to_string(config_.timers.chat_hard_stop_ms));
    require_active(s);
    if (e.in_flight) fail(Errc::ReplyPending, "a reply to the previous message is still pending");
    if (text.has_value() == retry_token.has_value())
      fail(Errc::InvalidArgument, "send exactly one of text or retry_token");
    if (text) {
      if (blank(*text)) fail(Errc::EmptyText, "message text is empty");
      if (cur->awaiting_reply())
        fail(Errc::ReplyPending, "the previous message has no reply; resend it with its retry token",
             cur->retry_token.value_or(""));
      append(e, "user_message", {{"text", *text}}, now);
    } else if (!cur->retry_token || *cur->retry_token != *retry_token) {
      fail(Errc::InvalidArgument, "unknown retry token", *retry_token);
    }
    history.push_back({"system", std::string(chatbot_system_prompt())});
    for (const auto& u : s.current()->conversation.utterances)
      history.push_back({u.role == Role::user ? "user" : "assistant", u.text});
    conversation_id = s.current()->conversation.id;
    e.in_flight = true;
  }

  std::optional<std::string> reply;
  std::string failure;
  try {
    reply = chat_.reply(history);
    if (blank(*reply)) {
      reply.reset();
      failure = "empty reply";
    }
  } catch (const std::exception& ex) {
    failure = ex.what();
  }

  std::lock_guard lock(e.mu);
  e.in_flight = false;
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  const auto& cur = e.session.current();
  if (!cur || cur->conversation.id != conversation_id || cur->sealed)
    fail(Errc::ConversationOver, "the conversation ended while the reply was pending");
  if (!reply) {
    const std::string token = conversation_id + "#" + std::to_string(cur->conversation.utterances.back().index);
    append(e, "upstream_failure", {{"retry_token", token}, {"message", failure}}, now);
    fail(Errc::UpstreamFailure, "the chat provider failed; the message is kept", token);
  }
  append(e, "chatbot_reply", {{"text", *reply}}, now);
  return utterance_json(e.session.current()->conversation.utterances.back());
}

json StudyService::submit_journal_entry(const std::string& id, const std::string& text) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  if (e.session.condition() != Condition::journal) fail(Errc::WrongCondition, "journal entries belong to journal sessions");
  require_active(e.session);
  if (blank(text)) fail(Errc::EmptyText, "journal entry is empty");
  append(e, "journal_draft", {{"text", text}}, now);
  return utterance_json(e.session.current()->conversation.utterances.back());
}

json StudyService::end_conversation(const std::string& id) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  require_active(e.session);
  if (e.in_flight) fail(Errc::ReplyPending, "a chatbot reply is pending");
  const auto st = e.session.clock_status(now, config_.timers);
  if (!st.end_allowed)
    fail(Errc::TooEarly, "the conversation cannot end yet", std::to_string(st.ms_until_end_allowed));
  const auto& c = e.session.current()->conversation;
  if (e.session.condition() == Condition::journal && c.utterances.size() < 2)
    fail(Errc::EmptyText, "no journal entry has been written");
  // seal strictly after the last utterance
  const std::int64_t at = std::max(now, c.started_at + c.utterances.back().timestamp + 1);
  append(e, "sealed", {{"reason", "participant"}, {"at", at}}, now);
  return snapshot_locked(e, now);
}

json StudyService::submit_happiness(const std::string& id, double rating) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  if (e.session.phase() != Phase::rating)
    fail(Errc::WrongPhase, "session is in phase " + std::string(to_string(e.session.phase())), "rating required");
  if (!std::isfinite(rating) || rating < 0.0 || rating > 100.0)
    fail(Errc::OutOfRange, "happiness rating must lie in [0, 100]", json(rating).dump());
  append(e, "happiness", {{"rating", rating}}, now);
  if (e.session.phase() == Phase::active_topic) start_next_topic(e, now);
  return snapshot_locked(e, now);
}

json StudyService::submit_survey(const std::string& id, const json& payload) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  const Phase p = e.session.phase();
  if (p != Phase::intake && p != Phase::outtake)
    fail(Errc::WrongPhase, "surveys are taken in intake or outtake", std::string(to_string(p)));
  append(e, "survey", {{"payload", payload}}, now);
  if (e.session.phase() == Phase::active_topic) start_next_topic(e, now);
  return snapshot_locked(e, now);
}

json StudyService::acknowledge_warning(const std::string& id, std::int64_t mark_ms) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  const std::int64_t now = clock_.now_ms();
  enforce(e, now);
  const auto st = e.session.clock_status(now, config_.timers);
  const auto& marks = config_.timers.warning_marks_ms;
  if (e.session.condition() != Condition::chatbot || std::find(marks.begin(), marks.end(), mark_ms) == marks.end())
    fail(Errc::InvalidArgument, "no such warning", std::to_string(mark_ms));
  if (st.elapsed_ms < mark_ms) fail(Errc::TooEarly, "warning not reached yet", std::to_string(mark_ms - st.elapsed_ms));
  if (!e.session.current()->warnings_acked.count(mark_ms)) append(e, "warning_ack", {{"mark_ms", mark_ms}}, now);
  return snapshot_locked(e, now);
}

void StudyService::tick() {
  std::vector<Entry*> all;
  {
    std::shared_lock lock(map_mu_);
    for (auto& [_, e] : sessions_) all.push_back(e.get());
  }
  const std::int64_t now = clock_.now_ms();
  for (Entry* e : all) {
    std::lock_guard lock(e->mu);
    enforce(*e, now);
  }
}

void StudyService::start_ticker() {
  std::lock_guard lock(ticker_mu_);
  if (ticker_.joinable()) return;
  ticker_stop_ = false;
  ticker_ = std::thread([this] {
    std::unique_lock lk(ticker_mu_);
    while (!ticker_cv_.wait_for(lk, std::chrono::milliseconds(config_.tick_ms), [this] { return ticker_stop_; })) {
      lk.unlock();
      try {
        tick();
      } catch (const std::exception& ex) {
        std::fprintf(stderr, "tick failed: %s\n", ex.what());
      }
      lk.lock();
    }
  });
}

void StudyService::stop_ticker() {
  {
    std::lock_guard lock(ticker_mu_);
    ticker_stop_ = true;
  }
  ticker_cv_.notify_all();
  if (ticker_.joinable()) ticker_.join();
}

Corpus StudyService::export_corpus(bool include_partial) const {
  Corpus corpus;
  corpus.topics = catalog_;
  corpus.provenance = {{"generator", "wbl-service"}, {"partial", include_partial ? "true" : "false"}};
  std::shared_lock lock(map_mu_);
  std::size_t active = 0;
  for (const auto& [id, e] : sessions_) {
    std::lock_guard session_lock(e->mu);
    const Session& s = e->session;
    if (s.phase() != Phase::done) ++active;
    std::vector<Conversation> convs = s.completed();
    if (include_partial && s.current() && s.current()->sealed) convs.push_back(s.current()->conversation);
    if (convs.empty()) continue;
    corpus.participants.push_back({s.participant_id(), s.condition(), {}});
    for (auto& c : convs) corpus.conversations.push_back(std::move(c));
  }
  if (active && !include_partial)
    fail(Errc::ActiveSessions, std::to_string(active) + " sessions are not finished", std::to_string(active));
  validate_corpus(corpus);
  return corpus;
}

std::string StudyService::state_dump(const std::string& id) const {
  Entry& e = entry(id);
  std::lock_guard lock(e.mu);
  return e.session.state_json().dump();
}

std::vector<std::string> StudyService::session_ids() const {
  std::shared_lock lock(map_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

}  // namespace wbl::service
