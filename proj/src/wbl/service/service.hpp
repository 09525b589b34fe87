#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "wbl/service/chat.hpp"
#include "wbl/service/session.hpp"

namespace wbl::service {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

// Wall clock, ms since the Unix epoch.
class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override;
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start = 0) : now_(start) {}
  std::int64_t now_ms() override { return now_.load(); }
  void set(std::int64_t t) { now_.store(t); }
  void advance(std::int64_t dt) { now_.fetch_add(dt); }

 private:
  std::atomic<std::int64_t> now_;
};

// Append-only, totally ordered record of every state change. With a path,
// each record is written as one JSON line and flushed before the change is
// applied.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::filesystem::path path);

  // Assigns the next sequence number.
  Event append(Event e);
  std::vector<Event> records() const;
  std::uint64_t last_seq() const;

  static std::vector<Event> read(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  std::vector<Event> records_;
  std::uint64_t seq_ = 0;
};

struct ServiceConfig {
  TimerPolicy timers;
  int tick_ms = 250;
  // sessions created without a seed get splitmix64(seed + session number)
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> log_path;
};

// Sessions folded from events; rebuilds the state of every session in the
// log.
std::map<std::string, Session> replay(const std::vector<Event>& events);

// The experiment protocol. Every public call first applies due timer events
// (warnings, hard stop) to the session it touches; tick() does the same for
// all sessions. Calls on one session are serialized; the upstream chat call
// runs outside the session lock.
class StudyService {
 public:
  StudyService(ServiceConfig config, ChatProvider& chat, Clock& clock);
  ~StudyService();
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  nlohmann::json create_session(std::string_view condition, std::optional<std::uint64_t> seed = std::nullopt);
  // state plus clock status of the active conversation
  nlohmann::json snapshot(const std::string& id);
  ClockStatus clock_status(const std::string& id);

  // Exactly one of text / retry_token. Returns the chatbot utterance.
  nlohmann::json post_chat_message(const std::string& id, const std::optional<std::string>& text,
                                   const std::optional<std::string>& retry_token = std::nullopt);
  nlohmann::json submit_journal_entry(const std::string& id, const std::string& text);
  nlohmann::json end_conversation(const std::string& id);
  nlohmann::json submit_happiness(const std::string& id, double rating);
  nlohmann::json submit_survey(const std::string& id, const nlohmann::json& payload);
  nlohmann::json acknowledge_warning(const std::string& id, std::int64_t mark_ms);

  void tick();
  void start_ticker();
  void stop_ticker();

  // ActiveSessions unless every session is done or include_partial is set;
  // partial exports carry every sealed conversation, rated or not.
  Corpus export_corpus(bool include_partial) const;

  std::vector<Event> events() const { return log_->records(); }
  // state_json of one session, serialized
  std::string state_dump(const std::string& id) const;
  std::vector<std::string> session_ids() const;
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Entry {
    std::mutex mu;
    Session session;
    bool in_flight = false;
  };

  Entry& entry(const std::string& id) const;
  void append(Entry& e, std::string kind, nlohmann::json payload, std::int64_t ts);
  void enforce(Entry& e, std::int64_t now);
  void start_next_topic(Entry& e, std::int64_t now);
  nlohmann::json snapshot_locked(Entry& e, std::int64_t now) const;

  ServiceConfig config_;
  ChatProvider& chat_;
  Clock& clock_;
  std::vector<Topic> catalog_;
  std::unique_ptr<EventLog> log_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::uint64_t created_ = 0;

  std::thread ticker_;
  std::mutex ticker_mu_;
  std::condition_variable ticker_cv_;
  bool ticker_stop_ = false;
};

}  // namespace wbl::service
