#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wbl/corpus.hpp"

namespace wbl::service {

enum class Phase { intake, active_topic, rating, outtake, done };
std::string_view to_string(Phase p) noexcept;

struct TimerPolicy {
  std::int64_t journal_min_ms = 60'000;
  std::int64_t chat_end_allowed_ms = 240'000;
  std::int64_t chat_hard_stop_ms = 360'000;
  std::vector<std::int64_t> warning_marks_ms = {240'000, 300'000};

  // end_allowed < hard_stop, every mark inside (0, hard_stop); ConfigError otherwise.
  void validate() const;
};

struct Event {
  std::uint64_t seq = 0;
  std::string session_id;
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();
  std::int64_t ts = 0;  // server clock, ms

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
};

struct ClockStatus {
  std::int64_t elapsed_ms = 0;
  bool end_allowed = false;
  std::int64_t ms_until_end_allowed = 0;
  std::vector<std::int64_t> warnings_due;  // chatbot only
};

struct ActiveConversation {
  Conversation conversation;  // utterance timestamps are ms since started_at
  bool sealed = false;
  std::string seal_reason;
  std::set<std::int64_t> warnings_issued;
  std::set<std::int64_t> warnings_acked;
  std::optional<std::string> retry_token;  // set by an upstream failure, cleared by a reply

  bool awaiting_reply() const noexcept;
};

// State of one participant session, rebuilt by folding its events in order.
// apply() trusts its input: validation happens before an event is logged.
class Session {
 public:
  void apply(const Event& e);

  const std::string& id() const noexcept { return id_; }
  const std::string& participant_id() const noexcept { return participant_id_; }
  Condition condition() const noexcept { return condition_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Phase phase() const noexcept { return phase_; }
  const std::vector<std::string>& topic_queue() const noexcept { return topic_queue_; }
  std::size_t topic_index() const noexcept { return topic_index_; }
  const std::optional<ActiveConversation>& current() const noexcept { return current_; }
  const std::vector<Conversation>& completed() const noexcept { return completed_; }
  const Provenance& chat_parameters() const noexcept { return chat_parameters_; }

  // Requires an unsealed current conversation.
  ClockStatus clock_status(std::int64_t now, const TimerPolicy& timers) const;

  // Everything except the clock; replay must reproduce it byte for byte.
  nlohmann::json state_json() const;

 private:
  std::string id_, participant_id_;
  Condition condition_ = Condition::journal;
  std::uint64_t seed_ = 0;
  Phase phase_ = Phase::intake;
  std::vector<std::string> topic_queue_;
  std::size_t topic_index_ = 0;
  std::optional<ActiveConversation> current_;
  std::vector<Conversation> completed_;
  std::vector<nlohmann::json> surveys_;
  Provenance chat_parameters_;
  std::int64_t created_at_ = 0;
};

// Seeded topic queue: 3 of the chatbot topics, or every journal topic, in
// shuffled order.
std::vector<std::string> draw_topics(const std::vector<Topic>& catalog, Condition condition, std::uint64_t seed);

}  // namespace wbl::service
