#include "wbl/service/chat.hpp"

#include <array>

#include "json.hpp"
#include "wbl/hash.hpp"

namespace wbl::service {

namespace {

constexpr std::array<std::string_view, 6> kReplies = {
    "That sounds like it matters a lot to you. What feelings come up when you think about it?",
    "Thank you for sharing that. How has it been affecting you lately?",
    "I hear you. What do you think is at the heart of how you feel about this?",
    "It makes sense to feel that way. What would help you feel a little more at ease right now?",
    "That is a lot to carry. When you notice those feelings, what do you usually do?",
    "I appreciate you opening up. Is there a part of this you would like to explore further?",
};

}  // namespace

std::string OfflineChatProvider::reply(const std::vector<ChatMessage>& history) {
  std::string key;
  for (const auto& m : history) key += m.role + '\x1f' + m.content + '\x1e';
  const std::string h = sha256_hex(key);
  return std::string(kReplies[std::stoul(h.substr(0, 8), nullptr, 16) % kReplies.size()]);
}

Provenance OfflineChatProvider::parameters() const { return {{"chat_provider", "offline-v1"}}; }

RemoteChatProvider::RemoteChatProvider(RemoteChatConfig config) : config_(std::move(config)), client_(config_.endpoint) {}

std::string RemoteChatProvider::reply(const std::vector<ChatMessage>& history) {
  return client_.chat(config_.model, history, config_.temperature);
}

Provenance RemoteChatProvider::parameters() const {
  return {{"chat_provider", "remote"},
          {"chat_model", config_.model},
          {"chat_temperature", nlohmann::json(config_.temperature).dump()},
          {"chat_base_url", config_.endpoint.base_url}};
}

}  // namespace wbl::service
