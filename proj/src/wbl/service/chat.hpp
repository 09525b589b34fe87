#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wbl/corpus.hpp"
#include "wbl/remote.hpp"

namespace wbl::service {

// Upstream chat model. reply() gets the full history: system message, the
// topic prompt as an assistant turn, then alternating user/assistant turns.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string reply(const std::vector<ChatMessage>& history) = 0;
  // Stamped into every chatbot conversation's provenance.
  virtual Provenance parameters() const = 0;
};

// Deterministic canned replies chosen from a hash of the history; for
// offline runs and tests.
class OfflineChatProvider final : public ChatProvider {
 public:
  std::string reply(const std::vector<ChatMessage>& history) override;
  Provenance parameters() const override;
};

struct RemoteChatConfig {
  LlmEndpoint endpoint;
  std::string model = "gpt-4-0613";
  double temperature = 1.0;
};

class RemoteChatProvider final : public ChatProvider {
 public:
  explicit RemoteChatProvider(RemoteChatConfig config);
  std::string reply(const std::vector<ChatMessage>& history) override;
  Provenance parameters() const override;

 private:
  RemoteChatConfig config_;
  LlmClient client_;
};

}  // namespace wbl::service
