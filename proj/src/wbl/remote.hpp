#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wbl/sentiment.hpp"

namespace wbl {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// OpenAI-compatible endpoint settings. The key normally comes from
// WBL_LLM_API_KEY.
struct LlmEndpoint {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  int timeout_ms = 30000;
  unsigned max_in_flight = 4;
  double requests_per_second = 5.0;
  double burst = 5.0;
};

class TokenBucket {
 public:
  TokenBucket(double rate_per_second, double capacity);
  // Blocks until a token is available.
  void acquire();

 private:
  std::mutex mu_;
  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

// Thin client for /chat/completions and /embeddings with a bound on
// concurrent requests and token-bucket pacing. Transport and HTTP failures
// raise ProviderUnavailable.
class LlmClient {
 public:
  explicit LlmClient(LlmEndpoint endpoint);
  ~LlmClient();
  LlmClient(const LlmClient&) = delete;
  LlmClient& operator=(const LlmClient&) = delete;

  std::string chat(const std::string& model, const std::vector<ChatMessage>& messages, double temperature,
                   std::optional<int> max_tokens = std::nullopt);
  std::vector<double> embed(const std::string& model, std::string_view text);

  std::size_t requests_sent() const noexcept;
  std::size_t peak_in_flight() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::string_view kDefaultRatingTemplate =
    "Rate the sentiment of the following {unit} on a scale from 0 (very negative) to 10 (very positive). "
    "Reply with a single number.";

// Fills {unit}: "message" for utterances, "conversation excerpt" for
// concatenated role text.
std::string render_rating_prompt(std::string_view tmpl, Granularity granularity);

struct RemoteSentimentConfig {
  LlmEndpoint endpoint;
  std::string model = "gpt-4";
  std::string embedding_model = "text-embedding-3-large";
  double temperature = 0.0;
  std::string prompt_template = std::string(kDefaultRatingTemplate);
};

class RemoteSentimentProvider final : public SentimentProvider {
 public:
  explicit RemoteSentimentProvider(RemoteSentimentConfig config);

  std::string provider_id() const override;
  std::string cache_namespace() const override;
  bool deterministic() const override { return false; }

  std::string rate(std::string_view text, Granularity granularity) override;
  std::vector<double> embed(std::string_view text) override;

  LlmClient& client() noexcept { return client_; }

 private:
  RemoteSentimentConfig config_;
  LlmClient client_;
};

}  // namespace wbl
