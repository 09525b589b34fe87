#include "wbl/remote.hpp"

#include <algorithm>
#include <atomic>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wbl/error.hpp"
#include "wbl/hash.hpp"

namespace wbl {

using nlohmann::json;

TokenBucket::TokenBucket(double rate_per_second, double capacity)
    : rate_(rate_per_second), capacity_(std::max(capacity, 1.0)), tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0.0) return;
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    }
    std::this_thread::sleep_for(wait);
  }
}

struct LlmClient::Impl {
  LlmEndpoint endpoint;
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path below the origin, e.g. /v1
  std::counting_semaphore<1024> slots;
  TokenBucket bucket;
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak{0};
  std::atomic<std::size_t> sent{0};

  explicit Impl(LlmEndpoint ep)
      : endpoint(std::move(ep)),
        slots(static_cast<std::ptrdiff_t>(std::clamp(endpoint.max_in_flight, 1u, 1024u))),
        bucket(endpoint.requests_per_second, endpoint.burst) {
    const auto scheme = endpoint.base_url.find("://");
    if (scheme == std::string::npos) fail(Errc::ConfigError, "base_url needs a scheme: " + endpoint.base_url);
    const auto path = endpoint.base_url.find('/', scheme + 3);
    origin = endpoint.base_url.substr(0, path);
    prefix = path == std::string::npos ? "" : endpoint.base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }

  json post(const std::string& route, const json& body) {
    bucket.acquire();
    slots.acquire();
    const std::size_t now = ++in_flight;
    std::size_t seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    struct Release {
      Impl* self;
      ~Release() {
        --self->in_flight;
        self->slots.release();
      }
    } release{this};
    ++sent;

    httplib::Client cli(origin);
    const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    auto res = cli.Post(prefix + route, headers, body.dump(), "application/json");
    if (!res) fail(Errc::ProviderUnavailable, "request to " + origin + prefix + route + " failed", httplib::to_string(res.error()));
    if (res->status != 200)
      fail(Errc::ProviderUnavailable, "upstream returned HTTP " + std::to_string(res->status), res->body);
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) fail(Errc::ProviderUnavailable, "upstream reply is not JSON", res->body);
    return reply;
  }
};

LlmClient::LlmClient(LlmEndpoint endpoint) : impl_(std::make_unique<Impl>(std::move(endpoint))) {}
LlmClient::~LlmClient() = default;

std::string LlmClient::chat(const std::string& model, const std::vector<ChatMessage>& messages, double temperature,
                            std::optional<int> max_tokens) {
  json body{{"model", model}, {"temperature", temperature}, {"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  if (max_tokens) body["max_tokens"] = *max_tokens;
  const json reply = impl_->post("/chat/completions", body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    fail(Errc::ProviderUnavailable, "chat completion reply has no message content", reply.dump());
  }
}

std::vector<double> LlmClient::embed(const std::string& model, std::string_view text) {
  const json reply = impl_->post("/embeddings", json{{"model", model}, {"input", std::string(text)}});
  try {
    return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    fail(Errc::ProviderUnavailable, "embedding reply has no vector", reply.dump());
  }
}

std::size_t LlmClient::requests_sent() const noexcept { return impl_->sent.load(); }
std::size_t LlmClient::peak_in_flight() const noexcept { return impl_->peak.load(); }

std::string render_rating_prompt(std::string_view tmpl, Granularity granularity) {
  std::string out(tmpl);
  const std::string unit = granularity == Granularity::utterance ? "message" : "conversation excerpt";
  for (auto pos = out.find("{unit}"); pos != std::string::npos; pos = out.find("{unit}", pos + unit.size()))
    out.replace(pos, 6, unit);
  return out;
}

RemoteSentimentProvider::RemoteSentimentProvider(RemoteSentimentConfig config)
    : config_(std::move(config)), client_(config_.endpoint) {}

std::string RemoteSentimentProvider::provider_id() const { return "remote:" + config_.model; }

std::string RemoteSentimentProvider::cache_namespace() const {
  json params{{"model", config_.model},
              {"embedding_model", config_.embedding_model},
              {"temperature", config_.temperature},
              {"template", config_.prompt_template}};
  return provider_id() + ":" + sha256_hex(params.dump());
}

std::string RemoteSentimentProvider::rate(std::string_view text, Granularity granularity) {
  std::vector<ChatMessage> messages = {{"system", render_rating_prompt(config_.prompt_template, granularity)},
                                       {"user", std::string(text)}};
  return client_.chat(config_.model, messages, config_.temperature, 8);
}

std::vector<double> RemoteSentimentProvider::embed(std::string_view text) {
  return client_.embed(config_.embedding_model, text);
}

}  // namespace wbl
