#include "wbl/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "wbl/error.hpp"
#include "wbl/hash.hpp"
#include "wbl/parallel.hpp"
#include "wbl/rng.hpp"

namespace wbl {

using nlohmann::json;

std::string_view to_string(Granularity g) noexcept {
  return g == Granularity::utterance ? "utterance" : "conversation_role";
}

namespace {

bool blank(std::string_view text) { return text.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

SentimentScore lexicon_fallback_score(std::string_view text, Granularity granularity) {
  if (blank(text)) fail(Errc::EmptyText, "cannot score empty text");
  const auto& lexicon = fallback_lexicon();
  const auto tokens = tokenize(text);
  double sum = 0.0;
  for (const auto& tok : tokens) {
    auto it = lexicon.find(tok);
    if (it != lexicon.end()) sum += it->second;
  }
  SentimentScore s;
  s.granularity = granularity;
  s.provider_id = std::string("fallback-") + std::string(kLexiconVersion);
  s.value = tokens.empty() ? 5.0 : std::clamp(5.0 + 5.0 * sum / static_cast<double>(tokens.size()), 0.0, 10.0);
  return s;
}

std::vector<double> hashing_embedding(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (blank(text)) fail(Errc::EmptyText, "cannot embed empty text");
  if (dim == 0) fail(Errc::InvalidArgument, "embedding dimension must be positive");
  std::vector<double> v(dim, 0.0);
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = splitmix64(fnv1a(tok) ^ seed);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::optional<double> parse_score_reply(std::string_view reply) {
  const auto first = reply.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  reply = reply.substr(first, reply.find_last_not_of(" \t\r\n") - first + 1);
  if (!reply.empty() && reply.back() == '.') reply.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(reply.data(), reply.data() + reply.size(), v);
  if (ec != std::errc() || ptr != reply.data() + reply.size()) return std::nullopt;
  if (!(v >= 0.0 && v <= 10.0)) return std::nullopt;
  return v;
}

FallbackProvider::FallbackProvider(std::size_t embedding_dim, std::uint64_t hash_seed)
    : dim_(embedding_dim), seed_(hash_seed) {}

std::string FallbackProvider::provider_id() const {
  return "fallback-" + std::string(kLexiconVersion) + "-dim" + std::to_string(dim_) + "-seed" + std::to_string(seed_);
}

std::string FallbackProvider::rate(std::string_view text, Granularity granularity) {
  return shortest(lexicon_fallback_score(text, granularity).value);
}

std::vector<double> FallbackProvider::embed(std::string_view text) { return hashing_embedding(text, dim_, seed_); }

// --- cache ---------------------------------------------------------------

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) {
    std::ifstream in(*path_);
    if (!in) fail(Errc::IoError, "cannot read cache " + path_->string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // a torn final line from an interrupted run is dropped
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("k")) continue;
      const std::string k = j["k"].get<std::string>();
      if (j.contains("s"))
        scores_[k] = j["s"].get<double>();
      else if (j.contains("e"))
        embeddings_[k] = j["e"].get<std::vector<double>>();
    }
  }
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  // compact: rewrite the deduplicated records in key order, then swap in
  std::vector<std::string> lines;
  for (const auto& [k, v] : scores_) lines.push_back(json{{"k", k}, {"s", v}}.dump());
  for (const auto& [k, v] : embeddings_) lines.push_back(json{{"k", k}, {"e", v}}.dump());
  std::sort(lines.begin(), lines.end());
  const auto tmp = std::filesystem::path(path_->string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write cache " + tmp.string());
    for (const auto& l : lines) out << l << '\n';
  }
  std::filesystem::rename(tmp, *path_);
  log_.open(*path_, std::ios::app);
  if (!log_) fail(Errc::IoError, "cannot append to cache " + path_->string());
}

std::string ScoreCache::key(std::string_view cache_namespace, std::string_view kind, std::string_view text) {
  std::string material;
  material.reserve(cache_namespace.size() + kind.size() + text.size() + 2);
  material.append(cache_namespace).push_back('\x1f');
  material.append(kind).push_back('\x1f');
  material.append(text);
  return sha256_hex(material);
}

std::optional<double> ScoreCache::find_score(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = scores_.find(key);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<double>> ScoreCache::find_embedding(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = embeddings_.find(key);
  if (it == embeddings_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::put_score(const std::string& key, double value) {
  std::lock_guard lock(mu_);
  scores_[key] = value;
  if (path_) append(json{{"k", key}, {"s", value}}.dump());
}

void ScoreCache::put_embedding(const std::string& key, const std::vector<double>& values) {
  std::lock_guard lock(mu_);
  embeddings_[key] = values;
  if (path_) append(json{{"k", key}, {"e", values}}.dump());
}

std::size_t ScoreCache::size() const {
  std::lock_guard lock(mu_);
  return scores_.size() + embeddings_.size();
}

void ScoreCache::append(const std::string& line) {
  log_ << line << '\n';
  log_.flush();
  if (!log_) fail(Errc::IoError, "cache append failed for " + path_->string());
}

// --- scorer --------------------------------------------------------------

Scorer::Scorer(SentimentProvider& provider, ScoreCache* cache) : provider_(provider), cache_(cache) {
  if (!provider_.deterministic() && !cache_)
    fail(Errc::RemoteNondeterminism,
         "provider '" + provider_.provider_id() + "' is not deterministic; scoring requires a cache");
}

SentimentScore Scorer::score_text(std::string_view text, Granularity granularity) {
  if (blank(text)) fail(Errc::EmptyText, "cannot score empty text");
  const std::string key =
      ScoreCache::key(provider_.cache_namespace(), std::string("score:") + std::string(to_string(granularity)), text);
  SentimentScore out;
  out.granularity = granularity;
  out.provider_id = provider_.provider_id();
  if (cache_) {
    if (auto hit = cache_->find_score(key)) {
      ++cache_hits_;
      out.value = *hit;
      return out;
    }
  }
  std::string reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++provider_calls_;
    reply = provider_.rate(text, granularity);
    if (auto v = parse_score_reply(reply)) {
      out.value = *v;
      if (cache_) cache_->put_score(key, *v);
      return out;
    }
  }
  fail(Errc::UnparseableScore, "provider reply is not a score in [0,10] after one retry", reply);
}

EmbeddingVector Scorer::embed(std::string_view text) {
  if (blank(text)) fail(Errc::EmptyText, "cannot embed empty text");
  if (!provider_.supports_embedding())
    fail(Errc::ProviderUnavailable, "provider '" + provider_.provider_id() + "' has no embedding capability");
  const std::string key = ScoreCache::key(provider_.cache_namespace(), "embedding", text);
  EmbeddingVector out;
  out.provider_id = provider_.provider_id();
  bool hit = false;
  if (cache_) {
    if (auto cached = cache_->find_embedding(key)) {
      ++cache_hits_;
      out.values = std::move(*cached);
      hit = true;
    }
  }
  if (!hit) {
    ++provider_calls_;
    out.values = provider_.embed(text);
    for (double v : out.values)
      if (!std::isfinite(v)) fail(Errc::NonFinite, "provider returned a non-finite embedding entry");
  }
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, out.values.size()) && expected != out.values.size())
    fail(Errc::DimensionMismatch,
         "embedding dimension changed from " + std::to_string(expected) + " to " + std::to_string(out.values.size()));
  if (!hit && cache_) cache_->put_embedding(key, out.values);
  return out;
}

Conversation score_utterances(const Conversation& conversation, Scorer& scorer) {
  Conversation out = conversation;
  for (auto& u : out.utterances) {
    if (u.role == Role::topic_prompt) continue;
    u.sentiment = scorer.score_text(u.text, Granularity::utterance).value;
  }
  return out;
}

std::pair<SentimentScore, SentimentScore> score_conversation_roles(const Conversation& conversation, Scorer& scorer) {
  std::string user, bot;
  for (const auto& u : conversation.utterances) {
    std::string* doc = u.role == Role::user ? &user : u.role == Role::chatbot ? &bot : nullptr;
    if (!doc) continue;
    if (!doc->empty()) doc->push_back('\n');
    doc->append(u.text);
  }
  if (user.empty() || bot.empty())
    fail(Errc::MissingRole, "conversation '" + conversation.id + "' lacks a user or chatbot utterance");
  return {scorer.score_text(user, Granularity::conversation_role),
          scorer.score_text(bot, Granularity::conversation_role)};
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, Scorer& scorer) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(scorer.embed(t));
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(Errc::DimensionMismatch,
         "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) fail(Errc::ZeroVector, "cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Corpus score_corpus(const Corpus& corpus, Scorer& scorer, const ScoreCorpusOptions& options) {
  Corpus out = corpus;
  parallel_for(out.conversations.size(), options.jobs, [&](std::size_t i) {
    Conversation& c = out.conversations[i];
    if (options.utterances) {
      for (auto& u : c.utterances) {
        if (u.role == Role::topic_prompt || (u.sentiment && !options.rescore)) continue;
        u.sentiment = scorer.score_text(u.text, Granularity::utterance).value;
      }
    }
    if (options.conversation_roles && c.condition == Condition::chatbot &&
        (options.rescore || !c.user_role_sentiment || !c.chatbot_role_sentiment)) {
      bool has_user = false, has_bot = false;
      for (const auto& u : c.utterances) {
        has_user |= u.role == Role::user;
        has_bot |= u.role == Role::chatbot;
      }
      if (has_user && has_bot) {
        auto [user, bot] = score_conversation_roles(c, scorer);
        c.user_role_sentiment = user.value;
        c.chatbot_role_sentiment = bot.value;
      }
    }
  });
  out.provenance["sentiment_provider"] = scorer.provider().provider_id();
  return out;
}

}  // namespace wbl
