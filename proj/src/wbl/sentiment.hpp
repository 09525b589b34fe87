#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wbl/corpus.hpp"

namespace wbl {

enum class Granularity { utterance, conversation_role };

std::string_view to_string(Granularity g) noexcept;

struct SentimentScore {
  double value = 5.0;
  Granularity granularity = Granularity::utterance;
  std::string provider_id;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;

  std::size_t dimension() const noexcept { return values.size(); }
};

inline constexpr std::size_t kDefaultEmbeddingDim = 3072;
inline constexpr std::string_view kLexiconVersion = "lexicon-v1";

// Rater/embedder behind the scoring pipeline. rate() returns the raw reply so
// the pipeline can apply one parse/range policy to every provider.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;

  virtual std::string provider_id() const = 0;
  // Everything besides the text that changes the answer (prompt template,
  // model parameters); part of the cache key.
  virtual std::string cache_namespace() const { return provider_id(); }
  // Non-deterministic providers may only be used with a cache.
  virtual bool deterministic() const { return true; }
  virtual bool supports_embedding() const { return true; }

  virtual std::string rate(std::string_view text, Granularity granularity) = 0;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

// Offline provider: lexicon scores and signed feature-hashing embeddings.
class FallbackProvider final : public SentimentProvider {
 public:
  explicit FallbackProvider(std::size_t embedding_dim = kDefaultEmbeddingDim, std::uint64_t hash_seed = 0);

  std::string provider_id() const override;
  std::string rate(std::string_view text, Granularity granularity) override;
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

const std::map<std::string, double>& fallback_lexicon();

// 5 + 5 * (sum of lexicon weights / token count), clamped to [0,10]; text
// with no lexicon token scores exactly 5.
SentimentScore lexicon_fallback_score(std::string_view text, Granularity granularity = Granularity::utterance);

// Unit-normalized signed hashing of the token multiset into `dim` buckets.
std::vector<double> hashing_embedding(std::string_view text, std::size_t dim = kDefaultEmbeddingDim,
                                      std::uint64_t seed = 0);

// Parses a rater reply: a single real number in [0,10], optionally followed
// by a period. Anything else yields nullopt.
std::optional<double> parse_score_reply(std::string_view reply);

// Content-addressed store of scores and embeddings. With a path it is backed
// by an append-only log of JSON lines, compacted when opened.
class ScoreCache {
 public:
  ScoreCache() = default;
  explicit ScoreCache(std::filesystem::path path);

  static std::string key(std::string_view cache_namespace, std::string_view kind, std::string_view text);

  std::optional<double> find_score(const std::string& key) const;
  std::optional<std::vector<double>> find_embedding(const std::string& key) const;
  void put_score(const std::string& key, double value);
  void put_embedding(const std::string& key, const std::vector<double>& values);

  std::size_t size() const;
  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

 private:
  void append(const std::string& line);

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::ofstream log_;
  std::unordered_map<std::string, double> scores_;
  std::unordered_map<std::string, std::vector<double>> embeddings_;
};

// Provider plus cache plus the retry policy. Safe to share across threads.
class Scorer {
 public:
  explicit Scorer(SentimentProvider& provider, ScoreCache* cache = nullptr);

  SentimentScore score_text(std::string_view text, Granularity granularity);
  EmbeddingVector embed(std::string_view text);

  SentimentProvider& provider() noexcept { return provider_; }
  std::size_t provider_calls() const noexcept { return provider_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  SentimentProvider& provider_;
  ScoreCache* cache_;
  std::atomic<std::size_t> provider_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> dimension_{0};
};

// Scores every user and chatbot utterance; the topic prompt stays unscored.
Conversation score_utterances(const Conversation& conversation, Scorer& scorer);

// Newline-joined user text and chatbot text, scored separately.
std::pair<SentimentScore, SentimentScore> score_conversation_roles(const Conversation& conversation, Scorer& scorer);

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, Scorer& scorer);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(a.values, b.values);
}

struct ScoreCorpusOptions {
  bool utterances = true;
  bool conversation_roles = true;
  bool rescore = false;  // overwrite existing sentiments
  unsigned jobs = 1;
};

// Fills missing sentiments across the corpus. Conversations are independent,
// so `jobs` workers split them; the result does not depend on `jobs`.
Corpus score_corpus(const Corpus& corpus, Scorer& scorer, const ScoreCorpusOptions& options = {});

}  // namespace wbl
