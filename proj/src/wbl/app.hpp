#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wbl/remote.hpp"
#include "wbl/report.hpp"
#include "wbl/sentiment.hpp"
#include "wbl/service/chat.hpp"
#include "wbl/service/session.hpp"

// Operator commands: ingest, score, analyze, report, simulate, serve.
namespace wbl::app {

std::string_view version() noexcept;

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log;  // event log; default <out>/events.jsonl
  int tick_ms = 250;
  std::uint64_t seed = 0;
  service::TimerPolicy timers;
  std::string admin_token;  // WBL_ADMIN_TOKEN
};

struct RunConfig {
  std::string corpus;
  std::string provider = "fallback";  // fallback | remote
  std::optional<std::uint64_t> seed;
  std::vector<std::string> analyses;  // empty selects every analysis
  std::string out = ".";
  unsigned jobs = 1;
  bool include_partial = false;
  std::string cache;  // score cache; default <out>/score_cache.jsonl
  int n_perms = 1000;
  std::size_t cv_folds = 3;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  RemoteSentimentConfig remote;  // api key from WBL_LLM_API_KEY
  service::RemoteChatConfig chat;
  ServeConfig serve;

  // Keys mirror the long flag names; "llm" and "serve" are nested objects.
  // Unknown keys and wrong types are ConfigError.
  static RunConfig from_json(const nlohmann::json& j);

  // Settings that can change a result. Paths, job count and secrets are
  // left out, so the same analysis of the same corpus hashes the same
  // wherever it runs.
  nlohmann::json snapshot() const;
  std::string hash() const;
  std::filesystem::path cache_path() const;
};

// Every analysis id, in report order.
const std::vector<std::string>& analysis_ids();
bool needs_seed(std::string_view analysis);
bool needs_provider(std::string_view analysis);

// Runs the selected analyses (up to cfg.jobs at a time). A failing analysis
// is recorded with its error; the others still run.
report::AnalysisReport analyze(const Corpus& corpus, const RunConfig& cfg, std::string_view command = "analyze");

// Out-of-fold simulation and the observed-vs-simulated reruns.
report::AnalysisReport simulate(const Corpus& corpus, const RunConfig& cfg);

// Each returns a JSON summary and writes its artifacts under cfg.out.
nlohmann::json run_ingest(const RunConfig& cfg);
nlohmann::json run_score(const RunConfig& cfg);
nlohmann::json run_analyze(const RunConfig& cfg);
nlohmann::json run_report(const RunConfig& cfg);
nlohmann::json run_simulate(const RunConfig& cfg);
// Dispatches every command except serve.
nlohmann::json run(std::string_view command, const RunConfig& cfg);

// Corpus file, or a service event log which is replayed and exported.
Corpus load_input(const RunConfig& cfg);

// temp file in the same directory, then rename
void write_atomic(const std::filesystem::path& path, std::string_view content);

// 1 config, 2 data, 3 upstream provider
int exit_code(ErrorCategory category) noexcept;

// Study service plus its HTTP front end.
class Server {
 public:
  explicit Server(const RunConfig& cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const noexcept;
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wbl::app
