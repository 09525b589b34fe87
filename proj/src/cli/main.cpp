#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "wbl/wbl.h"

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int report_failure(wbl_status s) {
  std::cerr << "wbl: " << wbl_last_error_code() << ": " << wbl_last_error_message();
  const std::string detail = wbl_last_error_detail();
  if (!detail.empty()) std::cerr << " [" << detail << "]";
  std::cerr << "\n";
  return wbl_exit_code(s);
}

// The file named by WBL_CONFIG, or an empty object.
std::optional<json> base_config() {
  const char* path = std::getenv("WBL_CONFIG");
  if (!path || !*path) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "wbl: ConfigError: cannot read WBL_CONFIG file " << path << "\n";
    return std::nullopt;
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::cerr << "wbl: ConfigError: WBL_CONFIG file " << path << " is not a JSON object\n";
    return std::nullopt;
  }
  return j;
}

struct Flags {
  std::string corpus, provider, out, analyses, host, log;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<int> port;
  bool include_partial = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--corpus", f.corpus, "Corpus file (or a service event log)");
  cmd->add_option("--provider", f.provider, "Sentiment/chat provider")->check(CLI::IsMember({"fallback", "remote"}));
  cmd->add_option("--seed", f.seed, "Seed for permutation tests and cross-validation");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--analyses", f.analyses, std::string("Comma-separated subset of: ") + wbl_analysis_ids());
  cmd->add_flag("--include-partial", f.include_partial, "Export unfinished sessions too");
}

json merged(json cfg, const Flags& f) {
  if (!f.corpus.empty()) cfg["corpus"] = f.corpus;
  if (!f.provider.empty()) cfg["provider"] = f.provider;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.jobs) cfg["jobs"] = *f.jobs;
  if (!f.out.empty()) cfg["out"] = f.out;
  if (!f.analyses.empty()) cfg["analyses"] = f.analyses;
  if (f.include_partial) cfg["include_partial"] = true;
  if (!f.host.empty()) cfg["serve"]["host"] = f.host;
  if (f.port) cfg["serve"]["port"] = *f.port;
  if (!f.log.empty()) cfg["serve"]["log"] = f.log;
  return cfg;
}

int serve(const json& cfg) {
  wbl_server* server = nullptr;
  const wbl_status s = wbl_server_create(cfg.dump().c_str(), &server);
  if (s != WBL_OK) return report_failure(s);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "wbl " << wbl_version() << " serving on port " << wbl_server_port(server) << "\n";
  std::thread watcher([server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    wbl_server_stop(server);
  });
  const wbl_status r = wbl_server_run(server);
  g_stop = true;
  watcher.join();
  wbl_server_free(server);
  return r == WBL_OK ? 0 : report_failure(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Happiness study toolkit: serve the experiment, score and analyze corpora"};
  app.set_version_flag("--version", std::string(wbl_version()));
  app.require_subcommand(1);

  Flags flags;
  const char* commands[][2] = {
      {"ingest", "Validate and fingerprint a corpus (or export a service event log)"},
      {"score", "Fill missing sentiments; cached and resumable"},
      {"analyze", "Run analyses and write analysis.jsonl"},
      {"report", "Run analyses (or read a report) and write report.jsonl and report.txt"},
      {"simulate", "Cross-validate, simulate happiness and rerun the interaction analyses"},
      {"serve", "Run the study service over HTTP"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    if (std::string(name) == "serve") {
      cmd->add_option("--host", flags.host, "Bind address");
      cmd->add_option("--port", flags.port, "Port (0 picks a free one)");
      cmd->add_option("--log", flags.log, "Event log path");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto base = base_config();
  if (!base) return 1;
  const json cfg = merged(*base, flags);
  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "serve") return serve(cfg);

  char* out = nullptr;
  const wbl_status s = wbl_run(command.c_str(), cfg.dump().c_str(), &out);
  if (out) {
    std::cout << json::parse(out).dump(2) << "\n";
    wbl_string_free(out);
  }
  return s == WBL_OK ? 0 : report_failure(s);
}
