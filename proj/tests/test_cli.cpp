// Runs the wbl binary as a subprocess.
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

extern char** environ;

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kGoldenDir = std::string(WBL_TEST_DATA_DIR) + "/golden";

struct Result {
  int code = -1;
  std::string out;
};

// Runs a shell command line, capturing stdout; stderr goes to `err` if given.
Result sh(const std::string& cmd, const std::string& err = "/dev/null") {
  Result r;
  FILE* p = ::popen((cmd + " 2>" + err).c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string wbl(const std::string& args) { return std::string("'") + WBL_CLI + "' " + args; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("wbl_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("usage and argument errors") {
  const Result v = sh(wbl("--version"));
  CHECK(v.code == 0);
  CHECK(v.out.find("0.3.0") != std::string::npos);
  CHECK(sh(wbl("")).code == 1);
  CHECK(sh(wbl("analyze --frobnicate")).code == 1);
  CHECK(sh(wbl("score --provider oracle")).code == 1);
  CHECK(sh(wbl("--help")).code == 0);
}

TEST_CASE("golden report") {
  TempDir dir("golden");
  const Result r = sh(wbl("report --corpus '" + kGoldenDir + "/corpus.jsonl' --seed 7 --out '" + dir / "o" + "'"));
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "o/report.txt") == slurp(kGoldenDir + "/report.txt"));
  CHECK(slurp(dir / "o/report.jsonl") == slurp(kGoldenDir + "/report.jsonl"));
  const json summary = json::parse(r.out);
  CHECK(summary["failed"].empty());
}

TEST_CASE("golden corpus round trip through ingest") {
  TempDir dir("ingest");
  const Result r = sh(wbl("ingest --corpus '" + kGoldenDir + "/corpus.jsonl' --out '" + dir.path.string() + "'"));
  REQUIRE(r.code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["counts"]["participants"] == 60);
  CHECK(summary["corpus_fingerprint"].get<std::string>().size() == 64);
}

TEST_CASE("score twice makes no provider calls the second time") {
  TempDir dir("score");
  REQUIRE(sh(std::string("'") + WBL_SYNTH + "' --seed 9 --journal 6 --chatbot 9 --sentiments none --out '" +
             dir / "raw.jsonl" + "'")
              .code == 0);
  const std::string cmd = wbl("score --provider fallback --corpus '" + dir / "raw.jsonl" + "' --out '" +
                              dir.path.string() + "' --jobs 2");
  const Result first = sh(cmd);
  REQUIRE(first.code == 0);
  CHECK(json::parse(first.out)["provider_calls"].get<int>() > 0);
  const std::string scored = slurp(dir / "scored_corpus.jsonl");
  const Result second = sh(cmd);
  REQUIRE(second.code == 0);
  CHECK(json::parse(second.out)["provider_calls"] == 0);
  CHECK(slurp(dir / "scored_corpus.jsonl") == scored);
}

TEST_CASE("analyze twice is byte identical") {
  TempDir dir("analyze");
  const std::string cmd = wbl("analyze --corpus '" + kGoldenDir + "/corpus.jsonl' --seed 7 --jobs 3 --out '");
  REQUIRE(sh(cmd + dir / "a" + "'").code == 0);
  REQUIRE(sh(cmd + dir / "b" + "'").code == 0);
  const std::string a = slurp(dir / "a/analysis.jsonl");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir / "b/analysis.jsonl"));
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  const std::string golden = "'" + kGoldenDir + "/corpus.jsonl'";
  // config: missing seed, bad config file
  CHECK(sh(wbl("simulate --corpus " + golden + " --out '" + dir.path.string() + "'")).code == 1);
  {
    std::ofstream(dir / "bad.json") << R"({"provder": "fallback"})";
    CHECK(sh("WBL_CONFIG='" + dir / "bad.json" + "' " + wbl("ingest --corpus " + golden)).code == 1);
    CHECK(sh("WBL_CONFIG='" + dir / "missing.json" + "' " + wbl("ingest --corpus " + golden)).code == 1);
  }
  // data: malformed corpus
  std::ofstream(dir / "broken.jsonl") << "#wbl-corpus v1\n{\"type\":\"participant\",\"id\":\n";
  const std::string errfile = dir / "stderr.txt";
  CHECK(sh(wbl("ingest --corpus '" + dir / "broken.jsonl" + "' --out '" + dir.path.string() + "'"), errfile).code == 2);
  CHECK(slurp(errfile).find("MalformedRecord") != std::string::npos);
  // upstream: the remote provider cannot be reached
  std::ofstream(dir / "remote.json") << R"({"provider": "remote", "llm": {"base_url": "http://127.0.0.1:9", "timeout_ms": 500}})";
  REQUIRE(sh(std::string("'") + WBL_SYNTH + "' --seed 1 --journal 2 --chatbot 2 --sentiments none --out '" +
             dir / "raw.jsonl" + "'")
              .code == 0);
  CHECK(sh("WBL_LLM_API_KEY=x WBL_CONFIG='" + dir / "remote.json" + "' " +
           wbl("score --corpus '" + dir / "raw.jsonl" + "' --out '" + dir / "r" + "'"))
            .code == 3);
  // config: remote without a key
  CHECK(sh("WBL_LLM_API_KEY= WBL_CONFIG='" + dir / "remote.json" + "' " +
           wbl("score --corpus '" + dir / "raw.jsonl" + "' --out '" + dir / "r" + "'"))
            .code == 1);
}

TEST_CASE("serve answers over http and stops on SIGTERM") {
  TempDir dir("serve");
  const std::string err = dir / "stderr.txt";
  const std::string out = dir.path.string();
  std::vector<std::string> args = {WBL_CLI, "serve", "--port", "0", "--out", out};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 2, err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  ::setenv("WBL_ADMIN_TOKEN", "tok", 1);
  pid_t pid = 0;
  REQUIRE(posix_spawn(&pid, WBL_CLI, &fa, nullptr, argv.data(), environ) == 0);
  ::unsetenv("WBL_ADMIN_TOKEN");
  posix_spawn_file_actions_destroy(&fa);

  int port = 0;
  const std::regex re("port (\\d+)");
  for (int i = 0; i < 200 && !port; ++i) {
    std::smatch m;
    const std::string log = slurp(err);
    if (std::regex_search(log, m, re)) port = std::stoi(m[1]);
    else std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  REQUIRE(port > 0);
  httplib::Client c("127.0.0.1", port);
  auto r = c.Post("/sessions", R"({"condition":"chatbot","seed":1})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  auto e = c.Get("/export?include_partial=1", {{"Authorization", "Bearer tok"}});
  REQUIRE(e);
  CHECK(e->status == 200);

  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::file_size(dir.path / "events.jsonl") > 0);
}
