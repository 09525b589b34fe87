#include <cstdlib>
#include <cstring>
#include <string>

#include "wbl/app.hpp"
#include "wbl/wbl.h"

using nlohmann::json;

struct wbl_corpus {
  wbl::Corpus corpus;
};

struct wbl_server {
  std::unique_ptr<wbl::app::Server> server;
};

namespace {

thread_local std::string g_code, g_message, g_detail;

wbl_status status_of(wbl::ErrorCategory c) {
  switch (c) {
    case wbl::ErrorCategory::config: return WBL_ERR_CONFIG;
    case wbl::ErrorCategory::data: return WBL_ERR_DATA;
    case wbl::ErrorCategory::upstream: return WBL_ERR_UPSTREAM;
    case wbl::ErrorCategory::state: return WBL_ERR_STATE;
    case wbl::ErrorCategory::io: return WBL_ERR_IO;
    case wbl::ErrorCategory::argument: return WBL_ERR_ARGUMENT;
  }
  return WBL_ERR_INTERNAL;
}

wbl_status set_error(wbl_status s, std::string code, std::string message, std::string detail = {}) {
  g_code = std::move(code);
  g_message = std::move(message);
  g_detail = std::move(detail);
  return s;
}

template <typename Fn>
wbl_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const wbl::Error& e) {
    return set_error(status_of(wbl::errc_category(e.code())), std::string(e.name()), e.what(), e.detail());
  } catch (const json::exception& e) {
    return set_error(WBL_ERR_CONFIG, "ConfigError", e.what());
  } catch (const std::bad_alloc&) {
    return set_error(WBL_ERR_INTERNAL, "Internal", "out of memory");
  } catch (const std::exception& e) {
    return set_error(WBL_ERR_INTERNAL, "Internal", e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

wbl::app::RunConfig config_from(const char* config_json) {
  if (!config_json || !*config_json) return wbl::app::RunConfig::from_json(json::object());
  json j = json::parse(config_json, nullptr, false);
  if (j.is_discarded()) wbl::fail(wbl::Errc::ConfigError, "configuration is not valid JSON");
  return wbl::app::RunConfig::from_json(j);
}

wbl_status null_arg(const char* name) {
  return set_error(WBL_ERR_ARGUMENT, "InvalidArgument", std::string(name) + " is NULL");
}

}  // namespace

extern "C" {

const char* wbl_version(void) { return WBL_VERSION; }
const char* wbl_last_error_code(void) { return g_code.c_str(); }
const char* wbl_last_error_message(void) { return g_message.c_str(); }
const char* wbl_last_error_detail(void) { return g_detail.c_str(); }

int wbl_exit_code(wbl_status status) {
  switch (status) {
    case WBL_OK: return 0;
    case WBL_ERR_DATA:
    case WBL_ERR_STATE: return 2;
    case WBL_ERR_UPSTREAM: return 3;
    default: return 1;
  }
}

void wbl_string_free(char* s) { std::free(s); }

wbl_status wbl_corpus_load(const char* path, wbl_corpus** out) {
  if (!path || !out) return null_arg("path/out");
  *out = nullptr;
  return guarded([&] {
    *out = new wbl_corpus{wbl::load_corpus(path)};
    return WBL_OK;
  });
}

wbl_status wbl_corpus_parse(const char* text, size_t length, wbl_corpus** out) {
  if (!text || !out) return null_arg("text/out");
  *out = nullptr;
  return guarded([&] {
    *out = new wbl_corpus{wbl::parse_corpus(std::string_view(text, length))};
    return WBL_OK;
  });
}

void wbl_corpus_free(wbl_corpus* corpus) { delete corpus; }

wbl_status wbl_corpus_export(const wbl_corpus* corpus, char** out) {
  if (!corpus || !out) return null_arg("corpus/out");
  return guarded([&] {
    *out = dup(wbl::export_corpus(corpus->corpus));
    return WBL_OK;
  });
}

wbl_status wbl_corpus_fingerprint(const wbl_corpus* corpus, char** out) {
  if (!corpus || !out) return null_arg("corpus/out");
  return guarded([&] {
    *out = dup(wbl::corpus_fingerprint(corpus->corpus));
    return WBL_OK;
  });
}

wbl_status wbl_corpus_summary(const wbl_corpus* corpus, char** out_json) {
  if (!corpus || !out_json) return null_arg("corpus/out_json");
  return guarded([&] {
    const auto& c = corpus->corpus;
    std::size_t journal = 0, rated = 0;
    for (const auto& conv : c.conversations) {
      if (conv.condition == wbl::Condition::journal) ++journal;
      if (conv.happiness_post) ++rated;
    }
    const json j{{"topics", c.topics.size()},
                 {"participants", c.participants.size()},
                 {"conversations", c.conversations.size()},
                 {"journal_conversations", journal},
                 {"chatbot_conversations", c.conversations.size() - journal},
                 {"rated_conversations", rated},
                 {"fingerprint", wbl::corpus_fingerprint(c)}};
    *out_json = dup(j.dump());
    return WBL_OK;
  });
}

wbl_status wbl_corpus_analyze(const wbl_corpus* corpus, const char* config_json, char** out_report) {
  if (!corpus || !out_report) return null_arg("corpus/out_report");
  *out_report = nullptr;
  return guarded([&] {
    const auto cfg = config_from(config_json);
    *out_report = dup(wbl::report::to_jsonl(wbl::app::analyze(corpus->corpus, cfg)));
    return WBL_OK;
  });
}

wbl_status wbl_run(const char* command, const char* config_json, char** out_json) {
  if (!command || !out_json) return null_arg("command/out_json");
  *out_json = nullptr;
  return guarded([&] {
    const auto cfg = config_from(config_json);
    const json summary = wbl::app::run(command, cfg);
    *out_json = dup(summary.dump());
    if (summary.contains("failed") && !summary["failed"].empty())
      return set_error(WBL_ERR_DATA, "AnalysisFailed", "some analyses could not be computed",
                       summary["failed"].dump());
    return WBL_OK;
  });
}

const char* wbl_analysis_ids(void) {
  static const std::string ids = [] {
    std::string s;
    for (const auto& id : wbl::app::analysis_ids()) s += (s.empty() ? "" : ",") + id;
    return s;
  }();
  return ids.c_str();
}

wbl_status wbl_server_create(const char* config_json, wbl_server** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto cfg = config_from(config_json);
    *out = new wbl_server{std::make_unique<wbl::app::Server>(cfg)};
    return WBL_OK;
  });
}

int wbl_server_port(const wbl_server* server) { return server ? server->server->port() : -1; }

wbl_status wbl_server_run(wbl_server* server) {
  if (!server) return null_arg("server");
  return guarded([&] {
    server->server->run();
    return WBL_OK;
  });
}

void wbl_server_stop(wbl_server* server) {
  if (server) server->server->stop();
}

void wbl_server_free(wbl_server* server) { delete server; }

}  // extern "C"
