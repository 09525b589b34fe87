#include "wbl/service/http.hpp"

#include "httplib.h"
#include "wbl/error.hpp"

namespace wbl::service {

using nlohmann::json;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::NotFound: return 404;
    case Errc::Unauthorized: return 401;
    case Errc::UpstreamFailure: return 502;
    case Errc::ConversationOver:
    case Errc::NoActiveConversation:
    case Errc::TooEarly:
    case Errc::WrongCondition:
    case Errc::WrongPhase:
    case Errc::ActiveSessions:
    case Errc::ReplyPending: return 409;
    default: break;
  }
  switch (errc_category(code)) {
    case ErrorCategory::upstream: return 502;
    case ErrorCategory::io:
    case ErrorCategory::config: return 500;
    default: return 400;
  }
}

json error_body(const Error& e) {
  return {{"code", e.name()}, {"message", e.what()}, {"detail", e.detail()}};
}

struct HttpServer::Impl {
  StudyService& service;
  std::string admin_token;
  httplib::Server server;

  Impl(StudyService& s, std::string token) : service(s), admin_token(std::move(token)) {}
};

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(Errc::InvalidArgument, "request body must be a JSON object");
  return j;
}

template <typename T>
std::optional<T> field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(Errc::InvalidArgument, std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T required(const json& body, const char* name) {
  auto v = field<T>(body, name);
  if (!v) fail(Errc::InvalidArgument, std::string("field '") + name + "' is required");
  return *v;
}

// Runs a handler, turning library errors into structured bodies.
template <typename Fn>
auto guarded(Fn fn, int ok = 200) {
  return [fn, ok](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, ok, fn(req));
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(e));
    } catch (const std::exception& e) {
      send(res, 500, {{"code", "InternalError"}, {"message", e.what()}, {"detail", ""}});
    }
  };
}

}  // namespace

HttpServer::HttpServer(StudyService& service, std::string admin_token)
    : impl_(std::make_unique<Impl>(service, std::move(admin_token))) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  const std::string sid = R"(/sessions/([A-Za-z0-9_-]+))";

  srv.Post("/sessions", guarded(
                            [&svc](const httplib::Request& req) {
                              const json body = parse_body(req);
                              return svc.create_session(required<std::string>(body, "condition"),
                                                        field<std::uint64_t>(body, "seed"));
                            },
                            201));
  srv.Get(sid, guarded([&svc](const httplib::Request& req) { return svc.snapshot(req.matches[1]); }));
  srv.Post(sid + "/messages", guarded([&svc](const httplib::Request& req) {
             const json body = parse_body(req);
             const std::string id = req.matches[1];
             json utterance = svc.post_chat_message(id, field<std::string>(body, "text"),
                                                    field<std::string>(body, "retry_token"));
             return json{{"reply", utterance}, {"session", svc.snapshot(id)}};
           }));
  srv.Post(sid + "/journal", guarded([&svc](const httplib::Request& req) {
             const json body = parse_body(req);
             const std::string id = req.matches[1];
             json utterance = svc.submit_journal_entry(id, required<std::string>(body, "text"));
             return json{{"entry", utterance}, {"session", svc.snapshot(id)}};
           }));
  srv.Post(sid + "/end", guarded([&svc](const httplib::Request& req) { return svc.end_conversation(req.matches[1]); }));
  srv.Post(sid + "/happiness", guarded([&svc](const httplib::Request& req) {
             const json body = parse_body(req);
             return svc.submit_happiness(req.matches[1], required<double>(body, "rating"));
           }));
  srv.Post(sid + "/survey", guarded([&svc](const httplib::Request& req) {
             const json body = parse_body(req);
             return svc.submit_survey(req.matches[1], body.contains("payload") ? body["payload"] : json::object());
           }));
  srv.Post(sid + "/warnings/ack", guarded([&svc](const httplib::Request& req) {
             const json body = parse_body(req);
             return svc.acknowledge_warning(req.matches[1], required<std::int64_t>(body, "mark_ms"));
           }));
  srv.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string auth = req.get_header_value("Authorization");
      if (impl_->admin_token.empty() || auth != "Bearer " + impl_->admin_token)
        fail(Errc::Unauthorized, "admin token required");
      const std::string partial = req.get_param_value("include_partial");
      const bool include_partial = partial == "1" || partial == "true";
      res.status = 200;
      res.set_content(wbl::export_corpus(impl_->service.export_corpus(include_partial)), "application/x-ndjson");
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(e));
    }
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send(res, res.status, {{"code", "NotFound"}, {"message", "no such route"}, {"detail", ""}});
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace wbl::service
