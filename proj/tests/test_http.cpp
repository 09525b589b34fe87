#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "wbl/service/http.hpp"

using namespace wbl;
using namespace wbl::service;
using nlohmann::json;

namespace {

struct Server {
  ManualClock clock{1'000'000};
  OfflineChatProvider chat;
  StudyService svc;
  HttpServer http;
  int port = 0;
  std::thread thread;

  explicit Server(ServiceConfig cfg) : svc(std::move(cfg), chat, clock), http(svc, "secret") {
    port = http.bind("127.0.0.1", 0);
    thread = std::thread([this] { http.listen(); });
    svc.start_ticker();
  }
  ~Server() {
    svc.stop_ticker();
    http.stop();
    thread.join();
  }
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
  auto r = c.Post(path, body.dump(), "application/json");
  REQUIRE(r);
  CHECK_MESSAGE(r->status == expect, path, " -> ", r->body);
  return json::parse(r->body);
}

json get(httplib::Client& c, const std::string& path, int expect = 200) {
  auto r = c.Get(path);
  REQUIRE(r);
  CHECK(r->status == expect);
  return json::parse(r->body);
}

}  // namespace

TEST_CASE("status mapping") {
  CHECK(http_status(Errc::NotFound) == 404);
  CHECK(http_status(Errc::Unauthorized) == 401);
  CHECK(http_status(Errc::UpstreamFailure) == 502);
  CHECK(http_status(Errc::TooEarly) == 409);
  CHECK(http_status(Errc::WrongPhase) == 409);
  CHECK(http_status(Errc::OutOfRange) == 400);
  const json body = error_body(Error(Errc::TooEarly, "wait", "1000"));
  CHECK(body == json{{"code", "TooEarly"}, {"message", "wait"}, {"detail", "1000"}});
}

TEST_CASE("headless client drives a chatbot session") {
  ServiceConfig cfg;
  cfg.tick_ms = 20;
  Server s(cfg);
  httplib::Client c("127.0.0.1", s.port);

  CHECK(post(c, "/sessions", {{"condition", "robot"}}, 400)["code"] == "UnknownCondition");
  CHECK(get(c, "/sessions/nope", 404)["code"] == "NotFound");
  CHECK(get(c, "/no/such/route", 404)["code"] == "NotFound");

  const json created = post(c, "/sessions", {{"condition", "chatbot"}, {"seed", 9}}, 201);
  const std::string base = "/sessions/" + created["id"].get<std::string>();
  CHECK(post(c, base + "/messages", {{"text", "hi"}}, 409)["code"] == "WrongPhase");
  CHECK(post(c, base + "/survey", {{"payload", {{"age", 41}}}}, 200)["phase"] == "active_topic");
  CHECK(post(c, base + "/messages", json::object(), 400)["code"] == "InvalidArgument");

  const std::int64_t t0 = get(c, base)["current"]["started_at"];
  s.clock.set(t0 + 15'000);
  const json r = post(c, base + "/messages", {{"text", "Work has been stressful."}}, 200);
  CHECK(r["reply"]["role"] == "chatbot");
  CHECK(r["session"]["current"]["utterances"].size() == 3);

  s.clock.set(t0 + 200'000);
  const json early = post(c, base + "/end", json::object(), 409);
  CHECK(early["code"] == "TooEarly");
  CHECK(early["detail"] == "40000");

  // warnings arrive through polling and can be acknowledged
  s.clock.set(t0 + 241'000);
  json snap = get(c, base);
  CHECK(snap["clock"]["warnings_due"] == json::array({240'000}));
  CHECK(snap["clock"]["end_allowed"] == true);
  post(c, base + "/warnings/ack", {{"mark_ms", 240'000}}, 200);
  CHECK(get(c, base)["clock"]["warnings_due"].empty());
  CHECK(post(c, base + "/warnings/ack", {{"mark_ms", 300'000}}, 409)["code"] == "TooEarly");

  // hard stop: the ticker seals with no client request
  s.clock.set(t0 + 360'000);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  bool sealed = false;
  while (!sealed && std::chrono::steady_clock::now() < deadline) {
    for (const auto& e : s.svc.events())
      if (e.kind == "sealed") sealed = true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  CHECK(sealed);
  CHECK(post(c, base + "/messages", {{"text", "still there?"}}, 409)["code"] == "ConversationOver");
  CHECK(post(c, base + "/happiness", {{"rating", 101}}, 400)["code"] == "OutOfRange");
  CHECK(post(c, base + "/happiness", {{"rating", 72.5}}, 200)["topic_index"] == 1);

  // export is admin only
  auto denied = c.Get("/export");
  REQUIRE(denied);
  CHECK(denied->status == 401);
  httplib::Headers auth{{"Authorization", "Bearer secret"}};
  auto busy = c.Get("/export", auth);
  REQUIRE(busy);
  CHECK(busy->status == 409);
  auto partial = c.Get("/export?include_partial=1", auth);
  REQUIRE(partial);
  CHECK(partial->status == 200);
  const Corpus corpus = parse_corpus(partial->body);
  REQUIRE(corpus.conversations.size() == 1);
  CHECK(*corpus.conversations[0].happiness_post == 72.5);
  CHECK(corpus.conversations[0].ended_at - corpus.conversations[0].started_at == 360'000);
}

TEST_CASE("journal over http") {
  Server s(ServiceConfig{});
  httplib::Client c("127.0.0.1", s.port);
  const std::string base = "/sessions/" + post(c, "/sessions", {{"condition", "journal"}}, 201)["id"].get<std::string>();
  post(c, base + "/survey", json::object(), 200);
  const std::int64_t t0 = get(c, base)["current"]["started_at"];
  CHECK(post(c, base + "/journal", {{"text", ""}}, 400)["code"] == "EmptyText");
  s.clock.set(t0 + 61'000);
  const json r = post(c, base + "/journal", {{"text", "Today I went for a walk."}}, 200);
  CHECK(r["entry"]["timestamp"] == 61'000);
  CHECK(post(c, base + "/end", json::object(), 200)["phase"] == "rating");
  CHECK(post(c, base + "/happiness", {{"rating", "high"}}, 400)["code"] == "InvalidArgument");
}
