// Acceptance checks, one line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "wbl/analyses.hpp"
#include "wbl/corpus.hpp"
#include "wbl/dynamics.hpp"
#include "wbl/rng.hpp"
#include "wbl/spe_model.hpp"
#include "wbl/stats/regression.hpp"
#include "wbl/stats/tests.hpp"
#include "wbl/synth.hpp"
#include "wbl/service/http.hpp"
// after Eigen: resolv.h defines _res
#include "httplib.h"

using namespace wbl;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---- 1 ----------------------------------------------------------------

Conversation scripted(const std::string& id, Condition condition, const std::vector<double>& user) {
  Conversation c;
  c.id = id;
  c.participant_id = "p";
  c.topic_id = "gratitude";
  c.condition = condition;
  c.utterances.push_back({id, 0, Role::topic_prompt, "prompt", 0, std::nullopt});
  int idx = 1;
  for (double v : user) {
    c.utterances.push_back({id, idx, Role::user, "u", idx * 1000, v});
    ++idx;
    if (condition == Condition::chatbot) {
      c.utterances.push_back({id, idx, Role::chatbot, "b", idx * 1000, 5.0});
      ++idx;
    }
  }
  return c;
}

Outcome spe_extraction() {
  Outcome o;
  const auto worked = spe::compute_spe_features(scripted("w", Condition::chatbot, {7, 7}));
  o.require(worked.first == 2.0, "worked case first = " + num(worked.first));
  const auto six = spe::compute_spe_features(scripted("c", Condition::chatbot, {7, 6, 8, 9, 4, 9}));
  o.require(six.first == 2.0 && six.middle == -0.25 && six.last == 2.0,
            "n=6 gives (" + num(six.first) + ", " + num(six.middle) + ", " + num(six.last) + ")");
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double s = std::round(rng.uniform(0, 10) * 100) / 100;
    const auto j = spe::compute_spe_features(scripted("j", Condition::journal, {s}));
    if (j.first != s - 5.0 || j.middle != 0.0 || j.last != 0.0) {
      o.require(false, "journal entry " + num(s));
      break;
    }
  }
  if (o.pass) o.detail = "first +2; (2, -0.25, 2); journal middle = last = 0";
  return o;
}

// ---- 2 ----------------------------------------------------------------

Outcome regression_oracle() {
  Outcome o;
  Rng rng(2024);
  double worst = 0.0;
  int done = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t p = 1 + rng.below(6);
    const std::size_t n = std::max<std::size_t>(p + 2, 1 + rng.below(50));
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      cols[0][i] = 1.0;
      for (std::size_t j = 1; j < p; ++j) cols[j][i] = rng.normal(0.0, 1.0 + j);
      y[i] = rng.normal(3.0, 2.0);
      for (std::size_t j = 0; j < p; ++j) y[i] += (0.5 * j - 1.0) * cols[j][i];
    }
    stats::DesignMatrix X(n);
    for (std::size_t j = 0; j < p; ++j) X.add_column("x" + std::to_string(j), cols[j]);
    const auto fit = stats::ols_fit(X, y);
    const auto beta = oracle::normal_equations(cols, y);
    for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::fabs(fit.coefficients[j] - beta[j]));
    ++done;
  }
  o.require(done == 1000, "instances " + std::to_string(done));
  o.require(worst <= 1e-8, "max |diff| " + std::to_string(worst));
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "1000 instances, max |diff| %.2e", worst);
    o.detail = buf;
  }
  return o;
}

// ---- 3, 4, 5 ------------------------------------------------------------

synth::Config spe_generator(std::uint64_t seed, std::size_t chatbot, std::size_t journal = 0) {
  synth::Config c;
  c.seed = seed;
  c.journal_participants = journal;
  c.chatbot_participants = chatbot;
  c.covariates = false;
  c.role_scores = false;
  c.intercept = 60.0;
  c.happiness_sd = 10.0;
  return c;
}

std::vector<spe::SpeObservation> chatbot_rows(const Corpus& corpus) {
  return spe::complete_participants(spe::spe_dataset(corpus, Condition::chatbot));
}

Outcome parameter_recovery() {
  Outcome o;
  int ok[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto cfg = spe_generator(seed, 300);
    const auto rows = chatbot_rows(synth::generate(cfg));
    if (rows.size() != 900) {
      o.require(false, "rows " + std::to_string(rows.size()));
      return o;
    }
    const auto m = spe::fit_spe_model(rows, spe::Variant::three_weight);
    ok[0] += std::fabs(m.beta_first - cfg.beta_first) <= 3 * m.se_first;
    ok[1] += std::fabs(m.beta_middle - cfg.beta_middle) <= 3 * m.se_middle;
    ok[2] += std::fabs(m.beta_last - cfg.beta_last) <= 3 * m.se_last;
  }
  const char* names[3] = {"first", "middle", "last"};
  for (int k = 0; k < 3; ++k) {
    o.require(ok[k] >= 95, std::string(names[k]) + " " + std::to_string(ok[k]) + "/100");
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + "within 3 SE: first " + std::to_string(ok[0]) + ", middle " +
             std::to_string(ok[1]) + ", last " + std::to_string(ok[2]) + " of 100";
  return o;
}

// Two-sided exact binomial test of k successes in n at 1/2.
double sign_test_p(int k, int n) {
  auto log_choose = [](int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); };
  const int tail = std::min(k, n - k);
  double p = 0.0;
  for (int i = 0; i <= tail; ++i) p += std::exp(log_choose(n, i) - n * std::log(2.0));
  return std::min(1.0, 2.0 * p);
}

Outcome model_comparison() {
  Outcome o;
  int distinct_wins = 0, uniform_wins = 0;
  std::vector<double> gaps, rmses;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto rows = chatbot_rows(synth::generate(spe_generator(seed, 300)));
    const auto cv = spe::cross_validate(rows, 3, seed);
    distinct_wins += cv.rmse_three < cv.rmse_uniform;

    auto u = spe_generator(1000 + seed, 300);
    u.beta_first = u.beta_middle = u.beta_last = 1.2;
    const auto urows = chatbot_rows(synth::generate(u));
    const auto ucv = spe::cross_validate(urows, 3, seed);
    uniform_wins += ucv.rmse_three < ucv.rmse_uniform;
    gaps.push_back(ucv.rmse_three - ucv.rmse_uniform);
    rmses.push_back(ucv.rmse_uniform);
  }
  const double p = sign_test_p(uniform_wins, 100);
  o.require(distinct_wins >= 95, "distinct weights: three_weight better in " + std::to_string(distinct_wins) + "/100");
  o.require(p > 0.05, "uniform weights: sign test p = " + num(p, 4));
  o.detail = (o.pass ? "" : o.detail + "; ") + "distinct " + std::to_string(distinct_wins) +
             "/100; uniform generator three_weight better in " + std::to_string(uniform_wins) +
             "/100, sign test p = " + num(p, 4) + ", mean gap " + num(stats::mean(gaps), 4) + " (SD " +
             num(std::sqrt(stats::sample_variance(gaps)), 4) + ") on RMSE " + num(stats::mean(rmses), 2);
  return o;
}

Outcome journal_generalization() {
  Outcome o;
  auto cfg = spe_generator(77, 300, 60);
  cfg.happiness_sd = 5.0;
  cfg.mood_sd = 1.5;
  cfg.subject_sd = 0.0;
  const Corpus corpus = synth::generate(cfg);
  const auto model = spe::fit_spe_model(chatbot_rows(corpus), spe::Variant::three_weight);
  const auto g = spe::predict_journal_happiness(model, corpus);
  o.require(g.participants.size() == 60, "participants " + std::to_string(g.participants.size()));
  o.require(g.correlation.statistic > 0.9, "r = " + num(g.correlation.statistic));
  if (o.pass) o.detail = "r = " + num(g.correlation.statistic) + " over 60 journal participants";
  return o;
}

// ---- 6 ----------------------------------------------------------------

std::vector<dynamics::PairedConversation> simulate_var(std::uint64_t seed, std::size_t participants) {
  Rng rng(seed);
  std::vector<dynamics::PairedConversation> out;
  for (std::size_t p = 0; p < participants; ++p) {
    const std::string pid = "p" + std::to_string(p);
    for (int k = 0; k < 3; ++k) {
      const std::string id = pid + "-" + std::to_string(k);
      dynamics::PairedConversation pc{id, pid, "t", {}};
      const int n = 3 + static_cast<int>(rng.below(4));
      double u = rng.normal(5.0, 1.5), b = rng.normal(6.5, 1.0);
      for (int t = 1; t <= n; ++t) {
        pc.pairs.push_back({id, t, u, b});
        const double un = 2.5 + 0.21 * u + 0.35 * b + rng.normal(0.0, 1.0);
        const double bn = 3.8 + 0.18 * b + 0.35 * u + rng.normal(0.0, 0.7);
        u = un;
        b = bn;
      }
      out.push_back(std::move(pc));
    }
  }
  return out;
}

Outcome cross_lagged_recovery() {
  Outcome o;
  int ok[4] = {0, 0, 0, 0};
  double z_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto fit = dynamics::cross_lagged_fit(simulate_var(seed, 300), Corpus{});
    const auto& um = fit.user_model;
    const auto& cm = fit.chatbot_model;
    ok[0] += std::fabs(um.coef("user_lag") - 0.21) <= 3 * um.se("user_lag");
    ok[1] += std::fabs(um.coef("chatbot_lag") - 0.35) <= 3 * um.se("chatbot_lag");
    ok[2] += std::fabs(cm.coef("chatbot_lag") - 0.18) <= 3 * cm.se("chatbot_lag");
    ok[3] += std::fabs(cm.coef("user_lag") - 0.35) <= 3 * cm.se("user_lag");
    z_sum += fit.cross_difference.statistic;
  }
  const char* names[4] = {"user auto", "chatbot->user", "chatbot auto", "user->chatbot"};
  for (int k = 0; k < 4; ++k) o.require(ok[k] >= 95, std::string(names[k]) + " " + std::to_string(ok[k]) + "/100");
  // mean of 100 standard normals: SD 0.1
  const double z_mean = z_sum / 100.0;
  o.require(std::fabs(z_mean) < 0.3, "mean difference z " + num(z_mean));
  o.detail = (o.pass ? "" : o.detail + "; ") + "within 3 SE " + std::to_string(ok[0]) + "/" + std::to_string(ok[1]) +
             "/" + std::to_string(ok[2]) + "/" + std::to_string(ok[3]) + ", mean z " + num(z_mean);
  return o;
}

// ---- 7, 8, 9 ------------------------------------------------------------

Outcome lmg() {
  Outcome o;
  Rng rng(31);
  double worst_share = 0.0, worst_sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 20 + rng.below(60);
    std::vector<std::vector<double>> preds(3, std::vector<double>(n));
    std::vector<double> y(n);
    const double mix = rng.uniform(-0.9, 0.9);
    for (std::size_t i = 0; i < n; ++i) {
      preds[0][i] = rng.normal();
      preds[1][i] = mix * preds[0][i] + rng.normal();
      preds[2][i] = rng.uniform(-2, 2);
      y[i] = rng.uniform(-1, 1) * preds[0][i] + preds[1][i] - 0.4 * preds[2][i] + rng.normal(0.0, 1.5);
    }
    stats::DesignMatrix X(n);
    X.add_column("a", preds[0]).add_column("b", preds[1]).add_column("c", preds[2]);
    const auto shares = stats::lmg_shares(X, y);
    const auto expected = oracle::lmg_by_orderings(preds, y);
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      worst_share = std::max(worst_share, std::fabs(shares.shares[k] - expected[k]));
      sum += shares.shares[k];
    }
    worst_sum = std::max(worst_sum, std::fabs(sum - oracle::r_squared(preds, y)));
  }
  o.require(worst_share <= 1e-10, "share diff " + std::to_string(worst_share));
  o.require(worst_sum <= 1e-10, "sum vs R^2 diff " + std::to_string(worst_sum));
  char buf[96];
  std::snprintf(buf, sizeof buf, "100 instances, max share diff %.1e, max sum diff %.1e", worst_share, worst_sum);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome bh() {
  Outcome o;
  for (double q : stats::bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04}))
    o.require(std::fabs(q - 0.04) < 1e-15, "worked example gives " + num(q, 6));
  Rng rng(50);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(1 + rng.below(40));
    for (double& v : p) v = rng.uniform() * (rep % 2 ? 1.0 : 0.1);
    const auto q = stats::bh_adjust(p);
    const auto expected = oracle::bh_by_definition(p);
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::fabs(q[i] - expected[i]));
  }
  o.require(worst <= 1e-14, "50 vectors: max diff " + std::to_string(worst));
  if (o.pass) o.detail = "worked example all 0.04; 50 vectors match the step-up definition";
  return o;
}

Outcome permutation() {
  Outcome o;
  const std::vector<double> values = {1.5, 2, 3, 4, 5.5, 6, 7};
  auto sum_stat = [&](std::span<const std::size_t> perm) {
    double s = 0.0;
    for (std::size_t i : perm) s += values[i];
    return s;
  };
  const std::vector<std::size_t> id = {0, 1, 2, 3, 4, 5, 6};
  const double p_inv = stats::permutation_pvalue(sum_stat(id), sum_stat, stats::uniform_shuffler(7), 999, 3);
  o.require(p_inv == 1.0, "shuffle-invariant p = " + num(p_inv, 6));

  auto zero = [](std::span<const std::size_t>) { return 0.0; };
  const double p_max = stats::permutation_pvalue(1.0, zero, stats::uniform_shuffler(7), 499, 3);
  o.require(p_max == 1.0 / 500.0, "strictly maximal p = " + num(p_max, 6));

  auto corr = [&](std::span<const std::size_t> perm) {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += static_cast<double>(i) * values[perm[i]];
    return s;
  };
  const double a = stats::permutation_pvalue(corr(id), corr, stats::uniform_shuffler(7), 1999, 2024);
  const double b = stats::permutation_pvalue(corr(id), corr, stats::uniform_shuffler(7), 1999, 2024);
  o.require(std::memcmp(&a, &b, sizeof a) == 0, "seeded reruns differ");
  if (o.pass) o.detail = "p = 1; p = 1/500; seeded p " + num(a, 6) + " identical across runs";
  return o;
}

// ---- 10 ---------------------------------------------------------------

Outcome sign_reproduction() {
  Outcome o;
  std::string summary;
  for (std::uint64_t seed : {21, 22, 23}) {
    synth::Config c;
    c.seed = seed;
    c.journal_participants = 150;
    c.chatbot_participants = 300;
    const Corpus corpus = with_topic_stats(synth::generate(c));
    const auto cv = spe::cross_validate(chatbot_rows(corpus), 3, seed);
    const auto r = analyses::simulated_data_reproduction(corpus, cv);
    const std::string tag = "seed " + std::to_string(seed);
    o.require(r.rank_sign_matches, tag + " rank sign differs");
    o.require(r.valence_sign_matches, tag + " valence sign differs");
    if (seed == 21)
      summary = "rank x chatbot observed " + num(r.observed_rank.estimate) + " simulated " +
                num(r.simulated_rank.estimate) + "; valence x chatbot observed " +
                num(r.observed_valence.fit.estimate) + " simulated " + num(r.simulated_valence.fit.estimate);
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + summary + " (3 seeds)";
  return o;
}

// ---- 11 ---------------------------------------------------------------

struct HttpHarness {
  service::ManualClock clock{5'000'000};
  service::OfflineChatProvider chat;
  service::StudyService svc;
  service::HttpServer http;
  int port = 0;
  std::thread thread;

  explicit HttpHarness(service::ServiceConfig cfg) : svc(std::move(cfg), chat, clock), http(svc, "token") {
    port = http.bind("127.0.0.1", 0);
    thread = std::thread([this] { http.listen(); });
    svc.start_ticker();
  }
  ~HttpHarness() {
    svc.stop_ticker();
    http.stop();
    thread.join();
  }
};

struct Reply {
  int status = 0;
  json body;
};

Reply call(httplib::Client& c, const std::string& method, const std::string& path, const json& body = json::object()) {
  auto r = method == "GET" ? c.Get(path) : c.Post(path, body.dump(), "application/json");
  if (!r) return {};
  return {r->status, json::parse(r->body, nullptr, false)};
}

Outcome protocol() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "wbl_acceptance_protocol";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  service::ServiceConfig cfg;
  cfg.tick_ms = 50;
  cfg.log_path = dir / "events.jsonl";
  std::vector<std::string> dumps, ids;
  {
    HttpHarness h(cfg);
    httplib::Client c("127.0.0.1", h.port);
    auto open = [&](const std::string& condition, int seed) {
      const auto r = call(c, "POST", "/sessions", {{"condition", condition}, {"seed", seed}});
      const std::string base = "/sessions/" + r.body.value("id", std::string());
      call(c, "POST", base + "/survey", {{"payload", json::object()}});
      ids.push_back(r.body.value("id", std::string()));
      return std::pair{base, call(c, "GET", base).body["current"]["started_at"].get<std::int64_t>()};
    };

    // end boundary
    auto [a, ta] = open("chatbot", 1);
    h.clock.set(ta + 10'000);
    call(c, "POST", a + "/messages", {{"text", "I had a long day at work."}});
    h.clock.set(ta + 239'999);
    const auto early = call(c, "POST", a + "/end");
    o.require(early.status == 409 && early.body["code"] == "TooEarly", "end at 239999 ms not refused");
    h.clock.set(ta + 240'000);
    o.require(call(c, "POST", a + "/end").status == 200, "end at 240000 ms refused");
    o.require(call(c, "POST", a + "/happiness", {{"rating", -0.5}}).status == 400, "rating -0.5 accepted");
    o.require(call(c, "POST", a + "/happiness", {{"rating", 100.5}}).status == 400, "rating 100.5 accepted");
    o.require(call(c, "POST", a + "/happiness", {{"rating", 0}}).status == 200, "rating 0 refused");

    // warnings and hard stop, polled once a second like a client
    auto [b, tb] = open("chatbot", 2);
    h.clock.set(tb + 5'000);
    call(c, "POST", b + "/messages", {{"text", "Thinking about my family."}});
    std::map<std::int64_t, int> shown;
    bool sealed_early = false;
    for (std::int64_t t = 6'000; t < 360'000; t += 1'000) {
      h.clock.set(tb + t);
      const auto snap = call(c, "GET", b).body;
      for (const auto& m : snap["clock"]["warnings_due"]) {
        ++shown[m.get<std::int64_t>()];
        call(c, "POST", b + "/warnings/ack", {{"mark_ms", m}});
      }
      if (snap["phase"] != "active_topic") sealed_early = true;
    }
    o.require(!sealed_early, "sealed before 360000 ms");
    o.require(shown == std::map<std::int64_t, int>{{240'000, 1}, {300'000, 1}}, "warnings shown " + json(shown).dump());

    // no request: only the ticker can seal
    h.clock.set(tb + 360'000);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(2 * cfg.tick_ms + 500);
    bool sealed = false;
    while (!sealed && std::chrono::steady_clock::now() < deadline) {
      for (const auto& e : h.svc.events())
        if (e.kind == "sealed" && e.session_id == ids.back()) sealed = true;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    o.require(sealed, "no seal after the hard stop");
    for (const auto& e : h.svc.events())
      if (e.kind == "sealed" && e.session_id == ids.back())
        o.require(e.payload.value("at", std::int64_t{0}) - tb == 360'000, "seal at " + e.payload.dump());
    int issued = 0;
    for (const auto& e : h.svc.events()) issued += e.kind == "warning_issued" && e.session_id == ids.back();
    o.require(issued == 2, std::to_string(issued) + " warning events");
    o.require(call(c, "POST", b + "/messages", {{"text", "more"}}).body["code"] == "ConversationOver",
              "message accepted after the hard stop");
    o.require(call(c, "POST", b + "/happiness", {{"rating", 100}}).status == 200, "rating 100 refused");

    // journal gate
    auto [j, tj] = open("journal", 3);
    h.clock.set(tj + 20'000);
    call(c, "POST", j + "/journal", {{"text", "A quiet morning with coffee."}});
    h.clock.set(tj + 59'999);
    o.require(call(c, "POST", j + "/end").status == 409, "journal continue at 59999 ms");
    h.clock.set(tj + 60'000);
    o.require(call(c, "POST", j + "/end").status == 200, "journal continue refused at 60000 ms");

    for (const auto& id : ids) dumps.push_back(h.svc.state_dump(id));
    const auto replayed = service::replay(h.svc.events());
    for (std::size_t i = 0; i < ids.size(); ++i)
      o.require(replayed.at(ids[i]).state_json().dump() == dumps[i], "replay differs for " + ids[i]);
  }
  service::ManualClock clock{0};
  service::OfflineChatProvider chat;
  service::StudyService restarted(cfg, chat, clock);
  for (std::size_t i = 0; i < ids.size(); ++i)
    o.require(restarted.state_dump(ids[i]) == dumps[i], "restart from log differs for " + ids[i]);
  std::filesystem::remove_all(dir);
  if (o.pass)
    o.detail = "end 239999/240000, warnings once at 240000 and 300000, seal at 360000, journal gate 60000, "
               "rating bounds, replay byte-identical";
  return o;
}

// ---- 12 ---------------------------------------------------------------

Outcome golden_round_trip() {
  Outcome o;
  const std::string path = std::string(WBL_TEST_DATA_DIR) + "/golden/corpus.jsonl";
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string original = ss.str();
  o.require(!original.empty(), "cannot read " + path);
  const std::string first = export_corpus(load_corpus(path));
  const std::string second = export_corpus(parse_corpus(first));
  o.require(first == second, "export -> load -> export differs");
  o.require(first == original, "golden file is not in canonical form");
  if (o.pass) o.detail = std::to_string(original.size()) + " bytes, byte-identical";
  return o;
}

}  // namespace

// --known-failure N marks a criterion documented as not met; the exit status
// is 0 only when exactly the known criteria fail.
int main(int argc, char** argv) {
  std::vector<std::size_t> known;
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--known-failure") known.push_back(std::stoul(argv[i + 1]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sPE extraction", spe_extraction},
      {"regression oracle", regression_oracle},
      {"parameter recovery", parameter_recovery},
      {"model comparison", model_comparison},
      {"journal generalization", journal_generalization},
      {"cross-lagged recovery", cross_lagged_recovery},
      {"LMG", lmg},
      {"BH", bh},
      {"permutation framework", permutation},
      {"end-to-end sign reproduction", sign_reproduction},
      {"protocol conformance", protocol},
      {"corpus round trip", golden_round_trip},
  };
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) failed.push_back(i + 1);
    std::printf("%s  %2zu  %-30s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  std::sort(known.begin(), known.end());
  if (!known.empty()) {
    std::printf("known failures:");
    for (std::size_t k : known) std::printf(" %zu", k);
    std::printf("\n");
  }
  return failed == known ? 0 : 1;
}
