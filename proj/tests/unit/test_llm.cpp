#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/hash.hpp"
#include "kgforge/llm.hpp"
#include "test_support.hpp"

using namespace kgforge;
using namespace kgforge::llm;
using kgforge::testing::TempDir;

namespace {

prompt::RenderedPrompt P(std::string text) { return {"entity_expand", "", std::move(text)}; }

// Echoes the prompt back, counting calls and optionally sleeping.
class EchoBackend : public Backend {
 public:
  explicit EchoBackend(std::chrono::milliseconds delay = {}) : delay_(delay) {}
  std::string name() const override { return "echo"; }
  LlmExchange complete(const std::string& prompt, const GenerationParams& params) override {
    calls.fetch_add(1);
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    if (prompt == "fail") throw LlmError("boom");
    LlmExchange ex;
    ex.prompt = prompt;
    ex.params = params;
    ex.response = "re: " + prompt;
    ex.backend = name();
    ex.latency = std::chrono::duration<double>(0.5);
    return ex;
  }
  std::atomic<int> calls{0};

 private:
  std::chrono::milliseconds delay_;
};

LlmExchange record(const std::string& prompt, const std::string& response,
                   const GenerationParams& params = {}) {
  LlmExchange ex;
  ex.prompt = prompt;
  ex.params = params;
  ex.key = cache_key(prompt, params);
  ex.response = response;
  ex.backend = "authored";
  return ex;
}

}  // namespace

TEST(CacheKey, MatchesHandWrittenCanonicalJson) {
  GenerationParams p;
  const std::string canonical =
      R"({"max_new_tokens":256,"model_id":"gpt-3.5-turbo-0613","prompt":"hello","temperature":0.2})";
  EXPECT_EQ(cache_key("hello", p), sha256_hex(canonical));
}

TEST(CacheKey, EveryParameterMatters) {
  GenerationParams p;
  const auto k = cache_key("x", p);
  auto q = p;
  q.temperature = 0.3;
  EXPECT_NE(cache_key("x", q), k);
  q = p;
  q.max_new_tokens = 255;
  EXPECT_NE(cache_key("x", q), k);
  q = p;
  q.model_id = "other";
  EXPECT_NE(cache_key("x", q), k);
  EXPECT_NE(cache_key("x ", p), k);
  EXPECT_EQ(cache_key("x", p), k);
}

TEST(GenerationParams, Validate) {
  GenerationParams p;
  EXPECT_NO_THROW(p.validate());
  p.temperature = -0.1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.temperature = 0;
  p.max_new_tokens = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Fixture, LineRoundTrip) {
  auto ex = record("a prompt\nwith a line break", "résumé \"quoted\"");
  ex.latency = std::chrono::duration<double>(1.25);
  ex.timestamp = "2024-01-01T00:00:00Z";
  const auto line = to_fixture_line(ex);
  EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 0);
  auto back = parse_fixture_line(line);
  EXPECT_EQ(back.key, ex.key);
  EXPECT_EQ(back.prompt, ex.prompt);
  EXPECT_EQ(back.response, ex.response);
  EXPECT_EQ(back.params, ex.params);
  EXPECT_EQ(back.backend, "authored");
  EXPECT_DOUBLE_EQ(back.latency.count(), 1.25);
  EXPECT_EQ(back.timestamp, ex.timestamp);
}

TEST(Fixture, RejectsTamperedOrBrokenLines) {
  auto line = to_fixture_line(record("p", "r"));
  auto j = nlohmann::json::parse(line);
  j["prompt"] = "q";
  EXPECT_THROW(parse_fixture_line(j.dump()), FormatError);
  EXPECT_THROW(parse_fixture_line("{"), FormatError);
  EXPECT_THROW(parse_fixture_line(R"({"hash":"x"})"), FormatError);
}

TEST(Fixture, FileReadWrite) {
  TempDir dir;
  EXPECT_TRUE(read_fixture(dir / "none.jsonl").empty());
  FixtureWriter w(dir / "f.jsonl");
  w.append(record("a", "1"));
  w.append(record("b", "2"));
  auto all = read_fixture(dir / "f.jsonl");
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[1].response, "2");
  kgforge::testing::write_file(dir / "bad.jsonl", to_fixture_line(record("a", "1")) + "\noops\n");
  try {
    read_fixture(dir / "bad.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

TEST(Replay, HitAndMiss) {
  ReplayBackend backend(std::vector<LlmExchange>{record("known", "answer")});
  EXPECT_EQ(backend.complete("known", {}).response, "answer");
  try {
    backend.complete("unknown", {});
    FAIL();
  } catch (const ReplayMissError& e) {
    EXPECT_EQ(e.hash(), cache_key("unknown", {}));
  }
  GenerationParams other;
  other.temperature = 0.0;
  EXPECT_THROW(backend.complete("known", other), ReplayMissError);
  EXPECT_THROW(ReplayBackend(std::filesystem::path("/nonexistent/fixture.jsonl")), IoError);
}

TEST(Gateway, CachesAndCountsBackendCalls) {
  auto backend = std::make_unique<EchoBackend>();
  auto* raw = backend.get();
  Gateway gw(std::move(backend));
  auto a = gw.query(P("x"), {});
  auto b = gw.query(P("x"), {});
  EXPECT_EQ(a.response, b.response);
  EXPECT_EQ(a.key, cache_key("x", {}));
  EXPECT_EQ(raw->calls.load(), 1);
  EXPECT_EQ(gw.backend_calls(), 1u);
  EXPECT_EQ(gw.cache_size(), 1u);
}

TEST(Gateway, ConcurrentSameKeyIsOneCall) {
  auto backend = std::make_unique<EchoBackend>(std::chrono::milliseconds(50));
  auto* raw = backend.get();
  Gateway gw(std::move(backend));
  std::vector<std::jthread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (gw.query(P("same"), {}).response == "re: same") ok.fetch_add(1);
    });
  }
  threads.clear();
  EXPECT_EQ(ok.load(), 8);
  EXPECT_EQ(raw->calls.load(), 1);
}

TEST(Gateway, BatchKeepsOrderAndReportsFailures) {
  auto backend = std::make_unique<EchoBackend>();
  auto* raw = backend.get();
  Gateway gw(std::move(backend), {.concurrency = 3});
  std::vector<prompt::RenderedPrompt> ps{P("a"), P("fail"), P("b"), P("a"), P("c")};
  auto out = gw.batch_query(ps, {});
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out[0].exchange->response, "re: a");
  EXPECT_FALSE(out[1].ok());
  EXPECT_NE(out[1].error.find("boom"), std::string::npos);
  EXPECT_FALSE(out[1].replay_miss);
  EXPECT_EQ(out[2].exchange->response, "re: b");
  EXPECT_EQ(out[3].exchange->response, "re: a");
  EXPECT_EQ(out[4].exchange->response, "re: c");
  EXPECT_EQ(raw->calls.load(), 4);
  EXPECT_EQ(gw.cache_size(), 3u);
}

TEST(Gateway, ReplayMissFlaggedInBatch) {
  Gateway gw(std::make_unique<ReplayBackend>(std::vector<LlmExchange>{record("a", "1")}));
  std::vector<prompt::RenderedPrompt> ps{P("a"), P("b")};
  auto out = gw.batch_query(ps, {});
  EXPECT_TRUE(out[0].ok());
  EXPECT_TRUE(out[1].replay_miss);
  EXPECT_EQ(out[1].key, cache_key("b", {}));
}

TEST(Gateway, PersistentCacheSurvivesRestart) {
  TempDir dir;
  {
    Gateway gw(std::make_unique<EchoBackend>(), {.cache_path = dir / "cache.jsonl"});
    gw.query(P("x"), {});
  }
  auto backend = std::make_unique<EchoBackend>();
  auto* raw = backend.get();
  Gateway gw(std::move(backend), {.cache_path = dir / "cache.jsonl"});
  EXPECT_EQ(gw.query(P("x"), {}).response, "re: x");
  EXPECT_EQ(raw->calls.load(), 0);
}

TEST(Gateway, RejectsBadParams) {
  Gateway gw(std::make_unique<EchoBackend>());
  GenerationParams p;
  p.max_new_tokens = 0;
  EXPECT_THROW(gw.query(P("x"), p), InvalidArgument);
}

TEST(CostReport, SumsPerBackend) {
  auto a = record("a", "1");
  a.latency = std::chrono::duration<double>(1.0);
  auto b = record("b", "2");
  b.latency = std::chrono::duration<double>(3.0);
  auto c = record("c", "3");
  c.backend = "http";
  c.latency = std::chrono::duration<double>(2.0);
  std::vector<LlmExchange> all{a, b, c};
  auto r = cost_report(all);
  EXPECT_EQ(r.count, 3u);
  EXPECT_DOUBLE_EQ(r.total_latency_s, 6.0);
  EXPECT_DOUBLE_EQ(r.mean_latency_s, 2.0);
  EXPECT_EQ(r.per_backend.at("authored").count, 2u);
  EXPECT_DOUBLE_EQ(r.per_backend.at("authored").mean_latency_s, 2.0);
  EXPECT_DOUBLE_EQ(r.per_backend.at("http").total_latency_s, 2.0);
  auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["count"], 3);
  EXPECT_EQ(cost_report({}).mean_latency_s, 0.0);
}

TEST(RetryPolicy, ExponentialWithCap) {
  RetryPolicy p;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.multiplier = 2.0;
  p.max_backoff = std::chrono::milliseconds(500);
  EXPECT_EQ(p.backoff_for(0).count(), 100);
  EXPECT_EQ(p.backoff_for(1).count(), 200);
  EXPECT_EQ(p.backoff_for(2).count(), 400);
  EXPECT_EQ(p.backoff_for(3).count(), 500);
}

// A local chat-completion server: fails the first `fail_first` requests with
// 429, then answers with the prompt upper-cased.
class HttpBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      hits_.fetch_add(1);
      auth_ = req.get_header_value("Authorization");
      if (fail_first_.load() > 0) {
        fail_first_.fetch_sub(1);
        res.status = 429;
        return;
      }
      if (bad_request_) {
        res.status = 400;
        res.set_content("nope", "text/plain");
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      last_body_ = body;
      std::string content = body["messages"][0]["content"];
      for (auto& c : content) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  HttpConfig config() const {
    HttpConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.api_key = "secret";
    c.retry.initial_backoff = std::chrono::milliseconds(1);
    c.retry.max_backoff = std::chrono::milliseconds(2);
    c.timeout = std::chrono::seconds(5);
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<int> fail_first_{0};
  bool bad_request_ = false;
  std::string auth_;
  nlohmann::json last_body_;
};

TEST_F(HttpBackendTest, SendsRequestAndParsesReply) {
  HttpBackend backend(config());
  GenerationParams p;
  p.model_id = "m1";
  auto ex = backend.complete("hi there", p);
  EXPECT_EQ(ex.response, "HI THERE");
  EXPECT_EQ(ex.key, cache_key("hi there", p));
  EXPECT_EQ(ex.backend, "http");
  EXPECT_FALSE(ex.timestamp.empty());
  EXPECT_EQ(auth_, "Bearer secret");
  EXPECT_EQ(last_body_["model"], "m1");
  EXPECT_EQ(last_body_["max_tokens"], 256);
  EXPECT_DOUBLE_EQ(last_body_["temperature"].get<double>(), 0.2);
}

TEST_F(HttpBackendTest, RetriesRateLimits) {
  fail_first_ = 2;
  HttpBackend backend(config());
  EXPECT_EQ(backend.complete("x", {}).response, "X");
  EXPECT_EQ(hits_.load(), 3);
  EXPECT_EQ(backend.requests_sent(), 3u);
}

TEST_F(HttpBackendTest, GivesUpAfterMaxAttempts) {
  fail_first_ = 100;
  auto c = config();
  c.retry.max_attempts = 3;
  HttpBackend backend(c);
  try {
    backend.complete("x", {});
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_NE(std::string(e.what()).find("429"), std::string::npos);
  }
  EXPECT_EQ(hits_.load(), 3);
}

TEST_F(HttpBackendTest, PermanentErrorIsNotRetried) {
  bad_request_ = true;
  HttpBackend backend(config());
  EXPECT_THROW(backend.complete("x", {}), LlmError);
  EXPECT_EQ(hits_.load(), 1);
}

TEST_F(HttpBackendTest, RecordBackendAppendsThenReplays) {
  TempDir dir;
  {
    RecordBackend rec(std::make_unique<HttpBackend>(config()), dir / "fx.jsonl");
    rec.complete("alpha", {});
    rec.complete("beta", {});
  }
  ReplayBackend replay(dir / "fx.jsonl");
  EXPECT_EQ(replay.size(), 2u);
  EXPECT_EQ(replay.complete("beta", {}).response, "BETA");
  EXPECT_EQ(hits_.load(), 2);
}

TEST(HttpBackend, RejectsNonHttpEndpoint) {
  HttpConfig c;
  c.endpoint = "ftp://example.com/x";
  EXPECT_THROW(HttpBackend{c}, ConfigError);
  c.endpoint = "";
  EXPECT_THROW(HttpBackend{c}, ConfigError);
}
