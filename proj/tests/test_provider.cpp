#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "rasptk/provider.hpp"

using namespace rasptk;
using nlohmann::json;

namespace {

json openai_cfg() {
  return json{{"adapter", "openai"},
              {"base_url", "http://127.0.0.1:1/v1"},
              {"model", "m"},
              {"api_key_env", "RASPTK_TEST_KEY"}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInternal;
}

ChatRequest simple_request() {
  ChatRequest r;
  r.model = "m";
  r.messages = {{"system", "be brief"}, {"user", "hello"}};
  r.temperature = 0.5;
  r.top_p = 0.9;
  r.max_tokens = 64;
  return r;
}

// Local server on an ephemeral port; stopped in the destructor.
struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  std::string url(const std::string& path = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
  ~LocalServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

class FlakyProvider : public ChatProvider {
 public:
  FlakyProvider(int failures, std::optional<double> retry_after, bool retryable = true)
      : failures_(failures), retry_after_(retry_after), retryable_(retryable) {}
  ChatResponse complete(const ChatRequest&) override {
    ++calls;
    if (calls <= failures_) throw ProviderCallError(503, retryable_, retry_after_, "busy");
    return ChatResponse{"ok", {3, 4}};
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
  std::optional<double> retry_after_;
  bool retryable_;
};

}  // namespace

TEST(ProviderConfig, ParsesFullConfig) {
  json j = openai_cfg();
  j["sampling"] = {{"temperature", 0.2}, {"top_p", 1.0}, {"max_tokens", 100}};
  j["rate_limit"] = {{"requests_per_minute", 30}};
  j["retry"] = {{"max_retries", 2}, {"base_delay_s", 0.5}, {"max_delay_s", 4}};
  j["budget"] = {{"max_requests", 10}, {"max_tokens", 5000}};
  ProviderConfig c = parse_provider_config(j);
  EXPECT_EQ(c.adapter, "openai");
  EXPECT_EQ(c.sampling.model, "m");
  EXPECT_DOUBLE_EQ(c.sampling.temperature, 0.2);
  EXPECT_EQ(c.sampling.max_tokens, 100);
  EXPECT_DOUBLE_EQ(c.requests_per_minute, 30);
  EXPECT_EQ(c.retry.max_retries, 2);
  EXPECT_EQ(c.budget.max_requests, 10);
  EXPECT_EQ(c.budget.max_tokens, 5000);
}

TEST(ProviderConfig, RejectsBadFields) {
  auto bad = [](json j) { return code_of([&] { parse_provider_config(j); }); };
  json j = openai_cfg();
  j["adapter"] = "carrier-pigeon";
  EXPECT_EQ(bad(j), ErrorCode::kConfigError);
  j = openai_cfg();
  j.erase("model");
  EXPECT_EQ(bad(j), ErrorCode::kConfigError);
  j = openai_cfg();
  j["sampling"] = {{"top_p", 0}};
  EXPECT_EQ(bad(j), ErrorCode::kConfigError);
  j = openai_cfg();
  j["sampling"] = {{"temperature", "hot"}};
  EXPECT_EQ(bad(j), ErrorCode::kConfigError);
  EXPECT_EQ(bad(json::array()), ErrorCode::kConfigError);
}

TEST(ProviderConfig, InlineKeyIsRejectedWithoutEchoingIt) {
  json j = openai_cfg();
  j["api_key"] = "sk-secret-value";
  try {
    parse_provider_config(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_EQ(std::string(e.what()).find("sk-secret-value"), std::string::npos);
  }
}

TEST(ProviderConfig, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_provider_config("/nonexistent/provider.json"); }), ErrorCode::kIoError);
}

TEST(Wire, OpenAiRequestAndResponse) {
  json body = json::parse(openai_request_body(simple_request()));
  EXPECT_EQ(body["model"], "m");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["max_tokens"], 64);
  ChatResponse r = openai_parse_response(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":5,"completion_tokens":2}})");
  EXPECT_EQ(r.text, "hi");
  EXPECT_EQ(r.usage.prompt_tokens, 5);
  EXPECT_EQ(r.usage.completion_tokens, 2);
  EXPECT_THROW(openai_parse_response("{\"choices\":[]}"), ProviderCallError);
}

TEST(Wire, AnthropicMovesSystemOutOfMessages) {
  json body = json::parse(anthropic_request_body(simple_request()));
  EXPECT_EQ(body["system"], "be brief");
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  ChatResponse r = anthropic_parse_response(
      R"({"content":[{"type":"text","text":"a"},{"type":"tool_use"},{"type":"text","text":"b"}],"usage":{"input_tokens":7,"output_tokens":1}})");
  EXPECT_EQ(r.text, "ab");
  EXPECT_EQ(r.usage.prompt_tokens, 7);
  EXPECT_THROW(anthropic_parse_response("not json"), ProviderCallError);
}

TEST(Http, OpenAiRoundTripSendsBearerKey) {
  LocalServer s;
  std::string auth, path;
  s.server.Post(R"(/v1/chat/completions)", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    path = req.path;
    res.set_content(R"({"choices":[{"message":{"content":"pong"}}]})", "application/json");
  });
  s.start();
  HttpChatProvider p("openai", s.url("/v1/"), "k123", 5);
  EXPECT_EQ(p.complete(simple_request()).text, "pong");
  EXPECT_EQ(auth, "Bearer k123");
  EXPECT_EQ(path, "/v1/chat/completions");
}

TEST(Http, AnthropicUsesKeyHeader) {
  LocalServer s;
  std::string key, version;
  s.server.Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
    key = req.get_header_value("x-api-key");
    version = req.get_header_value("anthropic-version");
    res.set_content(R"({"content":[{"type":"text","text":"pong"}]})", "application/json");
  });
  s.start();
  HttpChatProvider p("anthropic", s.url(), "k9", 5);
  EXPECT_EQ(p.complete(simple_request()).text, "pong");
  EXPECT_EQ(key, "k9");
  EXPECT_FALSE(version.empty());
}

TEST(Http, StatusClassification) {
  LocalServer s;
  std::atomic<int> status{429};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    if (status == 429) res.set_header("Retry-After", "2");
    res.set_content("nope", "text/plain");
  });
  s.start();
  HttpChatProvider p("openai", s.url(), "k", 5);
  try {
    p.complete(simple_request());
    FAIL();
  } catch (const ProviderCallError& e) {
    EXPECT_EQ(e.status(), 429);
    EXPECT_TRUE(e.retryable());
    ASSERT_TRUE(e.retry_after_s());
    EXPECT_DOUBLE_EQ(*e.retry_after_s(), 2.0);
  }
  status = 502;
  try {
    p.complete(simple_request());
    FAIL();
  } catch (const ProviderCallError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_FALSE(e.retry_after_s());
  }
  status = 401;
  try {
    p.complete(simple_request());
    FAIL();
  } catch (const ProviderCallError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_FALSE(e.retryable());
  }
}

TEST(Http, RetriesThroughServerErrors) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 503;
      res.set_header("Retry-After", "0");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"finally"}}]})", "application/json");
  });
  s.start();
  std::vector<double> sleeps;
  RetryingProvider p(std::make_shared<HttpChatProvider>("openai", s.url(), "k", 5), RetryPolicy{3, 0.01, 1},
                     [&](double d) { sleeps.push_back(d); });
  EXPECT_EQ(p.complete(simple_request()).text, "finally");
  EXPECT_EQ(hits, 3);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_DOUBLE_EQ(sleeps[0], 0.01);
  EXPECT_DOUBLE_EQ(sleeps[1], 0.02);
}

TEST(Http, TransportFailureIsRetryable) {
  HttpChatProvider p("openai", "http://127.0.0.1:1/v1", "k", 0.5);
  try {
    p.complete(simple_request());
    FAIL();
  } catch (const ProviderCallError& e) {
    EXPECT_EQ(e.status(), 0);
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(code_of([] { HttpChatProvider("openai", "localhost/v1", "k", 1); }), ErrorCode::kConfigError);
}

TEST(Retry, ExponentialBackoffCappedAndRetryAfterHonored) {
  auto inner = std::make_shared<FlakyProvider>(4, std::nullopt);
  std::vector<double> sleeps;
  RetryingProvider p(inner, RetryPolicy{5, 1, 3}, [&](double d) { sleeps.push_back(d); });
  EXPECT_EQ(p.complete(simple_request()).text, "ok");
  EXPECT_EQ(sleeps, (std::vector<double>{1, 2, 3, 3}));

  auto slow = std::make_shared<FlakyProvider>(1, 7.0);
  sleeps.clear();
  RetryingProvider q(slow, RetryPolicy{2, 1, 3}, [&](double d) { sleeps.push_back(d); });
  q.complete(simple_request());
  EXPECT_EQ(sleeps, (std::vector<double>{7}));
}

TEST(Retry, GivesUpAsProviderError) {
  auto inner = std::make_shared<FlakyProvider>(100, std::nullopt);
  int sleeps = 0;
  RetryingProvider p(inner, RetryPolicy{3, 0.01, 0.02}, [&](double) { ++sleeps; });
  EXPECT_EQ(code_of([&] { p.complete(simple_request()); }), ErrorCode::kProviderError);
  EXPECT_EQ(inner->calls, 4);
  EXPECT_EQ(sleeps, 3);

  auto fatal = std::make_shared<FlakyProvider>(1, std::nullopt, false);
  RetryingProvider q(fatal, RetryPolicy{3, 0.01, 0.02}, [&](double) { ++sleeps; });
  EXPECT_EQ(code_of([&] { q.complete(simple_request()); }), ErrorCode::kProviderError);
  EXPECT_EQ(fatal->calls, 1);
}

TEST(Budget, RequestCap) {
  auto budget = std::make_shared<BudgetTracker>(BudgetLimits{2, 0});
  GuardedProvider p(std::make_shared<ScriptedProvider>(std::vector<std::string>{"x"}), budget, nullptr);
  p.complete(simple_request());
  p.complete(simple_request());
  EXPECT_EQ(code_of([&] { p.complete(simple_request()); }), ErrorCode::kBudgetExceeded);
  EXPECT_EQ(budget->requests(), 2);
}

TEST(Budget, TokenCap) {
  BudgetTracker b(BudgetLimits{0, 10});
  b.reserve_request();
  b.charge({6, 5});
  EXPECT_EQ(b.tokens(), 11);
  EXPECT_EQ(code_of([&] { b.reserve_request(); }), ErrorCode::kBudgetExceeded);
}

TEST(RateLimit, SpacesRequestsOnInjectedClock) {
  double now = 0;
  std::vector<double> waits;
  RateLimiter limiter(
      60, [&](double s) { waits.push_back(s); now += s; }, [&] { return now; });
  limiter.acquire();
  EXPECT_TRUE(waits.empty());
  limiter.acquire();
  ASSERT_EQ(waits.size(), 1u);
  EXPECT_NEAR(waits[0], 1.0, 1e-9);
  now += 5;  // idle time does not bank more than one request
  limiter.acquire();
  limiter.acquire();
  EXPECT_EQ(waits.size(), 2u);
  EXPECT_NEAR(now, 7.0, 1e-9);
}

TEST(RateLimit, ZeroMeansUnlimited) {
  int waits = 0;
  RateLimiter limiter(0, [&](double) { ++waits; }, [] { return 0.0; });
  for (int i = 0; i < 100; ++i) limiter.acquire();
  EXPECT_EQ(waits, 0);
}

TEST(Factory, KeyComesFromNamedVariable) {
  ProviderConfig c = parse_provider_config(openai_cfg());
  std::string asked;
  EXPECT_EQ(code_of([&] {
              make_provider(c, [&](const char* n) -> const char* {
                asked = n;
                return nullptr;
              });
            }),
            ErrorCode::kConfigError);
  EXPECT_EQ(asked, "RASPTK_TEST_KEY");
  auto p = make_provider(c, [](const char*) -> const char* { return "k"; });
  EXPECT_EQ(p->name(), "openai");
}

TEST(Factory, ScriptedNeedsNoKey) {
  ProviderConfig c = parse_provider_config(json{{"adapter", "scripted"}, {"responses", {"a", "b"}}});
  auto p = make_provider(c, [](const char*) -> const char* {
    ADD_FAILURE() << "environment consulted";
    return nullptr;
  });
  EXPECT_EQ(p->complete(simple_request()).text, "a");
  EXPECT_EQ(p->complete(simple_request()).text, "b");
  EXPECT_EQ(p->complete(simple_request()).text, "b");
}

TEST(Scripted, RecordsRequests) {
  ScriptedProvider p({"one"});
  p.complete(simple_request());
  ASSERT_EQ(p.requests().size(), 1u);
  EXPECT_EQ(p.requests()[0].messages[1].content, "hello");
  ScriptedProvider empty({});
  EXPECT_THROW(empty.complete(simple_request()), ProviderCallError);
}
