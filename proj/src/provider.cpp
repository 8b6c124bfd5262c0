#include "rasptk/provider.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace rasptk {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kConfigError, "provider config " + field + ": " + msg);
}

template <typename T>
T read_field(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    config_fail(path + "." + key, "has the wrong type");
  }
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

ProviderConfig parse_provider_config(const json& j) {
  if (!j.is_object()) config_fail("$", "expected an object");
  ProviderConfig c;
  c.adapter = read_field<std::string>(j, "adapter", "$", "");
  if (c.adapter != "openai" && c.adapter != "anthropic" && c.adapter != "scripted") {
    config_fail("$.adapter", "expected \"openai\", \"anthropic\" or \"scripted\"");
  }
  c.base_url = read_field<std::string>(j, "base_url", "$", "");
  c.model = read_field<std::string>(j, "model", "$", "");
  c.api_key_env = read_field<std::string>(j, "api_key_env", "$", "");
  if (j.contains("api_key")) config_fail("$.api_key", "keys must not be stored in the file; use api_key_env");
  if (c.adapter != "scripted") {
    if (c.base_url.empty()) config_fail("$.base_url", "required");
    if (c.model.empty()) config_fail("$.model", "required");
    if (c.api_key_env.empty()) config_fail("$.api_key_env", "required");
  }
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    c.sampling.temperature = read_field<double>(s, "temperature", "$.sampling", c.sampling.temperature);
    c.sampling.top_p = read_field<double>(s, "top_p", "$.sampling", c.sampling.top_p);
    c.sampling.max_tokens = read_field<int>(s, "max_tokens", "$.sampling", c.sampling.max_tokens);
  }
  if (c.sampling.temperature < 0) config_fail("$.sampling.temperature", "must be >= 0");
  if (!(c.sampling.top_p > 0 && c.sampling.top_p <= 1)) config_fail("$.sampling.top_p", "must be in (0, 1]");
  if (c.sampling.max_tokens < 1) config_fail("$.sampling.max_tokens", "must be positive");
  c.sampling.model = c.model;
  if (j.contains("rate_limit")) {
    c.requests_per_minute = read_field<double>(j["rate_limit"], "requests_per_minute", "$.rate_limit", 0);
  }
  if (j.contains("retry")) {
    const json& r = j["retry"];
    c.retry.max_retries = read_field<int>(r, "max_retries", "$.retry", c.retry.max_retries);
    c.retry.base_delay_s = read_field<double>(r, "base_delay_s", "$.retry", c.retry.base_delay_s);
    c.retry.max_delay_s = read_field<double>(r, "max_delay_s", "$.retry", c.retry.max_delay_s);
  }
  if (j.contains("budget")) {
    const json& b = j["budget"];
    c.budget.max_requests = read_field<long>(b, "max_requests", "$.budget", 0);
    c.budget.max_tokens = read_field<long>(b, "max_tokens", "$.budget", 0);
  }
  c.system_message = read_field<std::string>(j, "system_message", "$", "");
  c.timeout_s = read_field<double>(j, "timeout_s", "$", c.timeout_s);
  if (j.contains("responses")) c.scripted_responses = j["responses"].get<std::vector<std::string>>();
  return c;
}

ProviderConfig load_provider_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read provider config " + path.string());
  try {
    return parse_provider_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
}

Sleeper real_sleeper() {
  return [](double s) {
    if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
}

// --- wire formats --------------------------------------------------------------

std::string openai_request_body(const ChatRequest& r) {
  json messages = json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", r.model},
              {"messages", messages},
              {"temperature", r.temperature},
              {"top_p", r.top_p},
              {"max_tokens", r.max_tokens}}
      .dump();
}

ChatResponse openai_parse_response(const std::string& body) {
  try {
    json j = json::parse(body);
    ChatResponse out;
    const json& content = j.at("choices").at(0).at("message").at("content");
    out.text = content.is_null() ? "" : content.get<std::string>();
    if (j.contains("usage")) {
      out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      out.usage.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    return out;
  } catch (const json::exception& e) {
    throw ProviderCallError(200, false, std::nullopt, std::string("malformed chat completion: ") + e.what());
  }
}

std::string anthropic_request_body(const ChatRequest& r) {
  json messages = json::array();
  std::string system;
  for (const auto& m : r.messages) {
    if (m.role == "system") {
      system += (system.empty() ? "" : "\n") + m.content;
    } else {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
  }
  json body = {{"model", r.model},
               {"messages", messages},
               {"temperature", r.temperature},
               {"top_p", r.top_p},
               {"max_tokens", r.max_tokens}};
  if (!system.empty()) body["system"] = system;
  return body.dump();
}

ChatResponse anthropic_parse_response(const std::string& body) {
  try {
    json j = json::parse(body);
    ChatResponse out;
    for (const auto& block : j.at("content")) {
      if (block.value("type", "") == "text") out.text += block.at("text").get<std::string>();
    }
    if (j.contains("usage")) {
      out.usage.prompt_tokens = j["usage"].value("input_tokens", 0L);
      out.usage.completion_tokens = j["usage"].value("output_tokens", 0L);
    }
    return out;
  } catch (const json::exception& e) {
    throw ProviderCallError(200, false, std::nullopt, std::string("malformed messages response: ") + e.what());
  }
}

// --- HTTP adapter ----------------------------------------------------------------

HttpChatProvider::HttpChatProvider(std::string adapter, std::string base_url, std::string api_key,
                                   double timeout_s)
    : adapter_(std::move(adapter)), api_key_(std::move(api_key)), timeout_s_(timeout_s) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "base_url must start with http:// or https://");
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  origin_ = base_url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

ChatResponse HttpChatProvider::complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  auto secs = static_cast<time_t>(timeout_s_);
  auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  std::string path, body;
  if (adapter_ == "anthropic") {
    path = prefix_ + "/messages";
    headers.emplace("x-api-key", api_key_);
    headers.emplace("anthropic-version", "2023-06-01");
    body = anthropic_request_body(request);
  } else {
    path = prefix_ + "/chat/completions";
    headers.emplace("Authorization", "Bearer " + api_key_);
    body = openai_request_body(request);
  }
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw ProviderCallError(0, true, std::nullopt,
                            "transport error contacting " + origin_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    std::optional<double> retry_after;
    if (res->has_header("Retry-After")) {
      try {
        retry_after = std::stod(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    throw ProviderCallError(res->status, true, retry_after, "HTTP " + std::to_string(res->status) + " from " + origin_);
  }
  if (res->status < 200 || res->status >= 300) {
    std::string snippet = res->body.substr(0, 300);
    throw ProviderCallError(res->status, false, std::nullopt,
                            "HTTP " + std::to_string(res->status) + " from " + origin_ + ": " + snippet);
  }
  return adapter_ == "anthropic" ? anthropic_parse_response(res->body) : openai_parse_response(res->body);
}

// --- scripted ----------------------------------------------------------------------

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  requests_.push_back(request);
  if (responses_.empty()) throw ProviderCallError(0, false, std::nullopt, "scripted provider has no responses");
  ChatResponse out;
  out.text = responses_[std::min(next_, responses_.size() - 1)];
  ++next_;
  out.usage.completion_tokens = static_cast<long>(out.text.size() / 4);
  return out;
}

// --- wrappers -------------------------------------------------------------------

ChatResponse RetryingProvider::complete(const ChatRequest& request) {
  for (int attempt = 0;; ++attempt) {
    try {
      return inner_->complete(request);
    } catch (const ProviderCallError& e) {
      if (!e.retryable() || attempt >= policy_.max_retries) {
        throw Error(ErrorCode::kProviderError,
                    e.detail() + (attempt > 0 ? " (after " + std::to_string(attempt) + " retries)" : ""));
      }
      double delay = std::min(policy_.max_delay_s, policy_.base_delay_s * std::pow(2.0, attempt));
      if (e.retry_after_s()) delay = std::max(delay, *e.retry_after_s());
      sleeper_(delay);
    }
  }
}

void BudgetTracker::reserve_request() {
  std::lock_guard<std::mutex> lock(mu_);
  if (limits_.max_requests > 0 && requests_ >= limits_.max_requests) {
    throw Error(ErrorCode::kBudgetExceeded, "request budget of " + std::to_string(limits_.max_requests) + " used up");
  }
  if (limits_.max_tokens > 0 && tokens_ >= limits_.max_tokens) {
    throw Error(ErrorCode::kBudgetExceeded, "token budget of " + std::to_string(limits_.max_tokens) + " used up");
  }
  ++requests_;
}

void BudgetTracker::charge(const TokenUsage& usage) {
  std::lock_guard<std::mutex> lock(mu_);
  tokens_ += usage.prompt_tokens + usage.completion_tokens;
}

long BudgetTracker::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

long BudgetTracker::tokens() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tokens_;
}

RateLimiter::RateLimiter(double requests_per_minute, Sleeper sleeper, Clock clock)
    : rate_per_s_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      sleeper_(std::move(sleeper)),
      clock_(clock ? std::move(clock) : Clock(now_seconds)) {
  last_ = clock_();
}

void RateLimiter::acquire() {
  if (rate_per_s_ <= 0) return;
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    double now = clock_();
    tokens_ = std::min(capacity_, tokens_ + (now - last_) * rate_per_s_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    double wait = (1.0 - tokens_) / rate_per_s_;
    lock.unlock();
    sleeper_(wait);
    lock.lock();
  }
}

ChatResponse GuardedProvider::complete(const ChatRequest& request) {
  if (budget_) budget_->reserve_request();
  if (limiter_) limiter_->acquire();
  ChatResponse out = inner_->complete(request);
  if (budget_) budget_->charge(out.usage);
  return out;
}

std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config,
                                            std::function<const char*(const char*)> getenv_fn) {
  std::shared_ptr<ChatProvider> base;
  if (config.adapter == "scripted") {
    base = std::make_shared<ScriptedProvider>(config.scripted_responses);
  } else {
    if (!getenv_fn) getenv_fn = [](const char* name) { return std::getenv(name); };
    const char* key = getenv_fn(config.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(ErrorCode::kConfigError, "environment variable " + config.api_key_env + " is not set");
    }
    base = std::make_shared<HttpChatProvider>(config.adapter, config.base_url, key, config.timeout_s);
  }
  auto retrying = std::make_shared<RetryingProvider>(base, config.retry);
  return std::make_shared<GuardedProvider>(retrying, std::make_shared<BudgetTracker>(config.budget),
                                           std::make_shared<RateLimiter>(config.requests_per_minute));
}

}  // namespace rasptk
