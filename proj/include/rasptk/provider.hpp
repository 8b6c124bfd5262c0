#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasptk/error.hpp"

namespace rasptk {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct SamplingParams {
  double temperature = 0.9;
  double top_p = 0.95;
  int max_tokens = 4096;
  std::string model;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.9;
  double top_p = 0.95;
  int max_tokens = 4096;
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

// Raised by adapters for a failed exchange. `status` is 0 when no HTTP
// response arrived.
class ProviderCallError : public Error {
 public:
  ProviderCallError(int status, bool retryable, std::optional<double> retry_after_s, const std::string& message)
      : Error(ErrorCode::kProviderError, message),
        status_(status),
        retryable_(retryable),
        retry_after_s_(retry_after_s) {}

  int status() const { return status_; }
  bool retryable() const { return retryable_; }
  std::optional<double> retry_after_s() const { return retry_after_s_; }

 private:
  int status_;
  bool retryable_;
  std::optional<double> retry_after_s_;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  double base_delay_s = 1.0;
  double max_delay_s = 30.0;
};

struct BudgetLimits {
  long max_requests = 0;  // 0 = unlimited
  long max_tokens = 0;
};

struct ProviderConfig {
  std::string adapter;  // openai | anthropic | scripted
  std::string base_url;
  std::string model;
  std::string api_key_env;
  SamplingParams sampling;
  double requests_per_minute = 0;  // 0 = unlimited
  RetryPolicy retry;
  BudgetLimits budget;
  std::string system_message;
  double timeout_s = 120;
  std::vector<std::string> scripted_responses;  // adapter "scripted"
};

// Errors: IoError, ConfigError (field-level).
ProviderConfig load_provider_config(const std::filesystem::path& path);
ProviderConfig parse_provider_config(const nlohmann::json& j);

using Sleeper = std::function<void(double seconds)>;
Sleeper real_sleeper();

// Vendor wire adapters over HTTP(S).
std::string openai_request_body(const ChatRequest& r);
ChatResponse openai_parse_response(const std::string& body);
std::string anthropic_request_body(const ChatRequest& r);
ChatResponse anthropic_parse_response(const std::string& body);

class HttpChatProvider : public ChatProvider {
 public:
  HttpChatProvider(std::string adapter, std::string base_url, std::string api_key, double timeout_s);
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return adapter_; }

 private:
  std::string adapter_;
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path prefix, no trailing slash
  std::string api_key_;
  double timeout_s_;
};

// Replays canned responses in order; after the last one it keeps returning
// the last. Records every request it receives.
class ScriptedProvider : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "scripted"; }
  const std::vector<ChatRequest>& requests() const { return requests_; }

 private:
  std::vector<std::string> responses_;
  std::vector<ChatRequest> requests_;
  size_t next_ = 0;
  std::mutex mu_;
};

// Retries retryable failures with exponential backoff, honoring Retry-After;
// the final failure surfaces as ProviderError.
class RetryingProvider : public ChatProvider {
 public:
  RetryingProvider(std::shared_ptr<ChatProvider> inner, RetryPolicy policy, Sleeper sleeper = real_sleeper())
      : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {}
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

// Shared request/token cap. Thread-safe.
class BudgetTracker {
 public:
  explicit BudgetTracker(BudgetLimits limits) : limits_(limits) {}
  // Throws BudgetExceeded when another request would break the cap.
  void reserve_request();
  void charge(const TokenUsage& usage);
  long requests() const;
  long tokens() const;

 private:
  BudgetLimits limits_;
  mutable std::mutex mu_;
  long requests_ = 0;
  long tokens_ = 0;
};

// Token bucket shared by all workers. Thread-safe.
class RateLimiter {
 public:
  using Clock = std::function<double()>;  // seconds
  RateLimiter(double requests_per_minute, Sleeper sleeper = real_sleeper(), Clock clock = {});
  void acquire();

 private:
  double rate_per_s_;
  double capacity_;
  double tokens_;
  double last_;
  Sleeper sleeper_;
  Clock clock_;
  std::mutex mu_;
};

class GuardedProvider : public ChatProvider {
 public:
  GuardedProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<BudgetTracker> budget,
                  std::shared_ptr<RateLimiter> limiter)
      : inner_(std::move(inner)), budget_(std::move(budget)), limiter_(std::move(limiter)) {}
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::shared_ptr<BudgetTracker> budget_;
  std::shared_ptr<RateLimiter> limiter_;
};

// Adapter + retries + budget + rate limit, as configured. The API key is read
// from the environment variable named in the config. Errors: ConfigError.
std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config,
                                            std::function<const char*(const char*)> getenv_fn = nullptr);

}  // namespace rasptk
