#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/error.hpp"

namespace specforge::llm {

enum class ClientMode { live, record, replay_strict, replay_fallback };

std::string_view to_string(ClientMode m);
std::optional<ClientMode> parse_client_mode(std::string_view s);

struct ChatRequest {
  std::string model;
  double temperature = 0.7;
  std::string prompt;
  std::size_t sample_index = 0;
};

struct Usage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string reasoning;
  std::string answer;
  Usage usage;
  long long latency_ms = 0;
  std::string recorded_at;  // set when the response comes from or goes to the cache
  bool operator==(const ChatResponse&) const = default;
};

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& body);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct HttpResult {
  int status = 0;  // 0 when no response was received
  std::string body;
  std::optional<double> retry_after_s;
  std::string error;  // transport-level failure description
};

// One POST of a JSON body. Implementations must be safe to call concurrently.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResult post_json(const std::string& url, const std::string& body,
                               const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(double timeout_s = 600);
  HttpResult post_json(const std::string& url, const std::string& body,
                       const std::vector<std::pair<std::string, std::string>>& headers) override;

 private:
  double timeout_s_;
};

struct RetryPolicy {
  int max_attempts = 5;
  int base_delay_ms = 1000;
};

struct ClientConfig {
  std::string base_url = "https://api.deepseek.com/v1";
  ClientMode mode = ClientMode::replay_strict;
  std::filesystem::path cache_dir = ".specforge-cache";
  int max_in_flight = 4;
  RetryPolicy retry;
  std::string api_key_env = "SPECFORGE_API_KEY";
  double request_timeout_s = 600;
};

// `<root>/<digest>/<sample_index>.json`.
std::filesystem::path cache_key(const std::filesystem::path& root, const ChatRequest& req);

// Parses an OpenAI-style chat-completion payload. Reasoning comes from the
// message's reasoning channel, or from a leading <think> block when the
// provider inlines it. Throws Error{MalformedProviderPayload}.
ChatResponse parse_completion_payload(std::string_view body);
std::string completion_request_body(const ChatRequest& req);

std::string cache_entry_json(const ChatRequest& req, const ChatResponse& resp);
// Throws Error{MalformedProviderPayload} when the entry does not belong to `req`.
ChatResponse parse_cache_entry(std::string_view text, const ChatRequest& req);

class Client {
 public:
  explicit Client(ClientConfig config, std::shared_ptr<Transport> transport = nullptr);

  // Throws Error{AuthMissing, HttpError, RateLimited, CacheMiss, CacheConflict,
  // MalformedProviderPayload}.
  ChatResponse complete(const ChatRequest& req);
  ChatResponse complete(const ChatRequest& req, ClientMode mode);

  std::filesystem::path cache_key(const ChatRequest& req) const;
  const ClientConfig& config() const { return config_; }

  // Reads a cache entry; nullopt when absent.
  std::optional<ChatResponse> lookup(const ChatRequest& req) const;
  // Write-once store; identical bytes are accepted, differing bytes throw
  // Error{CacheConflict}.
  void store(const ChatRequest& req, const ChatResponse& resp);

 private:
  ChatResponse call_provider(const ChatRequest& req);
  std::shared_ptr<std::mutex> key_lock(const std::filesystem::path& key);

  ClientConfig config_;
  std::shared_ptr<Transport> transport_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex locks_mutex_;
  std::map<std::filesystem::path, std::shared_ptr<std::mutex>> locks_;
  std::set<std::filesystem::path> recorded_;  // keys written by this client
};

}  // namespace specforge::llm
