#include "specforge/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "specforge/prompt.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace specforge::llm {

std::string_view to_string(ClientMode m) {
  switch (m) {
    case ClientMode::live: return "live";
    case ClientMode::record: return "record";
    case ClientMode::replay_strict: return "replay_strict";
    case ClientMode::replay_fallback: return "replay_fallback";
  }
  return "replay_strict";
}

std::optional<ClientMode> parse_client_mode(std::string_view s) {
  for (auto m : {ClientMode::live, ClientMode::record, ClientMode::replay_strict, ClientMode::replay_fallback}) {
    if (to_string(m) == s) return m;
  }
  if (s == "replay-strict") return ClientMode::replay_strict;
  if (s == "replay-fallback") return ClientMode::replay_fallback;
  return std::nullopt;
}

HttpError::HttpError(int status, const std::string& body)
    : Error(ErrorCode::HttpError, fmt::format("provider returned HTTP {}: {}", status, body.substr(0, 500))),
      status_(status) {}

HttpTransport::HttpTransport(double timeout_s) : timeout_s_(timeout_s) {}

HttpResult HttpTransport::post_json(const std::string& url, const std::string& body,
                                    const std::vector<std::pair<std::string, std::string>>& headers) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  HttpResult result;
  if (!std::regex_match(url, m, kUrl)) {
    result.error = "unsupported URL '" + url + "'";
    return result;
  }
  httplib::Client cli(m[1].str());
  auto secs = static_cast<time_t>(timeout_s_);
  cli.set_connection_timeout(30);
  cli.set_read_timeout(secs);
  cli.set_write_timeout(secs);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  std::string path = m[2].matched ? m[2].str() : "/";
  auto res = cli.Post(path, h, body, "application/json");
  if (!res) {
    result.error = httplib::to_string(res.error());
    return result;
  }
  result.status = res->status;
  result.body = res->body;
  if (res->has_header("Retry-After")) {
    try {
      result.retry_after_s = std::stod(res->get_header_value("Retry-After"));
    } catch (const std::exception&) {
    }
  }
  return result;
}

fs::path cache_key(const fs::path& root, const ChatRequest& req) {
  std::string d = prompt::digest(req.prompt, {req.model, req.temperature});
  return root / d / fmt::format("{}.json", req.sample_index);
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedProviderPayload, what);
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) malformed(fmt::format("field '{}' is not a string", key));
  return it->get<std::string>();
}

long long int_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (!it->is_number_integer()) malformed(fmt::format("field '{}' is not an integer", key));
  return it->get<long long>();
}

}  // namespace

std::string completion_request_body(const ChatRequest& req) {
  ordered_json body;
  body["model"] = req.model;
  body["temperature"] = req.temperature;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", req.prompt}}});
  return body.dump();
}

ChatResponse parse_completion_payload(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    malformed(std::string("provider payload is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    malformed("provider payload has no choices");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    malformed("provider payload has no message");
  }
  const auto& msg = choice["message"];
  ChatResponse r;
  r.answer = string_field(msg, "content");
  r.reasoning = string_field(msg, "reasoning_content");
  if (r.reasoning.empty()) r.reasoning = string_field(msg, "reasoning");
  if (r.reasoning.empty() && r.answer.starts_with("<think>")) {
    auto close = r.answer.find("</think>");
    if (close != std::string::npos) {
      r.reasoning = r.answer.substr(7, close - 7);
      r.answer = r.answer.substr(close + 8);
    }
  }
  if (r.answer.empty()) malformed("provider payload has an empty answer");
  if (doc.contains("usage") && doc["usage"].is_object()) {
    r.usage.prompt_tokens = int_field(doc["usage"], "prompt_tokens");
    r.usage.completion_tokens = int_field(doc["usage"], "completion_tokens");
  }
  return r;
}

std::string cache_entry_json(const ChatRequest& req, const ChatResponse& resp) {
  ordered_json e;
  e["request_digest"] = prompt::digest(req.prompt, {req.model, req.temperature});
  e["sample_index"] = req.sample_index;
  e["model"] = req.model;
  e["temperature"] = req.temperature;
  e["reasoning"] = resp.reasoning;
  e["answer"] = resp.answer;
  e["usage"] = {{"prompt_tokens", resp.usage.prompt_tokens}, {"completion_tokens", resp.usage.completion_tokens}};
  e["latency_ms"] = resp.latency_ms;
  e["recorded_at"] = resp.recorded_at;
  return e.dump(2) + "\n";
}

ChatResponse parse_cache_entry(std::string_view text, const ChatRequest& req) {
  json e;
  try {
    e = json::parse(text);
  } catch (const json::parse_error& err) {
    malformed(std::string("cache entry is not JSON: ") + err.what());
  }
  if (!e.is_object()) malformed("cache entry is not an object");
  std::string want = prompt::digest(req.prompt, {req.model, req.temperature});
  if (string_field(e, "request_digest") != want) malformed("cache entry digest does not match the request");
  if (!e.contains("sample_index") || !e["sample_index"].is_number_unsigned() ||
      e["sample_index"].get<std::size_t>() != req.sample_index) {
    malformed("cache entry sample index does not match the request");
  }
  ChatResponse r;
  r.reasoning = string_field(e, "reasoning");
  r.answer = string_field(e, "answer");
  if (e.contains("usage") && e["usage"].is_object()) {
    r.usage.prompt_tokens = int_field(e["usage"], "prompt_tokens");
    r.usage.completion_tokens = int_field(e["usage"], "completion_tokens");
  }
  r.latency_ms = int_field(e, "latency_ms");
  r.recorded_at = string_field(e, "recorded_at");
  return r;
}

Client::Client(ClientConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : std::make_shared<HttpTransport>(config_.request_timeout_s)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {}

fs::path Client::cache_key(const ChatRequest& req) const { return llm::cache_key(config_.cache_dir, req); }

std::shared_ptr<std::mutex> Client::key_lock(const fs::path& key) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = locks_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::optional<ChatResponse> Client::lookup(const ChatRequest& req) const {
  fs::path key = cache_key(req);
  if (!fs::is_regular_file(key)) return std::nullopt;
  return parse_cache_entry(util::read_file(key), req);
}

void Client::store(const ChatRequest& req, const ChatResponse& resp) {
  fs::path key = cache_key(req);
  std::string bytes = cache_entry_json(req, resp);
  if (fs::is_regular_file(key)) {
    if (util::read_file(key) == bytes) return;
    throw Error(ErrorCode::CacheConflict, "cache entry already exists with different content: " + key.string());
  }
  util::write_file_atomic(key, bytes);
}

ChatResponse Client::complete(const ChatRequest& req) { return complete(req, config_.mode); }

ChatResponse Client::complete(const ChatRequest& req, ClientMode mode) {
  switch (mode) {
    case ClientMode::live:
      return call_provider(req);
    case ClientMode::replay_strict: {
      if (auto hit = lookup(req)) return *hit;
      throw Error(ErrorCode::CacheMiss, "no cached response at " + cache_key(req).string());
    }
    case ClientMode::replay_fallback:
    case ClientMode::record: {
      fs::path key = cache_key(req);
      auto lock = key_lock(key);
      std::lock_guard guard(*lock);
      bool reuse = mode == ClientMode::replay_fallback;
      {
        std::lock_guard g(locks_mutex_);
        reuse = reuse || recorded_.contains(key);
      }
      if (reuse) {
        if (auto hit = lookup(req)) return *hit;
      }
      ChatResponse resp = call_provider(req);
      resp.recorded_at = util::utc_timestamp();
      store(req, resp);
      std::lock_guard g(locks_mutex_);
      recorded_.insert(key);
      return resp;
    }
  }
  throw Error(ErrorCode::Config, "unknown client mode");
}

ChatResponse Client::call_provider(const ChatRequest& req) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw Error(ErrorCode::AuthMissing, "environment variable " + config_.api_key_env + " is not set");

  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  std::string body = completion_request_body(req);
  std::vector<std::pair<std::string, std::string>> headers = {{"Authorization", std::string("Bearer ") + key}};

  int attempts = std::max(1, config_.retry.max_attempts);
  HttpResult last;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto start = std::chrono::steady_clock::now();
    {
      in_flight_.acquire();
      try {
        last = transport_->post_json(url, body, headers);
      } catch (...) {
        in_flight_.release();
        throw;
      }
      in_flight_.release();
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    if (last.status == 200) {
      ChatResponse r = parse_completion_payload(last.body);
      r.latency_ms = elapsed.count();
      return r;
    }
    bool retryable = last.status == 429 || last.status >= 500;
    if (!retryable) break;
    if (attempt + 1 < attempts) {
      double delay_ms = config_.retry.base_delay_ms * std::pow(2.0, attempt);
      if (last.retry_after_s) delay_ms = std::max(delay_ms, *last.retry_after_s * 1000.0);
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(delay_ms)));
    }
  }
  if (last.status == 0) throw Error(ErrorCode::HttpError, "provider request failed: " + last.error);
  if (last.status == 429) {
    throw Error(ErrorCode::RateLimited, fmt::format("provider still rate limiting after {} attempts", attempts));
  }
  throw HttpError(last.status, last.body);
}

}  // namespace specforge::llm
