#include <httplib.h>

#include "agentforge/live_backend.hpp"

#include "agentforge/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <memory>
#include <thread>

namespace agentforge {

using nlohmann::json;

namespace {

std::optional<std::string> read_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

json request_to_wire(const CompletionRequest& request, const std::string& model) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back({{"role", to_string(message.role)}, {"content", message.content}});
  }
  return json{{"model", model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens}};
}

CompletionResponse parse_wire_response(const std::string& body) {
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::exception& ex) {
    throw BackendUnavailable(std::string("malformed completion payload: ") + ex.what());
  }
  const auto& choices = payload.at("choices");
  if (!choices.is_array() || choices.empty()) {
    throw BackendUnavailable("completion payload has no choices");
  }
  const auto& choice = choices.at(0);
  CompletionResponse response;
  response.content = choice.at("message").at("content").get<std::string>();
  const std::string finish = choice.value("finish_reason", "stop");
  if (finish == "length") {
    response.finish_reason = FinishReason::truncated;
  } else if (finish == "content_filter") {
    response.finish_reason = FinishReason::refused;
  } else {
    response.finish_reason = FinishReason::complete;
  }
  if (payload.contains("usage")) {
    const auto& usage = payload.at("usage");
    response.usage.prompt_tokens = usage.value("prompt_tokens", std::int64_t{0});
    response.usage.completion_tokens = usage.value("completion_tokens", std::int64_t{0});
  }
  return response;
}

}  // namespace

LiveBackendConfig LiveBackendConfig::from_env() { return from_env(LiveBackendConfig{}); }

LiveBackendConfig LiveBackendConfig::from_env(LiveBackendConfig base) {
  if (base.endpoint.empty()) {
    if (auto endpoint = read_env("AGENTFORGE_ENDPOINT")) base.endpoint = *endpoint;
  }
  if (base.api_key.empty()) {
    if (auto key = read_env("AGENTFORGE_API_KEY")) base.api_key = *key;
  }
  if (base.model.empty()) {
    if (auto model = read_env("AGENTFORGE_MODEL")) base.model = *model;
  }
  return base;
}

std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap) {
  if (attempt < 0) attempt = 0;
  // Saturate the shift before multiplying to avoid overflow on large attempts.
  if (attempt >= 20) return cap;
  const long long scaled = base.count() * (1LL << attempt);
  return std::chrono::milliseconds(std::min<long long>(scaled, cap.count()));
}

LiveBackend::LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw ConfigError("live backend requires an endpoint (AGENTFORGE_ENDPOINT)");
  }
  if (config_.model.empty()) {
    throw ConfigError("live backend requires a model name (AGENTFORGE_MODEL)");
  }
  std::string rest = config_.endpoint;
  if (rest.rfind("https://", 0) == 0) {
    tls_ = true;
    rest = rest.substr(8);
  } else if (rest.rfind("http://", 0) == 0) {
    tls_ = false;
    rest = rest.substr(7);
  } else {
    throw ConfigError("endpoint must start with http:// or https://");
  }
  auto slash = rest.find('/');
  host_ = rest.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : rest.substr(slash);
  if (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  // Start with a single token and cap the burst at one second's allowance,
  // so request pacing starts immediately rather than after a full minute.
  bucket_tokens_ = config_.rate_limit_per_minute > 0 ? 1.0 : 0.0;
  bucket_refill_at_ = std::chrono::steady_clock::now();
}

void LiveBackend::acquire_rate_slot() {
  if (config_.rate_limit_per_minute <= 0) return;
  const double per_ms = config_.rate_limit_per_minute / 60000.0;
  const double burst_cap = std::max(1.0, config_.rate_limit_per_minute / 60.0);
  std::unique_lock lock(bucket_mutex_);
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now - bucket_refill_at_);
    bucket_refill_at_ = now;
    bucket_tokens_ = std::min(burst_cap, bucket_tokens_ + elapsed.count() * per_ms);
    if (bucket_tokens_ >= 1.0) {
      bucket_tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::milliseconds(
        static_cast<long>((1.0 - bucket_tokens_) / per_ms) + 1);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

CompletionResponse LiveBackend::complete(const CompletionRequest& request) {
  validate_request(request);
  const std::string body = request_to_wire(request, config_.model).dump();
  const std::string path = path_prefix_ + config_.completions_path;

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          backoff_delay(attempt - 1, config_.backoff_base, config_.backoff_cap));
    }
    acquire_rate_slot();

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    httplib::Result result;
    if (tls_) {
      httplib::SSLClient client(host_);
      client.set_read_timeout(config_.request_timeout);
      client.set_connection_timeout(config_.request_timeout);
      result = client.Post(path, headers, body, "application/json");
    } else {
      httplib::Client client(host_);
      client.set_read_timeout(config_.request_timeout);
      client.set_connection_timeout(config_.request_timeout);
      result = client.Post(path, headers, body, "application/json");
    }

    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 200) {
      return parse_wire_response(result->body);
    }
    if (retryable_status(result->status)) {
      last_error = "http status " + std::to_string(result->status);
      continue;
    }
    throw BackendUnavailable("completion request rejected with http status " +
                             std::to_string(result->status) + ": " + result->body);
  }
  throw BackendUnavailable("attempt budget exhausted (" +
                           std::to_string(config_.max_attempts) + "): " + last_error);
}

}  // namespace agentforge
