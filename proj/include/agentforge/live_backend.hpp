#pragma once

#include "agentforge/backend.hpp"

#include <chrono>
#include <mutex>
#include <optional>
#include <string>

namespace agentforge {

struct LiveBackendConfig {
  // e.g. "https://host" or "http://127.0.0.1:8080"; the chat completions
  // path is appended.
  std::string endpoint;
  std::string api_key;
  std::string model;
  std::string completions_path = "/v1/chat/completions";
  int max_attempts = 4;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30000};
  // Requests per minute; 0 disables the limiter.
  int rate_limit_per_minute = 0;
  std::chrono::seconds request_timeout{120};

  // Reads AGENTFORGE_ENDPOINT, AGENTFORGE_API_KEY, AGENTFORGE_MODEL.
  // Fields already set on `base` win over the environment.
  static LiveBackendConfig from_env();
  static LiveBackendConfig from_env(LiveBackendConfig base);
};

// Exponential backoff schedule: base * 2^attempt, saturating at cap.
// Nondecreasing by construction; attempt counts from 0.
std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap);

// Chat-completion wire client. Transient failures (connect errors, 408/429,
// 5xx) are retried with exponential backoff up to max_attempts; anything
// else surfaces immediately. Concurrent use is safe: only the rate-limit
// token bucket is serialized.
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveBackendConfig config);

  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  void acquire_rate_slot();

  LiveBackendConfig config_;
  std::string host_;
  std::string path_prefix_;
  bool tls_ = false;

  std::mutex bucket_mutex_;
  double bucket_tokens_ = 0.0;
  std::chrono::steady_clock::time_point bucket_refill_at_;
};

}  // namespace agentforge
