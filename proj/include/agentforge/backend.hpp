#pragma once

#include "agentforge/chat.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace agentforge {

enum class FinishReason { complete, truncated, refused };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& text);

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_output_tokens = 2048;
  // Replay key. Deterministic given (agent, seed id, flow stage, attempt);
  // the scripted backend resolves responses by this value alone.
  std::string tag;
};

struct CompletionResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::complete;
  TokenUsage usage;
};

// Tag derivation shared by every pipeline stage. This is the replay
// contract: a lineage entry stores these tags and a fixture file keyed by
// them reproduces the run.
std::string make_tag(const std::string& agent, const std::string& seed_id,
                     const std::string& stage, int attempt);

struct UsageLedger {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t responses = 0;

  void add(const UsageLedger& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    responses += other.responses;
  }
};

void record_usage(const CompletionResponse& response, UsageLedger& ledger);

// Chat completion seam. Implementations must be safe for concurrent calls;
// the orchestrator shares one backend across all in-flight seed tasks.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// Throws InvalidRequest unless messages are non-empty, well-formed per
// transcript rules, temperature is in [0,2] and max_output_tokens > 0.
void validate_request(const CompletionRequest& request);

// Deterministic backend resolving responses from a fixture table keyed by
// request.tag. Immutable after construction, so concurrent reads need no
// locking. Unknown tags raise FixtureMissing.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::unordered_map<std::string, CompletionResponse> fixtures)
      : fixtures_(std::move(fixtures)) {}

  // Fixture file: JSON Lines, one object per line with fields
  // tag, content, finish_reason and optional prompt_tokens/completion_tokens.
  static ScriptedBackend from_file(const std::filesystem::path& path);

  CompletionResponse complete(const CompletionRequest& request) override;

  bool has_tag(const std::string& tag) const { return fixtures_.count(tag) > 0; }
  std::size_t size() const { return fixtures_.size(); }

 private:
  const std::unordered_map<std::string, CompletionResponse> fixtures_;
};

// Writes a fixture file in the format ScriptedBackend::from_file reads.
void write_fixture_file(const std::filesystem::path& path,
                        const std::unordered_map<std::string, CompletionResponse>& fixtures);

}  // namespace agentforge
