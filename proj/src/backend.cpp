#include "agentforge/backend.hpp"

#include "agentforge/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace agentforge {

using nlohmann::json;

std::string to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::complete:
      return "complete";
    case FinishReason::truncated:
      return "truncated";
    case FinishReason::refused:
      return "refused";
  }
  return "complete";
}

FinishReason finish_reason_from_string(const std::string& text) {
  if (text == "complete") return FinishReason::complete;
  if (text == "truncated") return FinishReason::truncated;
  if (text == "refused") return FinishReason::refused;
  throw InvalidRequest("unknown finish_reason: " + text);
}

std::string make_tag(const std::string& agent, const std::string& seed_id,
                     const std::string& stage, int attempt) {
  return agent + "|" + seed_id + "|" + stage + "|" + std::to_string(attempt);
}

void record_usage(const CompletionResponse& response, UsageLedger& ledger) {
  ledger.prompt_tokens += response.usage.prompt_tokens;
  ledger.completion_tokens += response.usage.completion_tokens;
  ledger.responses += 1;
}

void validate_request(const CompletionRequest& request) {
  if (request.messages.empty()) {
    throw InvalidRequest("completion request has no messages");
  }
  validate_transcript(request.messages);
  if (request.temperature < 0.0 || request.temperature > 2.0) {
    throw InvalidRequest("temperature out of [0,2]");
  }
  if (request.max_output_tokens <= 0) {
    throw InvalidRequest("max_output_tokens must be positive");
  }
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UnreadablePath("cannot open fixture file: " + path.string());
  }
  std::unordered_map<std::string, CompletionResponse> fixtures;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& ex) {
      throw ConfigError("fixture file " + path.string() + " line " +
                        std::to_string(line_no) + ": " + ex.what());
    }
    CompletionResponse response;
    response.content = obj.at("content").get<std::string>();
    response.finish_reason =
        finish_reason_from_string(obj.value("finish_reason", "complete"));
    response.usage.prompt_tokens = obj.value("prompt_tokens", std::int64_t{0});
    response.usage.completion_tokens = obj.value(
        "completion_tokens", static_cast<std::int64_t>(response.content.size() / 4));
    fixtures[obj.at("tag").get<std::string>()] = std::move(response);
  }
  return ScriptedBackend(std::move(fixtures));
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  validate_request(request);
  auto it = fixtures_.find(request.tag);
  if (it == fixtures_.end()) {
    throw FixtureMissing("no fixture for tag: " + request.tag);
  }
  return it->second;
}

void write_fixture_file(const std::filesystem::path& path,
                        const std::unordered_map<std::string, CompletionResponse>& fixtures) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw UnreadablePath("cannot write fixture file: " + path.string());
  }
  for (const auto& [tag, response] : fixtures) {
    json obj;
    obj["tag"] = tag;
    obj["content"] = response.content;
    obj["finish_reason"] = to_string(response.finish_reason);
    obj["prompt_tokens"] = response.usage.prompt_tokens;
    obj["completion_tokens"] = response.usage.completion_tokens;
    out << obj.dump() << "\n";
  }
}

}  // namespace agentforge
