#include "agentforge/evalbench.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"
#include "agentforge/judge_prompts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace agentforge::evalbench {

using nlohmann::json;

std::string BenchItem::id() const {
  std::string framed = skill;
  for (const auto& message : transcript) {
    framed += "\x1f" + to_string(message.role) + "\x1f" + message.content;
  }
  return content_digest(framed);
}

std::size_t BenchItem::assistant_turn_count() const {
  std::size_t count = 0;
  for (const auto& message : transcript) {
    if (message.role == Role::assistant) ++count;
  }
  return count;
}

void validate_bench_item(const BenchItem& item) {
  if (item.skill.empty()) throw InvalidRequest("bench item has no skill");
  if (item.transcript.empty()) throw InvalidRequest("bench item has an empty transcript");
  std::size_t start = 0;
  if (item.transcript.front().role == Role::system) start = 1;
  if (start >= item.transcript.size()) {
    throw InvalidRequest("bench item has no conversation turns");
  }
  for (std::size_t i = start; i < item.transcript.size(); ++i) {
    const Role expected = ((i - start) % 2 == 0) ? Role::user : Role::assistant;
    if (item.transcript[i].role != expected) {
      throw InvalidRequest("bench transcript must alternate user/assistant");
    }
  }
  if (item.transcript.back().role != Role::assistant) {
    throw InvalidRequest("bench transcript must end with an assistant turn");
  }
}

std::vector<BenchItem> load_bench_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadablePath("cannot read bench file: " + path.string());
  std::vector<BenchItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& ex) {
      throw ConfigError("bench file " + path.string() + " line " + std::to_string(line_no) +
                        ": " + ex.what());
    }
    BenchItem item;
    item.skill = obj.at("skill").get<std::string>();
    item.source = obj.value("source", "");
    for (const auto& turn : obj.at("transcript")) {
      item.transcript.push_back({role_from_string(turn.at("role").get<std::string>()),
                                 turn.at("content").get<std::string>()});
    }
    validate_bench_item(item);
    items.push_back(std::move(item));
  }
  return items;
}

void save_bench_items(const std::vector<BenchItem>& items, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UnreadablePath("cannot write bench file: " + path.string());
  for (const auto& item : items) {
    json transcript = json::array();
    for (const auto& message : item.transcript) {
      transcript.push_back({{"role", to_string(message.role)}, {"content", message.content}});
    }
    out << json{{"skill", item.skill}, {"source", item.source}, {"transcript", transcript}}.dump()
        << "\n";
  }
}

BenchScore compute_bench_score(const std::vector<TurnScorePair>& pairs) {
  if (pairs.empty()) throw InvalidRequest("bench score needs at least one turn pair");
  double teacher_sum = 0.0;
  double student_sum = 0.0;
  for (const auto& pair : pairs) {
    if (pair.teacher_score < 0.0 || pair.teacher_score > 10.0 || pair.student_score < 0.0 ||
        pair.student_score > 10.0) {
      throw InvalidRequest("turn scores must lie in [0,10]");
    }
    teacher_sum += pair.teacher_score;
    student_sum += pair.student_score;
  }
  if (teacher_sum <= 0.0) {
    throw InvalidRequest("teacher score sum must be positive");
  }
  BenchScore score;
  score.pairs = pairs;
  score.normalized_raw = 10.0 * student_sum / teacher_sum;
  score.normalized_clamped = std::clamp(score.normalized_raw, 0.0, 10.0);
  return score;
}

std::vector<std::string> generate_student_turns(const BenchItem& item, Backend& student_backend,
                                                std::vector<std::string>* request_tags) {
  validate_bench_item(item);
  const std::string item_id = item.id();
  std::vector<std::string> responses;
  std::size_t user_index = 0;
  for (std::size_t i = 0; i < item.transcript.size(); ++i) {
    if (item.transcript[i].role != Role::user) continue;
    CompletionRequest request;
    request.messages.assign(item.transcript.begin(), item.transcript.begin() + i + 1);
    request.tag = make_tag("student", item_id, "student.t" + std::to_string(user_index), 0);
    CompletionResponse response = student_backend.complete(request);
    if (request_tags) request_tags->push_back(request.tag);
    responses.push_back(response.content);
    ++user_index;
  }
  return responses;
}

double parse_turn_score(const std::string& text) {
  static const std::regex pattern(R"(Score:\s*([0-9]+(?:\.[0-9]+)?)\s*/\s*10)");
  auto begin = std::sregex_iterator(text.begin(), text.end(), pattern);
  auto end = std::sregex_iterator();
  std::optional<double> last;
  for (auto it = begin; it != end; ++it) {
    last = std::stod((*it)[1].str());
  }
  if (!last) throw JudgeParseFailure("no Score: n/10 line in judge output");
  if (*last < 0.0 || *last > 10.0) {
    throw JudgeParseFailure("turn score out of [0,10]: " + std::to_string(*last));
  }
  return *last;
}

namespace {

std::string render_history(const std::vector<ChatMessage>& history) {
  std::string out;
  for (const auto& message : history) {
    out += to_string(message.role) + ": " + message.content + "\n\n";
  }
  return out;
}

std::optional<double> judge_turn(const std::string& item_id, const std::string& stage,
                                 const std::vector<ChatMessage>& history,
                                 const std::string& candidate, Backend& judge_backend,
                                 std::vector<std::string>* request_tags) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    CompletionRequest request;
    std::string user = "Conversation:\n\n" + render_history(history);
    user += "Candidate answer:\n\n" + candidate;
    request.messages = {system_message(std::string(judge_prompts::kTurnRubricPrompt)),
                        user_message(std::move(user))};
    request.tag = make_tag("turn_judge", item_id, stage, attempt);
    CompletionResponse response = judge_backend.complete(request);
    if (request_tags) request_tags->push_back(request.tag);
    try {
      if (response.finish_reason != FinishReason::complete) {
        throw JudgeParseFailure("judge output is not a complete payload");
      }
      return parse_turn_score(response.content);
    } catch (const JudgeParseFailure&) {
      // one re-ask, then unscored
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<BenchScore> score_item(const BenchItem& item,
                                     const std::vector<std::string>& student_turns,
                                     Backend& judge_backend,
                                     std::vector<std::string>* request_tags) {
  validate_bench_item(item);
  if (student_turns.size() != item.assistant_turn_count()) {
    throw InvalidRequest("student turn count does not match assistant turn count");
  }

  const std::string item_id = item.id();
  std::vector<TurnScorePair> pairs;
  std::size_t turn = 0;
  std::vector<ChatMessage> history;
  for (const auto& message : item.transcript) {
    if (message.role != Role::assistant) {
      history.push_back(message);
      continue;
    }
    const std::string stage = "judge.t" + std::to_string(turn);
    auto teacher = judge_turn(item_id, stage + ".teacher", history, message.content,
                              judge_backend, request_tags);
    if (!teacher) return std::nullopt;
    auto student = judge_turn(item_id, stage + ".student", history, student_turns[turn],
                              judge_backend, request_tags);
    if (!student) return std::nullopt;
    pairs.push_back({turn, *teacher, *student});
    history.push_back(message);  // the teacher's answer stays canonical
    ++turn;
  }
  return compute_bench_score(pairs);
}

BenchReport aggregate_bench(const std::map<std::string, std::vector<BenchScore>>& by_skill,
                            std::size_t unscored_items) {
  BenchReport report;
  report.unscored_items = unscored_items;
  if (by_skill.empty()) throw InvalidRequest("aggregate_bench needs at least one scored item");
  double macro_sum = 0.0;
  for (const auto& [skill, scores] : by_skill) {
    if (scores.empty()) continue;
    double sum = 0.0;
    for (const auto& score : scores) sum += score.normalized_clamped;
    const double mean = sum / static_cast<double>(scores.size());
    report.per_skill_mean[skill] = mean;
    report.per_skill_items[skill] = scores.size();
    report.scored_items += scores.size();
    macro_sum += mean;
  }
  if (report.per_skill_mean.empty()) {
    throw InvalidRequest("aggregate_bench needs at least one scored item");
  }
  report.macro_average = macro_sum / static_cast<double>(report.per_skill_mean.size());
  return report;
}

std::string BenchReport::to_json() const {
  json obj;
  obj["per_skill_mean"] = per_skill_mean;
  obj["per_skill_items"] = per_skill_items;
  obj["macro_average"] = macro_average;
  obj["scored_items"] = scored_items;
  obj["unscored_items"] = unscored_items;
  return obj.dump(2);
}

double relative_improvement_percent(double candidate, double baseline) {
  if (baseline == 0.0) throw InvalidRequest("baseline must be nonzero");
  return (candidate - baseline) / baseline * 100.0;
}

std::vector<std::string> parse_mcq_answer(const std::string& text) {
  constexpr std::string_view kMarker = "Parsed Student Answer:";
  const std::size_t at = text.rfind(kMarker);
  if (at == std::string::npos) {
    throw JudgeParseFailure("no Parsed Student Answer line in judge output");
  }
  std::string rest = text.substr(at + kMarker.size());
  const std::size_t line_end = rest.find('\n');
  if (line_end != std::string::npos) rest = rest.substr(0, line_end);
  rest = trim(rest);
  if (rest.empty()) throw JudgeParseFailure("empty Parsed Student Answer");

  std::vector<std::string> raw_ids;
  if (rest.front() == '[') {
    const std::size_t close = rest.find(']');
    if (close == std::string::npos) throw JudgeParseFailure("unterminated answer list");
    std::istringstream in(rest.substr(1, close - 1));
    std::string part;
    while (std::getline(in, part, ',')) raw_ids.push_back(part);
  } else {
    std::istringstream in(rest);
    std::string part;
    while (std::getline(in, part, ',')) raw_ids.push_back(part);
  }

  std::vector<std::string> ids;
  for (const auto& raw : raw_ids) {
    std::string letters;
    for (unsigned char c : raw) {
      if (std::isalpha(c)) letters.push_back(static_cast<char>(std::toupper(c)));
    }
    if (letters.size() != 1) {
      throw JudgeParseFailure("answer id is not a single option letter: " + trim(raw));
    }
    ids.push_back(letters);
  }
  if (ids.empty()) throw JudgeParseFailure("no option ids parsed");
  return ids;
}

std::vector<std::string> extract_mcq(const std::string& question,
                                     const std::vector<std::string>& options,
                                     const std::string& student_response, Backend& judge_backend,
                                     std::vector<std::string>* request_tags) {
  if (options.size() < 2 || options.size() > 26) {
    throw InvalidRequest("mcq extraction needs 2..26 options");
  }
  std::string options_text = "[";
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) options_text += ", ";
    options_text += "(";
    options_text += static_cast<char>('A' + i);
    options_text += ") " + options[i];
  }
  options_text += " ]";

  CompletionRequest request;
  std::string user = "Input :\n\nQuestion:\n\n" + question + "\n\nStudent Response :\n\n" +
                     student_response + "\n\nOptions :\n\n" + options_text + "\n\nOutput:";
  request.messages = {system_message(std::string(judge_prompts::kMcqExtractionPrompt)),
                      user_message(std::move(user))};
  request.tag = make_tag("mcq_judge", content_digest({question, student_response}), "mcq", 0);
  CompletionResponse response = judge_backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);

  std::vector<std::string> ids = parse_mcq_answer(response.content);
  for (const auto& id : ids) {
    if (id[0] < 'A' || id[0] >= static_cast<char>('A' + options.size())) {
      throw JudgeParseFailure("parsed option " + id + " is outside the provided options");
    }
  }
  return ids;
}

bool parse_final_verdict(const std::string& text) {
  constexpr std::string_view kMarker = "Final Verdict:";
  const std::size_t at = text.rfind(kMarker);
  if (at == std::string::npos) {
    throw JudgeParseFailure("no Final Verdict line in judge output");
  }
  std::istringstream in(text.substr(at + kMarker.size()));
  std::string word;
  if (!(in >> word)) throw JudgeParseFailure("Final Verdict has no value");
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.pop_back();
  if (word == "Correct") return true;
  if (word == "Incorrect") return false;
  throw JudgeParseFailure("Final Verdict must be Correct or Incorrect, got: " + word);
}

bool verdict_exact(const std::string& question, const std::string& correct_answer,
                   const std::string& student_response, VerdictMode mode, Backend& judge_backend,
                   std::vector<std::string>* request_tags) {
  CompletionRequest request;
  std::string user;
  std::string judge_name;
  if (mode == VerdictMode::math) {
    judge_name = "math_judge";
    request.messages.push_back(
        system_message(std::string(judge_prompts::kMathExtractionPrompt)));
    user = "Question:\n\n" + question + "\n\nProblem Setter's Solution:\n\n" + correct_answer +
           "\n\nStudent's Answer:\n\n" + student_response;
  } else {
    judge_name = "general_judge";
    request.messages.push_back(
        system_message(std::string(judge_prompts::kGeneralExtractionPrompt)));
    user = "Question:\n\n" + question + "\n\nCorrect Answer:\n\n" + correct_answer +
           "\n\nStudent's Response:\n\n" + student_response;
  }
  request.messages.push_back(user_message(std::move(user)));
  request.tag =
      make_tag(judge_name, content_digest({question, correct_answer, student_response}),
               "verdict", 0);
  CompletionResponse response = judge_backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  return parse_final_verdict(response.content);
}

namespace {

// Last top-level balanced JSON object in the text, string-literal aware.
std::optional<std::string> last_json_object(const std::string& text) {
  std::optional<std::string> last;
  int depth = 0;
  bool in_string = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      if (depth > 0) in_string = true;
    } else if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}') {
      if (depth > 0 && --depth == 0) {
        last = text.substr(start, i - start + 1);
      }
    }
  }
  return last;
}

}  // namespace

std::map<std::string, double> parse_emotion_scores(const std::string& text,
                                                   const std::vector<std::string>& emotions) {
  auto body = last_json_object(text);
  if (!body) throw JudgeParseFailure("no JSON object in judge output");
  json obj;
  try {
    obj = json::parse(*body);
  } catch (const json::exception& ex) {
    throw JudgeParseFailure(std::string("emotion scores are not valid JSON: ") + ex.what());
  }

  std::map<std::string, double> scores;
  for (const auto& emotion : emotions) {
    if (!obj.contains(emotion)) {
      throw MissingEmotion("judge omitted emotion: " + emotion);
    }
    const auto& value = obj.at(emotion);
    double score = 0.0;
    if (value.is_number()) {
      score = value.get<double>();
    } else if (value.is_string()) {
      try {
        score = std::stod(value.get<std::string>());
      } catch (const std::exception&) {
        throw JudgeParseFailure("emotion score is not numeric: " + value.get<std::string>());
      }
    } else {
      throw JudgeParseFailure("emotion score has unsupported type for " + emotion);
    }
    if (score < 0.0 || score > 10.0) {
      throw JudgeParseFailure("emotion score out of [0,10] for " + emotion);
    }
    scores[emotion] = score;
  }
  return scores;
}

std::map<std::string, double> extract_eq_scores(const std::vector<std::string>& emotions,
                                                const std::string& student_response,
                                                Backend& judge_backend,
                                                std::vector<std::string>* request_tags) {
  if (emotions.size() != 4) throw InvalidRequest("eq extraction requires exactly 4 emotions");
  std::string user = "Student Agent Response:\n\n" + student_response + "\n\nEmotions:\n\n";
  for (std::size_t i = 0; i < emotions.size(); ++i) {
    if (i > 0) user += ", ";
    user += std::to_string(i + 1) + ". " + emotions[i];
  }
  CompletionRequest request;
  request.messages = {system_message(std::string(judge_prompts::kEqbenchExtractionPrompt)),
                      user_message(std::move(user))};
  request.tag = make_tag("eq_judge", content_digest(student_response), "eq", 0);
  CompletionResponse response = judge_backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  return parse_emotion_scores(response.content, emotions);
}

HallucinationVerdict parse_hallucination_verdict(const std::string& text) {
  auto body = last_json_object(text);
  if (!body) throw JudgeParseFailure("no JSON verdict in judge output");
  json obj;
  try {
    obj = json::parse(*body);
  } catch (const json::exception& ex) {
    throw JudgeParseFailure(std::string("hallucination verdict is not valid JSON: ") + ex.what());
  }
  if (!obj.contains("hallucination_detected")) {
    throw JudgeParseFailure("verdict lacks hallucination_detected");
  }
  std::string flag = obj.at("hallucination_detected").get<std::string>();
  std::transform(flag.begin(), flag.end(), flag.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  HallucinationVerdict verdict;
  if (flag == "yes") {
    verdict.detected = true;
  } else if (flag == "no") {
    verdict.detected = false;
  } else {
    throw JudgeParseFailure("hallucination_detected must be yes or no, got: " + flag);
  }

  if (obj.contains("hallucinated_span")) {
    const auto& span = obj.at("hallucinated_span");
    if (span.is_array()) {
      for (const auto& item : span) verdict.spans.push_back(item.get<std::string>());
    } else if (span.is_string() && !span.get<std::string>().empty()) {
      verdict.spans.push_back(span.get<std::string>());
    }
  }

  if (verdict.detected && verdict.spans.empty()) {
    throw InconsistentVerdict("hallucination detected but no spans given");
  }
  if (!verdict.detected && !verdict.spans.empty()) {
    throw InconsistentVerdict("no hallucination detected but spans given");
  }
  return verdict;
}

HallucinationVerdict judge_hallucination(const std::string& task, const std::string& response,
                                         Backend& judge_backend,
                                         std::vector<std::string>* request_tags) {
  std::string prompt{judge_prompts::kHallucinationJudgePrompt};
  auto substitute = [&prompt](const std::string& slot, const std::string& value) {
    const std::size_t at = prompt.find(slot);
    if (at == std::string::npos) throw ConfigError("hallucination template lacks " + slot);
    prompt.replace(at, slot.size(), value);
  };
  substitute("{{place summary task here}}", task);
  substitute("{{place response here}}", response);

  CompletionRequest request;
  request.messages = {user_message(std::move(prompt))};
  request.tag =
      make_tag("hallucination_judge", content_digest({task, response}), "halluc", 0);
  CompletionResponse reply = judge_backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  return parse_hallucination_verdict(reply.content);
}

double hallucination_rate_percent(const std::vector<HallucinationVerdict>& verdicts) {
  if (verdicts.empty()) throw InvalidRequest("hallucination rate needs a nonempty batch");
  std::size_t detected = 0;
  for (const auto& verdict : verdicts) {
    if (verdict.detected) ++detected;
  }
  return 100.0 * static_cast<double>(detected) / static_cast<double>(verdicts.size());
}

int parse_quality_rating(const std::string& text) {
  static const std::regex pattern(R"(Rating:\s*\[\[([0-9]+)\]\])");
  auto begin = std::sregex_iterator(text.begin(), text.end(), pattern);
  auto end = std::sregex_iterator();
  std::optional<int> last;
  for (auto it = begin; it != end; ++it) {
    last = std::stoi((*it)[1].str());
  }
  if (!last) throw JudgeParseFailure("no Rating: [[n]] marker in judge output");
  if (*last < 1 || *last > 10) {
    throw OutOfRangeRating("rating out of 1..10: " + std::to_string(*last));
  }
  return *last;
}

int judge_quality(const std::string& instruction, const std::string& response,
                  Backend& judge_backend, std::vector<std::string>* request_tags) {
  std::string prompt{judge_prompts::kQualityJudgePrompt};
  auto substitute = [&prompt](const std::string& slot, const std::string& value) {
    const std::size_t at = prompt.find(slot);
    if (at == std::string::npos) throw ConfigError("quality template lacks " + slot);
    prompt.replace(at, slot.size(), value);
  };
  substitute("{{place instruction here}}", instruction);
  substitute("{{place response here}}", response);

  CompletionRequest request;
  request.messages = {user_message(std::move(prompt))};
  request.tag =
      make_tag("quality_judge", content_digest({instruction, response}), "quality", 0);
  CompletionResponse reply = judge_backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  return parse_quality_rating(reply.content);
}

}  // namespace agentforge::evalbench
