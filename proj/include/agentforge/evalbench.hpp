#pragma once

#include "agentforge/backend.hpp"
#include "agentforge/chat.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentforge::evalbench {

// One held-out teacher conversation: (system?, user, assistant, user,
// assistant, ...). Students answer each user turn against the teacher's
// history; a judge grades both sides turn by turn.
struct BenchItem {
  std::string skill;
  std::vector<ChatMessage> transcript;
  std::string source;

  std::string id() const;  // transcript digest, used in request tags
  std::size_t assistant_turn_count() const;
};

void validate_bench_item(const BenchItem& item);

std::vector<BenchItem> load_bench_items(const std::filesystem::path& path);
void save_bench_items(const std::vector<BenchItem>& items, const std::filesystem::path& path);

struct TurnScorePair {
  std::size_t turn_index = 0;
  double teacher_score = 0.0;  // in [0,10]
  double student_score = 0.0;  // in [0,10]
};

struct BenchScore {
  std::vector<TurnScorePair> pairs;
  double normalized_raw = 0.0;      // 10 * sum(student) / sum(teacher)
  double normalized_clamped = 0.0;  // raw clamped to [0,10] for reporting
};

// The teacher-relative score. Requires sum(teacher) > 0.
BenchScore compute_bench_score(const std::vector<TurnScorePair>& pairs);

// Student answers for every user turn, each conditioned on the
// teacher-authored history (the teacher's assistant turns, never the
// student's own, form the context).
std::vector<std::string> generate_student_turns(const BenchItem& item, Backend& student_backend,
                                                std::vector<std::string>* request_tags = nullptr);

// Judges teacher and student responses per turn on the 0-10 rubric and
// normalizes. A turn whose judge output fails to parse is re-asked once;
// a second failure marks the item unscored (nullopt).
std::optional<BenchScore> score_item(const BenchItem& item,
                                     const std::vector<std::string>& student_turns,
                                     Backend& judge_backend,
                                     std::vector<std::string>* request_tags = nullptr);

struct BenchReport {
  std::map<std::string, double> per_skill_mean;  // clamped normalized means
  std::map<std::string, std::size_t> per_skill_items;
  double macro_average = 0.0;
  std::size_t scored_items = 0;
  std::size_t unscored_items = 0;

  std::string to_json() const;
};

BenchReport aggregate_bench(const std::map<std::string, std::vector<BenchScore>>& by_skill,
                            std::size_t unscored_items = 0);

// (candidate - baseline) / baseline, as percent.
double relative_improvement_percent(double candidate, double baseline);

// ---- Verbatim-prompt extraction judges and their exact response grammars.
// Each pure parse_* function implements the grammar alone; the judge_*/
// extract_* wrappers issue the prompt and parse the reply.

// "Score: <n>/10" — last occurrence wins.
double parse_turn_score(const std::string& text);

// "Parsed Student Answer: B" or "Parsed Student Answer: [B,C]".
std::vector<std::string> parse_mcq_answer(const std::string& text);

std::vector<std::string> extract_mcq(const std::string& question,
                                     const std::vector<std::string>& options,
                                     const std::string& student_response, Backend& judge_backend,
                                     std::vector<std::string>* request_tags = nullptr);

// "Final Verdict:" followed by Correct or Incorrect.
bool parse_final_verdict(const std::string& text);

enum class VerdictMode { math, general };

bool verdict_exact(const std::string& question, const std::string& correct_answer,
                   const std::string& student_response, VerdictMode mode, Backend& judge_backend,
                   std::vector<std::string>* request_tags = nullptr);

// Final JSON object mapping each named emotion to a revised score in [0,10].
std::map<std::string, double> parse_emotion_scores(const std::string& text,
                                                   const std::vector<std::string>& emotions);

std::map<std::string, double> extract_eq_scores(const std::vector<std::string>& emotions,
                                                const std::string& student_response,
                                                Backend& judge_backend,
                                                std::vector<std::string>* request_tags = nullptr);

struct HallucinationVerdict {
  bool detected = false;
  std::vector<std::string> spans;
};

// Final JSON verdict; "yes" requires nonempty spans, "no" requires empty.
HallucinationVerdict parse_hallucination_verdict(const std::string& text);

HallucinationVerdict judge_hallucination(const std::string& task, const std::string& response,
                                         Backend& judge_backend,
                                         std::vector<std::string>* request_tags = nullptr);

double hallucination_rate_percent(const std::vector<HallucinationVerdict>& verdicts);

// "Rating: [[n]]" with n in 1..10 — last occurrence wins.
int parse_quality_rating(const std::string& text);

int judge_quality(const std::string& instruction, const std::string& response,
                  Backend& judge_backend, std::vector<std::string>* request_tags = nullptr);

}  // namespace agentforge::evalbench
