#pragma once

#include "agentforge/agents.hpp"
#include "agentforge/validation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace agentforge::skills::reading {

// The nine passage transformations available to the reading pack.
enum class TransformKind {
  argument_passage,
  debate_passage,
  conversation_passage,
  meeting_transcript,
  poem,
  satirical_passage,
  instructional_passage,
  long_text,
  identity
};

// The fifteen question types of the reading taxonomy.
enum class QuestionType {
  literal_comprehension,
  numerical_discrete_reasoning,
  critical_true_false,
  evaluative_essay,
  vocabulary_fill_blank,
  relationship_matching,
  sequencing_events,
  strengthen,
  weaken,
  assumption,
  flaw,
  inference_must_be_true,
  principle,
  method_of_reasoning,
  resolve_paradox
};

enum class AnswerShape {
  short_answer,
  reasoning,
  true_false,
  essay,
  fill_blank,
  matching,
  ordering,
  multiple_choice
};

enum class RefinementGoal { make_unanswerable, flip_answer, complicate_question };

const std::vector<TransformKind>& all_transform_kinds();        // exactly 9
const std::vector<QuestionType>& all_question_types();          // exactly 15
const std::vector<RefinementGoal>& all_refinement_goals();      // exactly 3

std::string to_string(TransformKind kind);
std::string to_string(QuestionType type);
std::string to_string(RefinementGoal goal);
TransformKind transform_kind_from_string(const std::string& text);
QuestionType question_type_from_string(const std::string& text);
RefinementGoal refinement_goal_from_string(const std::string& text);

AnswerShape answer_shape_of(QuestionType type);

// Question types a given passage style can support. Argument-logic types
// require argumentative passages; every style supports the literal,
// vocabulary and sequencing families.
std::vector<QuestionType> eligible_question_types(TransformKind kind);

// Builds the reading flow: one transformation agent per enabled kind, one
// instruction agent per enabled question type, one suggester-editor pair
// per goal. Role prompts load from <prompts_dir>/reading/; a missing file
// fails configuration. Throws IncompatibleRouting when an enabled question
// type is reachable from none of the enabled transforms.
FlowConfig flow_config(const std::filesystem::path& prompts_dir,
                       const std::vector<TransformKind>& enabled_transforms,
                       const std::vector<QuestionType>& enabled_question_types,
                       const std::vector<RefinementGoal>& goals);

FlowConfig default_flow_config(const std::filesystem::path& prompts_dir);

// Shape checks per answer shape: option counts, blank markers, matching
// columns. Report-based; never throws.
ValidationReport validate_instruction(const SeedInstruction& instr);

// Reference label assigned when a refinement removes the information a
// question needs.
inline constexpr const char* kUnanswerableSentinel = "unanswerable";

}  // namespace agentforge::skills::reading
