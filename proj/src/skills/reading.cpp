#include "agentforge/skills/reading.hpp"

#include "agentforge/chat.hpp"
#include "agentforge/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace agentforge::skills::reading {

const std::vector<TransformKind>& all_transform_kinds() {
  static const std::vector<TransformKind> kinds = {
      TransformKind::argument_passage,      TransformKind::debate_passage,
      TransformKind::conversation_passage,  TransformKind::meeting_transcript,
      TransformKind::poem,                  TransformKind::satirical_passage,
      TransformKind::instructional_passage, TransformKind::long_text,
      TransformKind::identity};
  return kinds;
}

const std::vector<QuestionType>& all_question_types() {
  static const std::vector<QuestionType> types = {
      QuestionType::literal_comprehension, QuestionType::numerical_discrete_reasoning,
      QuestionType::critical_true_false,   QuestionType::evaluative_essay,
      QuestionType::vocabulary_fill_blank, QuestionType::relationship_matching,
      QuestionType::sequencing_events,     QuestionType::strengthen,
      QuestionType::weaken,                QuestionType::assumption,
      QuestionType::flaw,                  QuestionType::inference_must_be_true,
      QuestionType::principle,             QuestionType::method_of_reasoning,
      QuestionType::resolve_paradox};
  return types;
}

const std::vector<RefinementGoal>& all_refinement_goals() {
  static const std::vector<RefinementGoal> goals = {RefinementGoal::make_unanswerable,
                                                    RefinementGoal::flip_answer,
                                                    RefinementGoal::complicate_question};
  return goals;
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::argument_passage: return "argument_passage";
    case TransformKind::debate_passage: return "debate_passage";
    case TransformKind::conversation_passage: return "conversation_passage";
    case TransformKind::meeting_transcript: return "meeting_transcript";
    case TransformKind::poem: return "poem";
    case TransformKind::satirical_passage: return "satirical_passage";
    case TransformKind::instructional_passage: return "instructional_passage";
    case TransformKind::long_text: return "long_text";
    case TransformKind::identity: return "identity";
  }
  return "identity";
}

std::string to_string(QuestionType type) {
  switch (type) {
    case QuestionType::literal_comprehension: return "literal_comprehension";
    case QuestionType::numerical_discrete_reasoning: return "numerical_discrete_reasoning";
    case QuestionType::critical_true_false: return "critical_true_false";
    case QuestionType::evaluative_essay: return "evaluative_essay";
    case QuestionType::vocabulary_fill_blank: return "vocabulary_fill_blank";
    case QuestionType::relationship_matching: return "relationship_matching";
    case QuestionType::sequencing_events: return "sequencing_events";
    case QuestionType::strengthen: return "strengthen";
    case QuestionType::weaken: return "weaken";
    case QuestionType::assumption: return "assumption";
    case QuestionType::flaw: return "flaw";
    case QuestionType::inference_must_be_true: return "inference_must_be_true";
    case QuestionType::principle: return "principle";
    case QuestionType::method_of_reasoning: return "method_of_reasoning";
    case QuestionType::resolve_paradox: return "resolve_paradox";
  }
  return "literal_comprehension";
}

std::string to_string(RefinementGoal goal) {
  switch (goal) {
    case RefinementGoal::make_unanswerable: return "make_unanswerable";
    case RefinementGoal::flip_answer: return "flip_answer";
    case RefinementGoal::complicate_question: return "complicate_question";
  }
  return "complicate_question";
}

TransformKind transform_kind_from_string(const std::string& text) {
  for (auto kind : all_transform_kinds()) {
    if (to_string(kind) == text) return kind;
  }
  throw ConfigError("unknown reading transform kind: " + text);
}

QuestionType question_type_from_string(const std::string& text) {
  for (auto type : all_question_types()) {
    if (to_string(type) == text) return type;
  }
  throw ConfigError("unknown reading question type: " + text);
}

RefinementGoal refinement_goal_from_string(const std::string& text) {
  for (auto goal : all_refinement_goals()) {
    if (to_string(goal) == text) return goal;
  }
  throw ConfigError("unknown reading refinement goal: " + text);
}

AnswerShape answer_shape_of(QuestionType type) {
  switch (type) {
    case QuestionType::literal_comprehension: return AnswerShape::short_answer;
    case QuestionType::numerical_discrete_reasoning: return AnswerShape::reasoning;
    case QuestionType::critical_true_false: return AnswerShape::true_false;
    case QuestionType::evaluative_essay: return AnswerShape::essay;
    case QuestionType::vocabulary_fill_blank: return AnswerShape::fill_blank;
    case QuestionType::relationship_matching: return AnswerShape::matching;
    case QuestionType::sequencing_events: return AnswerShape::ordering;
    default: return AnswerShape::multiple_choice;
  }
}

std::vector<QuestionType> eligible_question_types(TransformKind kind) {
  static const std::vector<QuestionType> universal = {
      QuestionType::literal_comprehension, QuestionType::numerical_discrete_reasoning,
      QuestionType::critical_true_false,   QuestionType::evaluative_essay,
      QuestionType::vocabulary_fill_blank, QuestionType::relationship_matching,
      QuestionType::sequencing_events};
  static const std::vector<QuestionType> argument_logic = {
      QuestionType::strengthen,    QuestionType::weaken,
      QuestionType::assumption,    QuestionType::flaw,
      QuestionType::inference_must_be_true, QuestionType::principle,
      QuestionType::method_of_reasoning,    QuestionType::resolve_paradox};

  switch (kind) {
    case TransformKind::argument_passage:
    case TransformKind::debate_passage: {
      std::vector<QuestionType> combined = universal;
      combined.insert(combined.end(), argument_logic.begin(), argument_logic.end());
      return combined;
    }
    case TransformKind::poem:
      return {QuestionType::literal_comprehension, QuestionType::critical_true_false,
              QuestionType::evaluative_essay, QuestionType::vocabulary_fill_blank,
              QuestionType::sequencing_events};
    default:
      return universal;
  }
}

namespace {

std::string read_prompt(const std::filesystem::path& prompts_dir, const std::string& name) {
  const auto path = prompts_dir / "reading" / (name + ".txt");
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("reading pack: missing role prompt file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string prompt = buffer.str();
  if (is_blank(prompt)) {
    throw ConfigError("reading pack: empty role prompt file " + path.string());
  }
  return prompt;
}

}  // namespace

FlowConfig flow_config(const std::filesystem::path& prompts_dir,
                       const std::vector<TransformKind>& enabled_transforms,
                       const std::vector<QuestionType>& enabled_question_types,
                       const std::vector<RefinementGoal>& goals) {
  if (enabled_transforms.empty() || enabled_question_types.empty()) {
    throw ConfigError("reading pack: enabled transform and question sets must be nonempty");
  }

  FlowConfig flow;
  flow.skill = "reading_comprehension";
  flow.max_refinement_rounds = 1;

  const std::set<QuestionType> enabled_types(enabled_question_types.begin(),
                                             enabled_question_types.end());

  for (auto kind : enabled_transforms) {
    AgentSpec agent;
    agent.name = to_string(kind);
    agent.stage = AgentStage::content_transformation;
    agent.output_contract = OutputContract::free_text;
    if (kind == TransformKind::identity) {
      agent.identity = true;
    } else {
      agent.role_prompt_file = prompts_dir / "reading" / ("transform_" + agent.name + ".txt");
      agent.role_prompt = read_prompt(prompts_dir, "transform_" + agent.name);
    }
    flow.transformation_agents.push_back(std::move(agent));
  }

  for (auto type : enabled_question_types) {
    AgentSpec agent;
    agent.name = to_string(type);
    agent.stage = AgentStage::seed_instruction;
    agent.output_contract = OutputContract::instruction_list;
    agent.task_type = agent.name;
    agent.role_prompt_file = prompts_dir / "reading" / ("question_" + agent.name + ".txt");
    agent.role_prompt = read_prompt(prompts_dir, "question_" + agent.name);
    flow.instruction_agents.push_back(std::move(agent));
  }

  std::set<QuestionType> reachable;
  for (auto kind : enabled_transforms) {
    std::vector<std::string> targets;
    for (auto type : eligible_question_types(kind)) {
      if (enabled_types.count(type)) {
        targets.push_back(to_string(type));
        reachable.insert(type);
      }
    }
    if (targets.empty()) {
      throw IncompatibleRouting("transform " + to_string(kind) +
                                " routes to none of the enabled question types");
    }
    flow.routing[to_string(kind)] = std::move(targets);
  }
  for (auto type : enabled_question_types) {
    if (!reachable.count(type)) {
      throw IncompatibleRouting("question type " + to_string(type) +
                                " has no eligible transform among the enabled set");
    }
  }

  for (auto goal : goals) {
    RefinementPair pair;
    const std::string goal_name = to_string(goal);
    pair.suggester.name = "suggest_" + goal_name;
    pair.suggester.stage = AgentStage::suggester;
    pair.suggester.output_contract = OutputContract::suggestion_list;
    pair.suggester.role_prompt_file = prompts_dir / "reading" / ("suggest_" + goal_name + ".txt");
    pair.suggester.role_prompt = read_prompt(prompts_dir, "suggest_" + goal_name);
    pair.editor.name = "edit_" + goal_name;
    pair.editor.stage = AgentStage::editor;
    pair.editor.output_contract = OutputContract::edited_instruction;
    pair.editor.role_prompt_file = prompts_dir / "reading" / ("edit_" + goal_name + ".txt");
    pair.editor.role_prompt = read_prompt(prompts_dir, "edit_" + goal_name);
    flow.refinement_pairs.push_back(std::move(pair));
  }

  AgentSpec responder;
  responder.name = "responder";
  responder.stage = AgentStage::seed_instruction;
  responder.output_contract = OutputContract::free_text;
  responder.role_prompt_file = prompts_dir / "responder.txt";
  {
    std::ifstream in(responder.role_prompt_file);
    if (!in) {
      throw ConfigError("missing responder prompt: " + responder.role_prompt_file.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    responder.role_prompt = buffer.str();
  }
  flow.responder = std::move(responder);

  validate_flow_config(flow);
  return flow;
}

FlowConfig default_flow_config(const std::filesystem::path& prompts_dir) {
  return flow_config(prompts_dir, all_transform_kinds(), all_question_types(),
                     all_refinement_goals());
}

ValidationReport validate_instruction(const SeedInstruction& instr) {
  ValidationReport report;
  QuestionType type;
  try {
    type = question_type_from_string(instr.task_type);
  } catch (const ConfigError&) {
    report.fail("task_type is not in the reading taxonomy: " + instr.task_type);
    return report;
  }
  if (is_blank(instr.task)) {
    report.fail("task text is empty");
  }

  switch (answer_shape_of(type)) {
    case AnswerShape::multiple_choice:
      if (instr.answer_options.size() < 2) {
        report.fail("multiple choice item needs at least 2 labeled options");
      }
      break;
    case AnswerShape::true_false:
      if (instr.answer_options.size() != 2) {
        report.fail("true/false item needs exactly 2 statements");
      }
      break;
    case AnswerShape::fill_blank:
      if (instr.task.find("___") == std::string::npos) {
        report.fail("fill-in-the-blank item is missing a blank marker");
      }
      break;
    case AnswerShape::matching: {
      const bool has_left = instr.task.find("Column A") != std::string::npos;
      const bool has_right = instr.task.find("Column B") != std::string::npos;
      if (!has_left || !has_right) {
        report.fail("matching item must present both Column A and Column B");
      }
      break;
    }
    default:
      break;
  }
  return report;
}

}  // namespace agentforge::skills::reading
