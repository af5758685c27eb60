#include "agentforge/skills/textmod.hpp"

#include "agentforge/chat.hpp"
#include "agentforge/error.hpp"

#include <fstream>
#include <sstream>

namespace agentforge::skills::textmod {

const std::vector<TaskType>& all_task_types() {
  static const std::vector<TaskType> types = {
      TaskType::paraphrasing,        TaskType::simplification,
      TaskType::expansion,           TaskType::translation,
      TaskType::formatting,          TaskType::sentiment_modification,
      TaskType::annotation,          TaskType::keyword_replacement,
      TaskType::removing,            TaskType::capitalization,
      TaskType::styling,             TaskType::content_rewriting,
      TaskType::data_normalization,  TaskType::plagiarism_rewording,
      TaskType::code_switching,      TaskType::obfuscation,
      TaskType::textual_entailment,  TaskType::vocabulary_limited_rewriting};
  return types;
}

std::string to_string(TaskType type) {
  switch (type) {
    case TaskType::paraphrasing: return "paraphrasing";
    case TaskType::simplification: return "simplification";
    case TaskType::expansion: return "expansion";
    case TaskType::translation: return "translation";
    case TaskType::formatting: return "formatting";
    case TaskType::sentiment_modification: return "sentiment_modification";
    case TaskType::annotation: return "annotation";
    case TaskType::keyword_replacement: return "keyword_replacement";
    case TaskType::removing: return "removing";
    case TaskType::capitalization: return "capitalization";
    case TaskType::styling: return "styling";
    case TaskType::content_rewriting: return "content_rewriting";
    case TaskType::data_normalization: return "data_normalization";
    case TaskType::plagiarism_rewording: return "plagiarism_rewording";
    case TaskType::code_switching: return "code_switching";
    case TaskType::obfuscation: return "obfuscation";
    case TaskType::textual_entailment: return "textual_entailment";
    case TaskType::vocabulary_limited_rewriting: return "vocabulary_limited_rewriting";
  }
  return "paraphrasing";
}

TaskType task_type_from_string(const std::string& text) {
  for (auto type : all_task_types()) {
    if (to_string(type) == text) return type;
  }
  throw ConfigError("unknown text modification task type: " + text);
}

namespace {

void substitute(std::string& text, const std::string& placeholder, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

std::string read_prompt(const std::filesystem::path& prompts_dir, const std::string& name,
                        const Options& options) {
  const auto path = prompts_dir / "textmod" / (name + ".txt");
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("textmod pack: missing role prompt file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string prompt = buffer.str();
  if (is_blank(prompt)) {
    throw ConfigError("textmod pack: empty role prompt file " + path.string());
  }
  substitute(prompt, "{{primary_language}}", options.primary_language);
  substitute(prompt, "{{secondary_language}}", options.secondary_language);
  return prompt;
}

}  // namespace

FlowConfig flow_config(const std::filesystem::path& prompts_dir,
                       const std::vector<TaskType>& enabled_types, const Options& options) {
  if (enabled_types.empty()) {
    throw ConfigError("textmod pack: enabled task type set must be nonempty");
  }

  FlowConfig flow;
  flow.skill = "text_modification";
  flow.max_refinement_rounds = 1;
  // One of the task-type agents is drawn per seed, not the whole roster.
  flow.instruction_selection = InstructionSelection::uniform_one;
  flow.fan_out = options.fan_out;

  // This flow generates instructions straight from the raw text; the
  // transformation stage is a verbatim pass-through.
  AgentSpec identity;
  identity.name = "identity";
  identity.stage = AgentStage::content_transformation;
  identity.identity = true;
  flow.transformation_agents.push_back(std::move(identity));

  std::vector<std::string> all_names;
  for (auto type : enabled_types) {
    AgentSpec agent;
    agent.name = to_string(type);
    agent.stage = AgentStage::seed_instruction;
    agent.output_contract = OutputContract::instruction_list;
    agent.task_type = agent.name;
    agent.role_prompt_file = prompts_dir / "textmod" / ("task_" + agent.name + ".txt");
    agent.role_prompt = read_prompt(prompts_dir, "task_" + agent.name, options);
    all_names.push_back(agent.name);
    flow.instruction_agents.push_back(std::move(agent));
  }
  flow.routing["identity"] = std::move(all_names);

  RefinementPair pair;
  pair.suggester.name = "complexity_suggester";
  pair.suggester.stage = AgentStage::suggester;
  pair.suggester.output_contract = OutputContract::suggestion_list;
  pair.suggester.role_prompt_file = prompts_dir / "textmod" / "suggester.txt";
  pair.suggester.role_prompt = read_prompt(prompts_dir, "suggester", options);
  pair.editor.name = "complexity_editor";
  pair.editor.stage = AgentStage::editor;
  pair.editor.output_contract = OutputContract::edited_instruction;
  pair.editor.role_prompt_file = prompts_dir / "textmod" / "editor.txt";
  pair.editor.role_prompt = read_prompt(prompts_dir, "editor", options);
  flow.refinement_pairs.push_back(std::move(pair));

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
  return flow_config(prompts_dir, all_task_types());
}

std::vector<SeedInstruction> refine(const SeedInstruction& instr, const FlowConfig& flow,
                                    RandomStream& rng, Backend& backend,
                                    FlowCounters* counters,
                                    std::vector<std::string>* request_tags) {
  task_type_from_string(instr.task_type);  // precondition: taxonomy member
  if (flow.refinement_pairs.empty()) {
    throw ConfigError("textmod refine: flow has no refinement pair");
  }
  const RefinementPair& pair = flow.refinement_pairs.front();

  std::string suggester_input = instr.context ? *instr.context + "\n\n" : "";
  suggester_input += render_instruction(instr);
  const std::string suggest_tag = make_tag(pair.suggester.name, instr.seed_id, "suggest.tm", 0);
  CompletionRequest suggest_request;
  suggest_request.messages = {system_message(pair.suggester.role_prompt),
                              user_message(suggester_input)};
  suggest_request.tag = suggest_tag;
  if (pair.suggester.temperature) suggest_request.temperature = *pair.suggester.temperature;
  if (pair.suggester.max_tokens) suggest_request.max_output_tokens = *pair.suggester.max_tokens;
  CompletionResponse suggested = backend.complete(suggest_request);
  if (request_tags) request_tags->push_back(suggest_tag);

  std::vector<std::string> suggestions;
  if (suggested.finish_reason == FinishReason::complete && !is_blank(suggested.content)) {
    suggestions = parse_suggestion_list(suggested.content);
  }
  if (suggestions.empty()) {
    if (counters) ++counters->empty_suggestions;
    return {instr};
  }

  std::vector<std::size_t> selected;
  if (flow.fan_out) {
    for (std::size_t i = 0; i < suggestions.size(); ++i) selected.push_back(i);
  } else {
    selected.push_back(rng.uniform_index(suggestions.size()));
  }

  std::vector<SeedInstruction> variants;
  for (auto index : selected) {
    const std::string edit_tag =
        make_tag(pair.editor.name, instr.seed_id, "edit.tm.s" + std::to_string(index), 0);
    CompletionRequest edit_request;
    std::string editor_input = suggester_input + "\n\nSuggestion: " + suggestions[index];
    edit_request.messages = {system_message(pair.editor.role_prompt),
                             user_message(std::move(editor_input))};
    edit_request.tag = edit_tag;
    if (pair.editor.temperature) edit_request.temperature = *pair.editor.temperature;
    if (pair.editor.max_tokens) edit_request.max_output_tokens = *pair.editor.max_tokens;
    CompletionResponse edited_response = backend.complete(edit_request);
    if (request_tags) request_tags->push_back(edit_tag);
    try {
      if (edited_response.finish_reason != FinishReason::complete ||
          is_blank(edited_response.content)) {
        throw EditorParseFailure("editor returned no usable content");
      }
      SeedInstruction edited = parse_edited_instruction(edited_response.content);
      SeedInstruction variant = instr;  // context and task_type stay fixed
      variant.task = edited.task;
      if (!edited.answer_options.empty()) variant.answer_options = edited.answer_options;
      if (edited.reference_answer) variant.reference_answer = edited.reference_answer;
      variants.push_back(std::move(variant));
      if (counters) ++counters->refinement_rounds;
    } catch (const EditorParseFailure&) {
      if (counters) ++counters->editor_failures;
    }
  }
  if (variants.empty()) {
    return {instr};
  }
  return variants;
}

}  // namespace agentforge::skills::textmod
