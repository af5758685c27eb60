#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentforge {

enum class AgentStage { content_transformation, seed_instruction, suggester, editor };

enum class OutputContract {
  free_text,
  instruction_list,
  suggestion_list,
  edited_instruction,
  structured
};

std::string to_string(AgentStage stage);
AgentStage agent_stage_from_string(const std::string& text);
std::string to_string(OutputContract contract);
OutputContract output_contract_from_string(const std::string& text);

// A role-scoped prompt agent. The role prompt becomes the system message of
// every completion request the agent issues.
struct AgentSpec {
  std::string name;
  std::string role_prompt;
  std::filesystem::path role_prompt_file;  // provenance; empty for inline prompts
  AgentStage stage = AgentStage::content_transformation;
  OutputContract output_contract = OutputContract::free_text;
  // Taxonomy id this agent emits; set for seed-instruction agents.
  std::string task_type;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  double weight = 1.0;
  // Identity agents replicate their input verbatim without a backend call.
  bool identity = false;
};

struct RefinementPair {
  AgentSpec suggester;
  AgentSpec editor;

  std::string name() const { return suggester.name + "+" + editor.name; }
};

// How the seed-instruction stage engages its routed agents: all of them
// (reading-style) or one picked uniformly per seed (text-modification-style).
enum class InstructionSelection { all_routed, uniform_one };

std::string to_string(InstructionSelection selection);
InstructionSelection instruction_selection_from_string(const std::string& text);

struct FlowConfig {
  std::string skill;
  std::vector<AgentSpec> transformation_agents;
  std::vector<AgentSpec> instruction_agents;
  std::vector<RefinementPair> refinement_pairs;
  int max_refinement_rounds = 1;
  InstructionSelection instruction_selection = InstructionSelection::all_routed;
  // transformation agent name -> eligible instruction agent names
  std::map<std::string, std::vector<std::string>> routing;
  // When set, every suggestion in a refinement round yields its own edited
  // variant instead of one uniformly chosen suggestion.
  bool fan_out = false;
  // Generates assistant turns when assembling training records.
  std::optional<AgentSpec> responder;

  const AgentSpec* find_transformation_agent(const std::string& name) const;
  const AgentSpec* find_instruction_agent(const std::string& name) const;
};

// Structural checks: nonempty stages, unique names, routing targets exist,
// pair stages match. Throws ConfigError.
void validate_flow_config(const FlowConfig& flow);

// Declarative flow description on disk (JSON): agents reference role prompt
// files which are resolved relative to the config's directory.
FlowConfig load_flow_config(const std::filesystem::path& path);
void save_flow_config(const FlowConfig& flow, const std::filesystem::path& path);

// Stable digest over the resolved configuration; stored in shard metadata.
std::string flow_config_digest(const FlowConfig& flow);

// One generated task instance, traceable to its seed.
struct SeedInstruction {
  std::string seed_id;
  std::string transformation_agent;
  std::string instruction_agent;
  std::optional<std::string> context;  // passage or presented API list
  std::string task;
  std::string task_type;
  std::vector<std::string> answer_options;
  std::optional<std::string> reference_answer;
};

struct RefinementRound {
  std::vector<std::string> suggestions;
  std::size_t chosen_suggestion_index = 0;
  SeedInstruction edited;
};

struct RefinementTrace {
  std::vector<RefinementRound> rounds;
};

// Provenance attached to every emitted record: enough to replay each
// completion request from a fixture file.
struct Lineage {
  std::string seed_id;
  std::string transformation_agent;
  std::string instruction_agent;
  std::string task_type;
  std::vector<std::string> refinement_pairs;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> request_tags;
};

// Agent output parsing. Agents are prompted to reply with a numbered list
// (optionally inside a code fence); leading prose is tolerated. Within an
// item, "(A) ..." lines are answer options and a trailing "Answer: ..."
// line is the reference answer.
struct ParsedItems {
  std::vector<SeedInstruction> items;  // seed/agent fields left empty
  std::size_t malformed = 0;
};

ParsedItems parse_instruction_items(const std::string& text);

// Numbered or bulleted suggestion lines; leading prose tolerated.
std::vector<std::string> parse_suggestion_list(const std::string& text);

// Single edited instruction: either a one-item numbered list or a bare
// task text with optional option/answer lines. Throws EditorParseFailure
// when nothing usable remains.
SeedInstruction parse_edited_instruction(const std::string& text);

// Canonical plain-text rendering used as refinement input and in reports.
std::string render_instruction(const SeedInstruction& instr);

}  // namespace agentforge
