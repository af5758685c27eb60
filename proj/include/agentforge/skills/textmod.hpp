#pragma once

#include "agentforge/agents.hpp"
#include "agentforge/backend.hpp"
#include "agentforge/flow.hpp"
#include "agentforge/rng.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace agentforge::skills::textmod {

// The eighteen text modification task types.
enum class TaskType {
  paraphrasing,
  simplification,
  expansion,
  translation,
  formatting,
  sentiment_modification,
  annotation,
  keyword_replacement,
  removing,
  capitalization,
  styling,
  content_rewriting,
  data_normalization,
  plagiarism_rewording,
  code_switching,
  obfuscation,
  textual_entailment,
  vocabulary_limited_rewriting
};

const std::vector<TaskType>& all_task_types();  // exactly 18

std::string to_string(TaskType type);
TaskType task_type_from_string(const std::string& text);

struct Options {
  // Language pair for translation and code-switching prompts.
  std::string primary_language = "English";
  std::string secondary_language = "Spanish";
  bool fan_out = true;
};

// Builds the text modification flow: an identity transformation stage, one
// instruction agent per enabled task type, and exactly one suggester-editor
// refinement pair.
FlowConfig flow_config(const std::filesystem::path& prompts_dir,
                       const std::vector<TaskType>& enabled_types, const Options& options = {});

FlowConfig default_flow_config(const std::filesystem::path& prompts_dir);

// One suggester pass over (text, task); with fan_out every suggestion is
// edited into its own variant, otherwise one suggestion is chosen uniformly.
// Edits that fail to parse are dropped; an empty suggestion list returns the
// original instruction alone. Context and task_type are preserved on every
// variant.
std::vector<SeedInstruction> refine(const SeedInstruction& instr, const FlowConfig& flow,
                                    RandomStream& rng, Backend& backend,
                                    FlowCounters* counters = nullptr,
                                    std::vector<std::string>* request_tags = nullptr);

}  // namespace agentforge::skills::textmod
