#include "agentforge/flow.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <optional>
#include <thread>

namespace agentforge {

using nlohmann::json;

namespace {

constexpr const char* kStageTransform = "transform";
constexpr const char* kStageInstruct = "instruct";

// Per-seed decorator that tallies usage of every completion it forwards.
// One instance per seed task, so no synchronization is needed.
class TallyBackend : public Backend {
 public:
  explicit TallyBackend(Backend& inner) : inner_(inner) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    CompletionResponse response = inner_.complete(request);
    record_usage(response, usage_);
    return response;
  }

  const UsageLedger& usage() const { return usage_; }

 private:
  Backend& inner_;
  UsageLedger usage_;
};

const AgentSpec& pick_weighted(const std::vector<AgentSpec>& agents, RandomStream& rng) {
  double total = 0.0;
  bool uniform = true;
  for (const auto& agent : agents) {
    total += agent.weight;
    if (agent.weight != agents.front().weight) uniform = false;
  }
  if (uniform) {
    return agents[rng.uniform_index(agents.size())];
  }
  double mark = rng.uniform_real() * total;
  for (const auto& agent : agents) {
    mark -= agent.weight;
    if (mark < 0.0) return agent;
  }
  return agents.back();
}

CompletionRequest agent_request(const AgentSpec& agent, std::string user_content,
                                std::string tag) {
  CompletionRequest request;
  request.messages = {system_message(agent.role_prompt), user_message(std::move(user_content))};
  if (agent.temperature) request.temperature = *agent.temperature;
  if (agent.max_tokens) request.max_output_tokens = *agent.max_tokens;
  request.tag = std::move(tag);
  return request;
}

bool unusable(const CompletionResponse& response) {
  return response.finish_reason == FinishReason::refused || is_blank(response.content);
}

SeedInstruction merge_edit(const SeedInstruction& current, const SeedInstruction& edited) {
  SeedInstruction merged = current;
  merged.task = edited.task;
  if (edited.context) merged.context = edited.context;
  if (!edited.answer_options.empty()) merged.answer_options = edited.answer_options;
  if (edited.reference_answer) merged.reference_answer = edited.reference_answer;
  return merged;
}

}  // namespace

void FlowCounters::add(const FlowCounters& other) {
  transformed += other.transformed;
  instructions_parsed += other.instructions_parsed;
  malformed_items += other.malformed_items;
  refinement_rounds += other.refinement_rounds;
  editor_failures += other.editor_failures;
  empty_suggestions += other.empty_suggestions;
  responses += other.responses;
  empty_responses += other.empty_responses;
}

TransformedSeed transform_seed(const SeedDocument& seed, const FlowConfig& flow,
                               RandomStream& rng, Backend& backend,
                               std::vector<std::string>* request_tags) {
  if (flow.transformation_agents.empty()) {
    throw ConfigError("flow has no transformation agents");
  }
  const AgentSpec& agent = pick_weighted(flow.transformation_agents, rng);

  TransformedSeed result;
  result.seed_id = seed.id;
  result.agent_name = agent.name;
  if (agent.identity) {
    result.content = seed.content;
    return result;
  }

  const std::string tag = make_tag(agent.name, seed.id, kStageTransform, 0);
  CompletionResponse response = backend.complete(agent_request(agent, seed.content, tag));
  if (request_tags) request_tags->push_back(tag);
  if (unusable(response)) {
    throw EmptyTransformation("agent " + agent.name + " produced no content for seed " +
                              seed.id);
  }
  result.content = trim(response.content);
  return result;
}

std::vector<SeedInstruction> generate_seed_instructions(const TransformedSeed& t,
                                                        const FlowConfig& flow,
                                                        RandomStream& rng, Backend& backend,
                                                        FlowCounters* counters,
                                                        std::vector<std::string>* request_tags) {
  std::vector<std::string> routed;
  if (flow.routing.empty()) {
    for (const auto& agent : flow.instruction_agents) routed.push_back(agent.name);
  } else {
    auto it = flow.routing.find(t.agent_name);
    if (it == flow.routing.end() || it->second.empty()) {
      throw ConfigError("no instruction routing for transformation agent " + t.agent_name);
    }
    routed = it->second;
  }
  if (flow.instruction_selection == InstructionSelection::uniform_one) {
    routed = {routed[rng.uniform_index(routed.size())]};
  }

  std::vector<SeedInstruction> instructions;
  for (const auto& name : routed) {
    const AgentSpec* agent = flow.find_instruction_agent(name);
    if (agent == nullptr) {
      throw ConfigError("routed instruction agent not found: " + name);
    }
    const std::string tag = make_tag(agent->name, t.seed_id, kStageInstruct, 0);
    CompletionResponse response = backend.complete(agent_request(*agent, t.content, tag));
    if (request_tags) request_tags->push_back(tag);
    if (unusable(response)) continue;
    if (response.finish_reason == FinishReason::truncated) {
      // Incomplete payloads are never parsed as structured output.
      if (counters) ++counters->malformed_items;
      continue;
    }
    ParsedItems parsed = parse_instruction_items(response.content);
    if (counters) {
      counters->malformed_items += parsed.malformed;
      counters->instructions_parsed += parsed.items.size();
    }
    for (auto& item : parsed.items) {
      item.seed_id = t.seed_id;
      item.transformation_agent = t.agent_name;
      item.instruction_agent = agent->name;
      item.task_type = agent->task_type.empty() ? agent->name : agent->task_type;
      if (!item.context) item.context = t.content;
      instructions.push_back(std::move(item));
    }
  }

  if (instructions.empty()) {
    throw NoInstructionsProduced("no instruction agent produced parseable output for seed " +
                                 t.seed_id);
  }
  return instructions;
}

RefineResult refine(const SeedInstruction& instr, const FlowConfig& flow, RandomStream& rng,
                    Backend& backend, const std::string& stage_key, FlowCounters* counters,
                    std::vector<std::string>* request_tags) {
  RefineResult result;
  result.instruction = instr;
  if (flow.max_refinement_rounds == 0 || flow.refinement_pairs.empty()) {
    return result;
  }

  for (int round = 0; round < flow.max_refinement_rounds; ++round) {
    const RefinementPair& pair =
        flow.refinement_pairs[rng.uniform_index(flow.refinement_pairs.size())];
    const std::string round_key = stage_key + ".r" + std::to_string(round);

    std::string suggester_input =
        result.instruction.context ? *result.instruction.context + "\n\n" : "";
    suggester_input += render_instruction(result.instruction);
    const std::string suggest_tag =
        make_tag(pair.suggester.name, instr.seed_id, "suggest." + round_key, 0);
    CompletionResponse suggested =
        backend.complete(agent_request(pair.suggester, suggester_input, suggest_tag));
    if (request_tags) request_tags->push_back(suggest_tag);
    if (unusable(suggested) || suggested.finish_reason == FinishReason::truncated) {
      if (counters) ++counters->empty_suggestions;
      continue;
    }
    std::vector<std::string> suggestions = parse_suggestion_list(suggested.content);
    if (suggestions.empty()) {
      if (counters) ++counters->empty_suggestions;
      continue;
    }

    const std::size_t chosen = rng.uniform_index(suggestions.size());
    std::string editor_input = suggester_input;
    editor_input += "\n\nSuggestion: " + suggestions[chosen];
    const std::string edit_tag = make_tag(pair.editor.name, instr.seed_id, "edit." + round_key, 0);
    CompletionResponse edited_response =
        backend.complete(agent_request(pair.editor, editor_input, edit_tag));
    if (request_tags) request_tags->push_back(edit_tag);

    try {
      if (unusable(edited_response) ||
          edited_response.finish_reason == FinishReason::truncated) {
        throw EditorParseFailure("editor returned no usable content");
      }
      SeedInstruction edited = parse_edited_instruction(edited_response.content);
      RefinementRound trace_round;
      trace_round.suggestions = std::move(suggestions);
      trace_round.chosen_suggestion_index = chosen;
      result.instruction = merge_edit(result.instruction, edited);
      trace_round.edited = result.instruction;
      result.trace.rounds.push_back(std::move(trace_round));
      result.pair_names.push_back(pair.name());
      if (counters) ++counters->refinement_rounds;
    } catch (const EditorParseFailure&) {
      if (counters) ++counters->editor_failures;
    }
  }
  return result;
}

namespace {

struct SeedOutcome {
  std::vector<InstructionRecord> records;
  FlowCounters counters;
  UsageLedger usage;
  std::optional<std::string> skip_reason;
};

std::string skip_label(const Error& error) {
  if (dynamic_cast<const EmptyTransformation*>(&error)) return "empty_transformation";
  if (dynamic_cast<const NoInstructionsProduced*>(&error)) return "no_instructions";
  if (dynamic_cast<const FixtureMissing*>(&error)) return "fixture_missing";
  if (dynamic_cast<const BackendUnavailable*>(&error)) return "backend_unavailable";
  return "error";
}

SeedOutcome process_seed(const SeedDocument& seed, const FlowConfig& flow,
                         std::uint64_t rng_seed, Backend& shared_backend,
                         const PipelineOptions& options) {
  SeedOutcome outcome;
  TallyBackend backend(shared_backend);
  RandomStream rng = RandomStream(rng_seed).child("seed." + seed.id);

  try {
    std::vector<std::string> seed_tags;
    TransformedSeed transformed = transform_seed(seed, flow, rng, backend, &seed_tags);
    ++outcome.counters.transformed;

    std::vector<SeedInstruction> instructions =
        generate_seed_instructions(transformed, flow, rng, backend, &outcome.counters, nullptr);

    for (std::size_t i = 0; i < instructions.size(); ++i) {
      const SeedInstruction& original = instructions[i];
      const std::string stage_key = "i" + std::to_string(i);
      const std::string instruct_tag =
          make_tag(original.instruction_agent, seed.id, kStageInstruct, 0);

      Lineage base;
      base.seed_id = seed.id;
      base.transformation_agent = original.transformation_agent;
      base.instruction_agent = original.instruction_agent;
      base.task_type = original.task_type;
      base.rng_seed = rng_seed;
      base.request_tags = seed_tags;
      base.request_tags.push_back(instruct_tag);

      std::vector<std::string> refine_tags;
      RefineResult refined =
          refine(original, flow, rng, backend, stage_key, &outcome.counters, &refine_tags);

      struct Variant {
        const SeedInstruction* instr;
        RecordOrigin origin;
        std::string respond_key;
        bool refined_variant;
      };
      std::vector<Variant> variants;
      const bool did_refine = !refined.trace.rounds.empty();
      if (!did_refine) {
        variants.push_back({&original, RecordOrigin::seed_instruction,
                            "respond." + stage_key + ".orig", false});
      } else {
        if (options.keep_originals) {
          variants.push_back({&original, RecordOrigin::seed_instruction,
                              "respond." + stage_key + ".orig", false});
        }
        variants.push_back({&refined.instruction, RecordOrigin::refined_instruction,
                            "respond." + stage_key + ".ref", true});
      }

      for (const auto& variant : variants) {
        Lineage lineage = base;
        if (variant.refined_variant) {
          lineage.refinement_pairs = refined.pair_names;
          lineage.request_tags.insert(lineage.request_tags.end(), refine_tags.begin(),
                                      refine_tags.end());
        }
        try {
          if (!flow.responder) {
            throw ConfigError("flow " + flow.skill + " has no responder agent");
          }
          ++outcome.counters.responses;
          outcome.records.push_back(respond(*variant.instr, *flow.responder, backend,
                                            flow.skill, std::move(lineage), variant.origin,
                                            variant.respond_key));
        } catch (const EmptyResponse&) {
          ++outcome.counters.empty_responses;
        }
      }
    }
  } catch (const Error& error) {
    outcome.skip_reason = skip_label(error);
  }
  outcome.usage = backend.usage();
  return outcome;
}

}  // namespace

std::string RunReport::to_json() const {
  json obj;
  obj["seeds_requested"] = seeds_requested;
  obj["seeds_completed"] = seeds_completed;
  obj["seeds_skipped"] = seeds_skipped;
  obj["skip_reasons"] = skip_reasons;
  obj["counters"] = {{"transformed", counters.transformed},
                     {"instructions_parsed", counters.instructions_parsed},
                     {"malformed_items", counters.malformed_items},
                     {"refinement_rounds", counters.refinement_rounds},
                     {"editor_failures", counters.editor_failures},
                     {"empty_suggestions", counters.empty_suggestions},
                     {"responses", counters.responses},
                     {"empty_responses", counters.empty_responses}};
  obj["usage"] = {{"prompt_tokens", usage.prompt_tokens},
                  {"completion_tokens", usage.completion_tokens},
                  {"responses", usage.responses}};
  return obj.dump(2);
}

PipelineResult run_pipeline(const CorpusManifest& manifest, const FlowConfig& flow,
                            std::size_t n_seeds, std::uint64_t rng_seed, Backend& backend,
                            const PipelineOptions& options) {
  validate_flow_config(flow);
  const std::vector<SeedDocument> seeds = sample(manifest, n_seeds, rng_seed);

  std::vector<std::optional<SeedOutcome>> outcomes(seeds.size());
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      outcomes[i] = process_seed(seeds[i], flow, rng_seed, backend, options);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
  }

  // Single-owner merge in sample order: the only place shared state meets.
  PipelineResult result;
  result.report.seeds_requested = seeds.size();
  for (auto& outcome : outcomes) {
    if (outcome->skip_reason) {
      ++result.report.seeds_skipped;
      ++result.report.skip_reasons[*outcome->skip_reason];
    } else {
      ++result.report.seeds_completed;
    }
    result.report.counters.add(outcome->counters);
    result.report.usage.add(outcome->usage);
    for (auto& record : outcome->records) {
      result.shard.records.push_back(std::move(record));
    }
  }

  if (result.shard.records.empty()) {
    throw Error("pipeline produced zero records (" +
                std::to_string(result.report.seeds_skipped) + " seeds skipped)");
  }
  canonicalize(result.shard);
  result.shard.metadata.flow_config_digest = flow_config_digest(flow);
  result.shard.metadata.rng_seed = rng_seed;
  result.shard.metadata.counts["records"] = result.shard.records.size();
  result.shard.metadata.counts["seeds"] = result.report.seeds_completed;
  return result;
}

}  // namespace agentforge
