#pragma once

#include "agentforge/agents.hpp"
#include "agentforge/backend.hpp"
#include "agentforge/corpus.hpp"
#include "agentforge/dataset.hpp"
#include "agentforge/rng.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace agentforge {

struct TransformedSeed {
  std::string seed_id;
  std::string agent_name;
  std::string content;
};

// Stage counters accumulated per seed and merged by the collector.
struct FlowCounters {
  std::uint64_t transformed = 0;
  std::uint64_t instructions_parsed = 0;
  std::uint64_t malformed_items = 0;
  std::uint64_t refinement_rounds = 0;
  std::uint64_t editor_failures = 0;
  std::uint64_t empty_suggestions = 0;
  std::uint64_t responses = 0;
  std::uint64_t empty_responses = 0;

  void add(const FlowCounters& other);
};

// Picks one transformation agent uniformly (weighted when configured) and
// rewrites the seed through it. Identity agents skip the backend. Blank or
// refused output raises EmptyTransformation.
TransformedSeed transform_seed(const SeedDocument& seed, const FlowConfig& flow,
                               RandomStream& rng, Backend& backend,
                               std::vector<std::string>* request_tags = nullptr);

// Runs the instruction agents routed for the transformation agent that
// produced `t`, in flow order. Malformed items are dropped and counted;
// raises NoInstructionsProduced when nothing parses.
std::vector<SeedInstruction> generate_seed_instructions(const TransformedSeed& t,
                                                        const FlowConfig& flow,
                                                        RandomStream& rng, Backend& backend,
                                                        FlowCounters* counters = nullptr,
                                                        std::vector<std::string>* request_tags = nullptr);

struct RefineResult {
  SeedInstruction instruction;
  RefinementTrace trace;
  std::vector<std::string> pair_names;  // pair used per applied round
};

// Iterative suggester-editor refinement. Each round picks a pair uniformly,
// the suggester proposes, one suggestion is chosen uniformly, the editor
// applies it. A failed edit discards the round and keeps the previous
// instruction. `stage_key` disambiguates request tags between instructions
// of one seed.
RefineResult refine(const SeedInstruction& instr, const FlowConfig& flow, RandomStream& rng,
                    Backend& backend, const std::string& stage_key = "i0",
                    FlowCounters* counters = nullptr,
                    std::vector<std::string>* request_tags = nullptr);

struct RunReport {
  std::uint64_t seeds_requested = 0;
  std::uint64_t seeds_completed = 0;
  std::uint64_t seeds_skipped = 0;
  std::map<std::string, std::uint64_t> skip_reasons;
  FlowCounters counters;
  UsageLedger usage;

  std::string to_json() const;
};

struct PipelineResult {
  DatasetShard shard;
  RunReport report;
};

struct PipelineOptions {
  std::size_t workers = 1;
  // Emit the pre-refinement instruction alongside each refined variant.
  bool keep_originals = true;
};

// The per-seed loop: transform, generate, refine, respond. Per-seed
// randomness derives from (rng_seed, seed id) child streams and results are
// merged in sample order, so the output is a pure function of the inputs
// regardless of worker count. Individual seed failures are skipped and
// reported; only a run that produces zero records fails.
PipelineResult run_pipeline(const CorpusManifest& manifest, const FlowConfig& flow,
                            std::size_t n_seeds, std::uint64_t rng_seed, Backend& backend,
                            const PipelineOptions& options = {});

}  // namespace agentforge
