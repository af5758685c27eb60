#pragma once

#include "agentforge/agents.hpp"
#include "agentforge/backend.hpp"
#include "agentforge/chat.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentforge {

enum class RecordOrigin { seed_instruction, refined_instruction };

std::string to_string(RecordOrigin origin);
RecordOrigin record_origin_from_string(const std::string& text);

// One training pair. Turns alternate user/assistant and end with assistant;
// the id is a digest of (skill, system_message, turns).
struct InstructionRecord {
  std::string id;
  std::string skill;
  std::optional<std::string> system_message;
  std::vector<ChatMessage> turns;
  Lineage lineage;
  RecordOrigin created_from = RecordOrigin::seed_instruction;
};

// Computes the id and checks the turn-shape invariant.
InstructionRecord make_record(std::string skill, std::optional<std::string> system_message,
                              std::vector<ChatMessage> turns, Lineage lineage,
                              RecordOrigin created_from);

struct ShardMetadata {
  std::string flow_config_digest;
  std::uint64_t rng_seed = 0;
  std::map<std::string, std::uint64_t> counts;
  std::string format_version = "1";
};

struct DatasetShard {
  std::vector<InstructionRecord> records;
  ShardMetadata metadata;
};

// Sorts records by id and drops duplicate ids (first occurrence wins).
void canonicalize(DatasetShard& shard);

// Pairs an instruction with responder-generated assistant turn(s).
// Blank or refused responder output raises EmptyResponse. `stage` feeds the
// request tag so concurrent instructions from one seed stay replayable.
InstructionRecord respond(const SeedInstruction& instr, const AgentSpec& responder,
                          Backend& backend, const std::string& skill, Lineage lineage,
                          RecordOrigin created_from, const std::string& stage);

struct DedupPolicy {
  bool near_dedup = false;
  double jaccard_threshold = 0.9;
  std::size_t shingle_tokens = 4;
};

// Exact dedup on id always; near-dedup on normalized first-user-turn text
// when enabled. Inputs are merged in canonical order first, so the result
// does not depend on shard list order.
DatasetShard dedup(const std::vector<DatasetShard>& shards, const DedupPolicy& policy = {});

// Normalized-token Jaccard similarity used by near-dedup; exposed for its
// oracle tests.
double shingle_similarity(const std::string& a, const std::string& b,
                          std::size_t shingle_tokens = 4);

struct MixComponent {
  DatasetShard shard;
  // Exactly one of these is set: an absolute record count, or a weight in
  // (0,1] interpreted as a fraction of the source.
  std::optional<std::size_t> count;
  std::optional<double> weight;
};

DatasetShard mix(std::vector<MixComponent> components, std::uint64_t rng_seed);

struct StatsReport {
  std::uint64_t records = 0;
  std::map<std::string, std::uint64_t> by_skill;
  std::map<std::string, std::uint64_t> by_task_type;
  std::map<std::string, std::uint64_t> by_origin;
  std::map<std::size_t, std::uint64_t> turn_histogram;
  std::map<std::string, std::uint64_t> seed_fanout;  // seed id -> records
};

StatsReport stats(const DatasetShard& shard);
std::string stats_to_json(const StatsReport& report);

// Shard files: records as JSON Lines plus a ".meta.json" sidecar.
void export_shard(const DatasetShard& shard, const std::filesystem::path& jsonl_path);
DatasetShard import_shard(const std::filesystem::path& jsonl_path);

}  // namespace agentforge
