#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace agentforge::cli {

// Exit code contract: stable for automation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 2 - 1;  // operational failure
inline constexpr int kExitConfig = 2;       // configuration error

struct RunConfig {
  std::vector<std::filesystem::path> corpus_paths;
  std::filesystem::path flow_config_path;
  std::string skill_pack;  // alternative to a flow file: reading_comprehension | text_modification
  std::filesystem::path prompts_dir = "prompts";
  std::filesystem::path out_dir = "out";
  std::string backend_kind = "scripted";  // scripted | live
  std::filesystem::path fixtures_path;    // scripted backend fixture file
  std::filesystem::path bench_path;
  std::filesystem::path shard_path;  // defaults to <out>/shard.jsonl
  std::string record_id;
  std::uint64_t rng_seed = 0;
  bool rng_seed_set = false;
  std::size_t n_seeds = 0;  // 0 -> whole manifest
  std::size_t workers = 1;
};

// ingest -> run_pipeline (responder included) -> dedup -> export.
// Writes <out>/shard.jsonl, <out>/shard.meta.json and <out>/report.json.
int cmd_generate(const RunConfig& config);

// generate_student_turns -> score_item -> aggregate; writes <out>/scores.json.
int cmd_score(const RunConfig& config);

// Prints the stats report for a shard.
int cmd_stats(const RunConfig& config);

// Renders one record by id with its lineage and replay tags.
int cmd_inspect(const RunConfig& config);

}  // namespace agentforge::cli
