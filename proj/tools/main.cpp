#include "agentforge/cli.hpp"

#include <CLI11.hpp>

#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"agentforge: agentic instruction-data generation and evaluation"};
  app.require_subcommand(1);

  agentforge::cli::RunConfig config;
  std::vector<std::string> corpus;
  std::string flow;
  std::string prompts = "prompts";
  std::string out = "out";
  std::string fixtures;
  std::string bench;
  std::string shard;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--backend", config.backend_kind, "backend: scripted or live");
    cmd->add_option("--fixtures", fixtures, "scripted backend fixture file (JSON Lines)");
    cmd->add_option("--rng-seed", config.rng_seed, "run seed; all randomness derives from it")
        ->each([&config](const std::string&) { config.rng_seed_set = true; });
    cmd->add_option("--workers", config.workers, "concurrent seed tasks");
  };

  CLI::App* generate = app.add_subcommand("generate", "run the data generation pipeline");
  generate->add_option("--corpus", corpus, "seed corpus files or directories")->required();
  generate->add_option("--flow", flow, "flow configuration file (JSON)");
  generate->add_option("--pack", config.skill_pack,
                       "built-in pack: reading_comprehension or text_modification");
  generate->add_option("--prompts", prompts, "role prompt directory");
  generate->add_option("--seeds", config.n_seeds, "number of seeds to draw (default: all)");
  add_common(generate);

  CLI::App* score = app.add_subcommand("score", "teacher-relative bench scoring");
  score->add_option("--bench", bench, "bench items file (JSON Lines)")->required();
  add_common(score);

  CLI::App* stats = app.add_subcommand("stats", "print shard statistics");
  stats->add_option("--shard", shard, "shard file (default <out>/shard.jsonl)");
  stats->add_option("--out", out, "output directory");

  CLI::App* inspect = app.add_subcommand("inspect", "render one record with its lineage");
  inspect->add_option("--shard", shard, "shard file (default <out>/shard.jsonl)");
  inspect->add_option("--id", config.record_id, "record id")->required();
  inspect->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : agentforge::cli::kExitConfig;
  }

  for (const auto& path : corpus) config.corpus_paths.emplace_back(path);
  config.flow_config_path = flow;
  config.prompts_dir = prompts;
  config.out_dir = out;
  config.fixtures_path = fixtures;
  config.bench_path = bench;
  config.shard_path = shard;

  if (generate->parsed()) return agentforge::cli::cmd_generate(config);
  if (score->parsed()) return agentforge::cli::cmd_score(config);
  if (stats->parsed()) return agentforge::cli::cmd_stats(config);
  if (inspect->parsed()) return agentforge::cli::cmd_inspect(config);
  return agentforge::cli::kExitConfig;
}
