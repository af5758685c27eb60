#include "agentforge/cli.hpp"

#include "agentforge/backend.hpp"
#include "agentforge/corpus.hpp"
#include "agentforge/dataset.hpp"
#include "agentforge/error.hpp"
#include "agentforge/evalbench.hpp"
#include "agentforge/flow.hpp"
#include "agentforge/live_backend.hpp"
#include "agentforge/skills/reading.hpp"
#include "agentforge/skills/textmod.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace agentforge::cli {

using nlohmann::json;

namespace {

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
  if (config.backend_kind == "scripted") {
    if (config.fixtures_path.empty()) {
      throw ConfigError("scripted backend requires --fixtures");
    }
    if (!config.rng_seed_set) {
      throw ConfigError("scripted runs require an explicit --rng-seed");
    }
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(config.fixtures_path));
  }
  if (config.backend_kind == "live") {
    return std::make_unique<LiveBackend>(LiveBackendConfig::from_env());
  }
  throw ConfigError("unknown backend kind: " + config.backend_kind);
}

FlowConfig resolve_flow(const RunConfig& config) {
  if (!config.flow_config_path.empty()) {
    return load_flow_config(config.flow_config_path);
  }
  if (config.skill_pack == "reading_comprehension") {
    return skills::reading::default_flow_config(config.prompts_dir);
  }
  if (config.skill_pack == "text_modification") {
    return skills::textmod::default_flow_config(config.prompts_dir);
  }
  if (config.skill_pack.empty()) {
    throw ConfigError("generate needs --flow <file> or --pack <skill>");
  }
  throw ConfigError("no built-in flow for skill pack: " + config.skill_pack);
}

std::filesystem::path shard_path_of(const RunConfig& config) {
  return config.shard_path.empty() ? config.out_dir / "shard.jsonl" : config.shard_path;
}

int run_guarded(const char* name, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& error) {
    std::cerr << name << ": configuration error: " << error.what() << "\n";
    return kExitConfig;
  } catch (const Error& error) {
    std::cerr << name << ": " << error.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& error) {
    std::cerr << name << ": " << error.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_generate(const RunConfig& config) {
  return run_guarded("generate", [&config] {
    if (config.corpus_paths.empty()) throw ConfigError("generate needs --corpus");
    const FlowConfig flow = resolve_flow(config);
    auto backend = make_backend(config);

    const CorpusManifest manifest = ingest(config.corpus_paths);
    const std::size_t n_seeds =
        config.n_seeds == 0 ? manifest.size() : std::min(config.n_seeds, manifest.size());

    PipelineOptions options;
    options.workers = config.workers;
    PipelineResult result =
        run_pipeline(manifest, flow, n_seeds, config.rng_seed, *backend, options);

    DatasetShard deduped = dedup({result.shard});
    deduped.metadata = result.shard.metadata;
    deduped.metadata.counts["records"] = deduped.records.size();

    std::filesystem::create_directories(config.out_dir);
    export_shard(deduped, shard_path_of(config));
    std::ofstream report_out(config.out_dir / "report.json", std::ios::trunc);
    report_out << result.report.to_json() << "\n";

    std::cout << "generated " << deduped.records.size() << " records from "
              << result.report.seeds_completed << " seeds (" << result.report.seeds_skipped
              << " skipped)\n";
    return kExitOk;
  });
}

int cmd_score(const RunConfig& config) {
  return run_guarded("score", [&config] {
    if (config.bench_path.empty()) throw ConfigError("score needs --bench");
    auto backend = make_backend(config);

    const std::vector<evalbench::BenchItem> items = evalbench::load_bench_items(config.bench_path);
    if (items.empty()) throw Error("bench file has no items");

    std::map<std::string, std::vector<evalbench::BenchScore>> by_skill;
    json per_item = json::array();
    std::size_t unscored = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& item = items[i];
      const auto student_turns = evalbench::generate_student_turns(item, *backend);
      const auto score = evalbench::score_item(item, student_turns, *backend);
      json row;
      row["index"] = i;
      row["skill"] = item.skill;
      if (score) {
        by_skill[item.skill].push_back(*score);
        row["normalized_raw"] = score->normalized_raw;
        row["normalized"] = score->normalized_clamped;
        json pairs = json::array();
        for (const auto& pair : score->pairs) {
          pairs.push_back({{"turn", pair.turn_index},
                           {"teacher", pair.teacher_score},
                           {"student", pair.student_score}});
        }
        row["turns"] = std::move(pairs);
      } else {
        ++unscored;
        row["unscored"] = true;
      }
      per_item.push_back(std::move(row));
    }
    if (by_skill.empty()) throw Error("every bench item was unscored");

    const evalbench::BenchReport report = evalbench::aggregate_bench(by_skill, unscored);
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir / "scores.json", std::ios::trunc);
    json doc = json::parse(report.to_json());
    doc["items"] = std::move(per_item);
    out << doc.dump(2) << "\n";

    std::cout << "macro average " << report.macro_average << " over " << report.scored_items
              << " items (" << unscored << " unscored)\n";
    return kExitOk;
  });
}

int cmd_stats(const RunConfig& config) {
  return run_guarded("stats", [&config] {
    const DatasetShard shard = import_shard(shard_path_of(config));
    std::cout << stats_to_json(stats(shard)) << "\n";
    return kExitOk;
  });
}

int cmd_inspect(const RunConfig& config) {
  return run_guarded("inspect", [&config] {
    if (config.record_id.empty()) throw ConfigError("inspect needs --id");
    const DatasetShard shard = import_shard(shard_path_of(config));
    for (const auto& record : shard.records) {
      if (record.id != config.record_id) continue;
      std::cout << "id: " << record.id << "\n";
      std::cout << "skill: " << record.skill << "\n";
      std::cout << "created_from: " << to_string(record.created_from) << "\n";
      std::cout << "seed: " << record.lineage.seed_id << "\n";
      std::cout << "transformation_agent: " << record.lineage.transformation_agent << "\n";
      std::cout << "instruction_agent: " << record.lineage.instruction_agent << "\n";
      std::cout << "task_type: " << record.lineage.task_type << "\n";
      if (!record.lineage.refinement_pairs.empty()) {
        std::cout << "refinement_pairs:";
        for (const auto& name : record.lineage.refinement_pairs) std::cout << " " << name;
        std::cout << "\n";
      }
      std::cout << "rng_seed: " << record.lineage.rng_seed << "\n";
      std::cout << "replay_tags:\n";
      for (const auto& tag : record.lineage.request_tags) std::cout << "  " << tag << "\n";
      if (record.system_message) {
        std::cout << "system: " << *record.system_message << "\n";
      }
      for (const auto& turn : record.turns) {
        std::cout << to_string(turn.role) << ": " << turn.content << "\n";
      }
      return kExitOk;
    }
    throw UnknownRecordId("no record with id " + config.record_id);
  });
}

}  // namespace agentforge::cli
