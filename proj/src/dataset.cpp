#include "agentforge/dataset.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"
#include "agentforge/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace agentforge {

using nlohmann::json;

std::string to_string(RecordOrigin origin) {
  return origin == RecordOrigin::seed_instruction ? "seed_instruction" : "refined_instruction";
}

RecordOrigin record_origin_from_string(const std::string& text) {
  if (text == "seed_instruction") return RecordOrigin::seed_instruction;
  if (text == "refined_instruction") return RecordOrigin::refined_instruction;
  throw ConfigError("unknown record origin: " + text);
}

namespace {

void check_turn_shape(const std::vector<ChatMessage>& turns) {
  if (turns.empty()) throw InvalidRequest("record has no turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Role expected = (i % 2 == 0) ? Role::user : Role::assistant;
    if (turns[i].role != expected) {
      throw InvalidRequest("record turns must alternate user/assistant");
    }
    if (is_blank(turns[i].content)) {
      throw InvalidRequest("record turn " + std::to_string(i) + " is blank");
    }
  }
  if (turns.back().role != Role::assistant) {
    throw InvalidRequest("record must end with an assistant turn");
  }
}

std::string record_content_digest(const std::string& skill,
                                  const std::optional<std::string>& system_message,
                                  const std::vector<ChatMessage>& turns) {
  std::string framed = std::to_string(skill.size()) + ":" + skill;
  const std::string sys = system_message.value_or("");
  framed += std::to_string(sys.size()) + ":" + sys;
  for (const auto& turn : turns) {
    const std::string role = to_string(turn.role);
    framed += role + std::to_string(turn.content.size()) + ":" + turn.content;
  }
  return content_digest(framed);
}

json lineage_to_json(const Lineage& lineage) {
  return json{{"seed_id", lineage.seed_id},
              {"transformation_agent", lineage.transformation_agent},
              {"instruction_agent", lineage.instruction_agent},
              {"task_type", lineage.task_type},
              {"refinement_pairs", lineage.refinement_pairs},
              {"rng_seed", lineage.rng_seed},
              {"request_tags", lineage.request_tags}};
}

Lineage lineage_from_json(const json& obj) {
  Lineage lineage;
  lineage.seed_id = obj.at("seed_id").get<std::string>();
  lineage.transformation_agent = obj.at("transformation_agent").get<std::string>();
  lineage.instruction_agent = obj.at("instruction_agent").get<std::string>();
  lineage.task_type = obj.value("task_type", "");
  lineage.refinement_pairs = obj.value("refinement_pairs", std::vector<std::string>{});
  lineage.rng_seed = obj.at("rng_seed").get<std::uint64_t>();
  lineage.request_tags = obj.value("request_tags", std::vector<std::string>{});
  return lineage;
}

json record_to_json(const InstructionRecord& record) {
  json turns = json::array();
  for (const auto& turn : record.turns) {
    turns.push_back({{"role", to_string(turn.role)}, {"content", turn.content}});
  }
  json obj;
  obj["id"] = record.id;
  obj["skill"] = record.skill;
  if (record.system_message) {
    obj["system_message"] = *record.system_message;
  } else {
    obj["system_message"] = nullptr;
  }
  obj["turns"] = std::move(turns);
  obj["lineage"] = lineage_to_json(record.lineage);
  obj["created_from"] = to_string(record.created_from);
  return obj;
}

InstructionRecord record_from_json(const json& obj) {
  InstructionRecord record;
  record.id = obj.at("id").get<std::string>();
  record.skill = obj.at("skill").get<std::string>();
  if (obj.contains("system_message") && !obj.at("system_message").is_null()) {
    record.system_message = obj.at("system_message").get<std::string>();
  }
  for (const auto& turn : obj.at("turns")) {
    record.turns.push_back({role_from_string(turn.at("role").get<std::string>()),
                            turn.at("content").get<std::string>()});
  }
  record.lineage = lineage_from_json(obj.at("lineage"));
  record.created_from = record_origin_from_string(obj.at("created_from").get<std::string>());
  return record;
}

}  // namespace

InstructionRecord make_record(std::string skill, std::optional<std::string> system_message,
                              std::vector<ChatMessage> turns, Lineage lineage,
                              RecordOrigin created_from) {
  check_turn_shape(turns);
  InstructionRecord record;
  record.id = record_content_digest(skill, system_message, turns);
  record.skill = std::move(skill);
  record.system_message = std::move(system_message);
  record.turns = std::move(turns);
  record.lineage = std::move(lineage);
  record.created_from = created_from;
  return record;
}

void canonicalize(DatasetShard& shard) {
  std::stable_sort(shard.records.begin(), shard.records.end(),
                   [](const InstructionRecord& a, const InstructionRecord& b) {
                     return a.id < b.id;
                   });
  shard.records.erase(std::unique(shard.records.begin(), shard.records.end(),
                                  [](const InstructionRecord& a, const InstructionRecord& b) {
                                    return a.id == b.id;
                                  }),
                      shard.records.end());
}

InstructionRecord respond(const SeedInstruction& instr, const AgentSpec& responder,
                          Backend& backend, const std::string& skill, Lineage lineage,
                          RecordOrigin created_from, const std::string& stage) {
  std::string user_content = instr.context ? *instr.context + "\n\n" : "";
  user_content += render_instruction(instr);

  CompletionRequest request;
  request.messages = {system_message(responder.role_prompt), user_message(user_content)};
  if (responder.temperature) request.temperature = *responder.temperature;
  if (responder.max_tokens) request.max_output_tokens = *responder.max_tokens;
  request.tag = make_tag(responder.name, instr.seed_id, stage, 0);

  CompletionResponse response = backend.complete(request);
  if (response.finish_reason == FinishReason::refused || is_blank(response.content)) {
    throw EmptyResponse("responder produced no content for tag " + request.tag);
  }
  lineage.request_tags.push_back(request.tag);

  std::vector<ChatMessage> turns = {user_message(std::move(user_content)),
                                    assistant_message(trim(response.content))};
  return make_record(skill, std::nullopt, std::move(turns), std::move(lineage), created_from);
}

namespace {

std::string normalize_for_dedup(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = true;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!last_space) out.push_back(' ');
      last_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
      last_space = false;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokenize(const std::string& normalized) {
  std::vector<std::string> tokens;
  std::istringstream in(normalized);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

std::set<std::uint64_t> shingle_set(const std::string& text, std::size_t shingle_tokens) {
  const auto tokens = tokenize(normalize_for_dedup(text));
  std::set<std::uint64_t> shingles;
  if (tokens.empty()) return shingles;
  if (tokens.size() <= shingle_tokens) {
    std::string joined;
    for (const auto& token : tokens) joined += token + " ";
    shingles.insert(fnv1a64(joined));
    return shingles;
  }
  for (std::size_t i = 0; i + shingle_tokens <= tokens.size(); ++i) {
    std::string joined;
    for (std::size_t j = 0; j < shingle_tokens; ++j) joined += tokens[i + j] + " ";
    shingles.insert(fnv1a64(joined));
  }
  return shingles;
}

const std::string& dedup_text(const InstructionRecord& record) {
  static const std::string empty;
  for (const auto& turn : record.turns) {
    if (turn.role == Role::user) return turn.content;
  }
  return empty;
}

}  // namespace

double shingle_similarity(const std::string& a, const std::string& b,
                          std::size_t shingle_tokens) {
  const auto sa = shingle_set(a, shingle_tokens);
  const auto sb = shingle_set(b, shingle_tokens);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t intersection = 0;
  for (auto value : sa) {
    if (sb.count(value)) ++intersection;
  }
  const std::size_t union_size = sa.size() + sb.size() - intersection;
  return union_size == 0 ? 1.0 : static_cast<double>(intersection) / union_size;
}

DatasetShard dedup(const std::vector<DatasetShard>& shards, const DedupPolicy& policy) {
  DatasetShard merged;
  for (const auto& shard : shards) {
    merged.records.insert(merged.records.end(), shard.records.begin(), shard.records.end());
    if (merged.metadata.flow_config_digest.empty()) {
      merged.metadata = shard.metadata;
    }
  }
  canonicalize(merged);
  if (!policy.near_dedup) {
    merged.metadata.counts["records"] = merged.records.size();
    return merged;
  }

  // Inverted index over shingles proposes candidate pairs; Jaccard decides.
  // First record in canonical order wins.
  std::vector<std::set<std::uint64_t>> shingles;
  shingles.reserve(merged.records.size());
  for (const auto& record : merged.records) {
    shingles.push_back(shingle_set(dedup_text(record), policy.shingle_tokens));
  }
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  std::vector<bool> dropped(merged.records.size(), false);
  for (std::size_t i = 0; i < merged.records.size(); ++i) {
    std::unordered_set<std::size_t> candidates;
    for (auto value : shingles[i]) {
      auto it = index.find(value);
      if (it == index.end()) continue;
      for (auto j : it->second) candidates.insert(j);
    }
    for (auto j : candidates) {
      if (dropped[j]) continue;
      std::size_t intersection = 0;
      for (auto value : shingles[i]) {
        if (shingles[j].count(value)) ++intersection;
      }
      const std::size_t union_size = shingles[i].size() + shingles[j].size() - intersection;
      const double similarity =
          union_size == 0 ? 1.0 : static_cast<double>(intersection) / union_size;
      if (similarity >= policy.jaccard_threshold) {
        dropped[i] = true;
        break;
      }
    }
    if (!dropped[i]) {
      for (auto value : shingles[i]) index[value].push_back(i);
    }
  }

  DatasetShard result;
  result.metadata = merged.metadata;
  for (std::size_t i = 0; i < merged.records.size(); ++i) {
    if (!dropped[i]) result.records.push_back(std::move(merged.records[i]));
  }
  result.metadata.counts["records"] = result.records.size();
  return result;
}

DatasetShard mix(std::vector<MixComponent> components, std::uint64_t rng_seed) {
  DatasetShard result;
  RandomStream root(rng_seed);
  for (std::size_t c = 0; c < components.size(); ++c) {
    auto& component = components[c];
    canonicalize(component.shard);
    const std::size_t available = component.shard.records.size();
    std::size_t take = 0;
    if (component.count) {
      take = *component.count;
    } else {
      const double weight = component.weight.value_or(1.0);
      if (weight <= 0.0) throw ConfigError("mix weight must be positive");
      take = static_cast<std::size_t>(weight * static_cast<double>(available) + 0.5);
      take = std::min(take, available);
    }
    if (take > available) {
      throw InsufficientSource("mix component " + std::to_string(c) + " has " +
                               std::to_string(available) + " records, need " +
                               std::to_string(take));
    }
    std::vector<std::size_t> indices(available);
    for (std::size_t i = 0; i < available; ++i) indices[i] = i;
    RandomStream rng = root.child("mix." + std::to_string(c));
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + rng.uniform_index(available - i);
      std::swap(indices[i], indices[j]);
    }
    for (std::size_t i = 0; i < take; ++i) {
      result.records.push_back(std::move(component.shard.records[indices[i]]));
    }
  }
  canonicalize(result);
  result.metadata.rng_seed = rng_seed;
  result.metadata.counts["records"] = result.records.size();
  return result;
}

StatsReport stats(const DatasetShard& shard) {
  StatsReport report;
  report.records = shard.records.size();
  for (const auto& record : shard.records) {
    ++report.by_skill[record.skill];
    if (!record.lineage.task_type.empty()) ++report.by_task_type[record.lineage.task_type];
    ++report.by_origin[to_string(record.created_from)];
    ++report.turn_histogram[record.turns.size()];
    if (!record.lineage.seed_id.empty()) ++report.seed_fanout[record.lineage.seed_id];
  }
  return report;
}

std::string stats_to_json(const StatsReport& report) {
  json obj;
  obj["records"] = report.records;
  obj["by_skill"] = report.by_skill;
  obj["by_task_type"] = report.by_task_type;
  obj["by_origin"] = report.by_origin;
  json histogram = json::object();
  for (const auto& [turns, count] : report.turn_histogram) {
    histogram[std::to_string(turns)] = count;
  }
  obj["turn_histogram"] = std::move(histogram);
  obj["seed_fanout"] = report.seed_fanout;
  return obj.dump(2);
}

void export_shard(const DatasetShard& shard, const std::filesystem::path& jsonl_path) {
  std::ofstream out(jsonl_path, std::ios::trunc);
  if (!out) throw UnreadablePath("cannot write shard: " + jsonl_path.string());
  for (const auto& record : shard.records) {
    out << record_to_json(record).dump() << "\n";
  }

  json meta;
  meta["flow_config_digest"] = shard.metadata.flow_config_digest;
  meta["rng_seed"] = shard.metadata.rng_seed;
  meta["counts"] = shard.metadata.counts;
  meta["format_version"] = shard.metadata.format_version;
  std::filesystem::path meta_path = jsonl_path;
  meta_path.replace_extension(".meta.json");
  std::ofstream meta_out(meta_path, std::ios::trunc);
  meta_out << meta.dump(2) << "\n";
}

DatasetShard import_shard(const std::filesystem::path& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw UnreadablePath("cannot read shard: " + jsonl_path.string());
  DatasetShard shard;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      shard.records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& ex) {
      throw ConfigError("shard " + jsonl_path.string() + " line " + std::to_string(line_no) +
                        ": " + ex.what());
    }
  }

  std::filesystem::path meta_path = jsonl_path;
  meta_path.replace_extension(".meta.json");
  std::ifstream meta_in(meta_path);
  if (meta_in) {
    json meta = json::parse(meta_in);
    const std::string version = meta.value("format_version", "1");
    if (version != shard.metadata.format_version) {
      throw ConfigError("shard format version mismatch: " + version);
    }
    shard.metadata.flow_config_digest = meta.value("flow_config_digest", "");
    shard.metadata.rng_seed = meta.value("rng_seed", std::uint64_t{0});
    if (meta.contains("counts")) {
      shard.metadata.counts =
          meta.at("counts").get<std::map<std::string, std::uint64_t>>();
    }
  }
  return shard;
}

}  // namespace agentforge
