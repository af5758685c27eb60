#include "agentforge/skills/tooluse.hpp"

#include "agentforge/chat.hpp"
#include "agentforge/dataset.hpp"
#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace agentforge::skills::tooluse {

using nlohmann::json;

std::vector<std::string> ApiSpec::required_parameter_names() const {
  std::vector<std::string> names;
  for (const auto& parameter : parameters) {
    if (parameter.required) names.push_back(parameter.name);
  }
  return names;
}

bool ApiSpec::has_parameter(const std::string& name) const {
  for (const auto& parameter : parameters) {
    if (parameter.name == name) return true;
  }
  return false;
}

namespace {

ApiSpec api_spec_from_json_value(const json& obj) {
  if (!obj.is_object()) throw ApiParseFailure("API spec is not a JSON object");
  ApiSpec spec;
  try {
    spec.name = obj.at("name").get<std::string>();
    spec.description = obj.value("description", "");
    if (obj.contains("parameters")) {
      const auto& parameters = obj.at("parameters");
      std::set<std::string> required;
      for (const auto& name : parameters.value("required", json::array())) {
        required.insert(name.get<std::string>());
      }
      std::set<std::string> seen;
      const json properties = parameters.value("properties", json::object());
      for (const auto& [pname, pdef] : properties.items()) {
        if (!seen.insert(pname).second) {
          throw ApiParseFailure("duplicate parameter name: " + pname);
        }
        ApiParameter parameter;
        parameter.name = pname;
        parameter.type_tag = pdef.value("type", "string");
        parameter.description = pdef.value("description", "");
        parameter.required = required.count(pname) > 0;
        spec.parameters.push_back(std::move(parameter));
      }
    }
  } catch (const json::exception& ex) {
    throw ApiParseFailure(std::string("API spec shape error: ") + ex.what());
  }
  if (spec.name.empty()) throw ApiParseFailure("API spec has an empty name");
  return spec;
}

json api_spec_to_json_value(const ApiSpec& spec) {
  json properties = json::object();
  std::vector<std::string> required_names;
  for (const auto& parameter : spec.parameters) {
    properties[parameter.name] = {{"type", parameter.type_tag},
                                  {"description", parameter.description}};
    if (parameter.required) required_names.push_back(parameter.name);
  }
  // canonical form: required listed in sorted order, matching properties
  std::sort(required_names.begin(), required_names.end());
  json required = json::array();
  for (const auto& name : required_names) required.push_back(name);
  return json{{"name", spec.name},
              {"description", spec.description},
              {"parameters",
               {{"type", "object"}, {"properties", properties}, {"required", required}}}};
}

// First balanced bracketed span, string-literal aware.
std::optional<std::string> extract_balanced(const std::string& text, char open, char close) {
  const std::size_t start = text.find(open);
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == open) {
      ++depth;
    } else if (c == close) {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

ApiSpec api_spec_from_json(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ApiParseFailure(std::string("API spec is not valid JSON: ") + ex.what());
  }
  return api_spec_from_json_value(obj);
}

std::string api_spec_to_json(const ApiSpec& spec) { return api_spec_to_json_value(spec).dump(); }

std::string library_to_json(const std::vector<ApiSpec>& library) {
  json array = json::array();
  for (const auto& spec : library) array.push_back(api_spec_to_json_value(spec));
  return array.dump();
}

std::vector<ApiSpec> library_from_json(const std::string& json_text) {
  json array;
  try {
    array = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ApiParseFailure(std::string("API library is not valid JSON: ") + ex.what());
  }
  if (!array.is_array()) throw ApiParseFailure("API library is not a JSON array");
  std::vector<ApiSpec> library;
  for (const auto& item : array) library.push_back(api_spec_from_json_value(item));
  return library;
}

std::vector<ApiSpec> load_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadablePath("cannot read API library: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return library_from_json(text);
}

void save_library(const std::vector<ApiSpec>& library, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UnreadablePath("cannot write API library: " + path.string());
  out << json::parse(library_to_json(library)).dump(2) << "\n";
}

const std::vector<TaskType>& all_task_types() {
  static const std::vector<TaskType> types = {
      TaskType::single_all_params,  TaskType::single_superfluous_params,
      TaskType::single_missing_params, TaskType::multi_all_params,
      TaskType::multi_missing_params,  TaskType::single_api_unavailable,
      TaskType::multi_api_unavailable};
  return types;
}

std::string to_string(TaskType type) {
  switch (type) {
    case TaskType::single_all_params: return "single_all_params";
    case TaskType::single_superfluous_params: return "single_superfluous_params";
    case TaskType::single_missing_params: return "single_missing_params";
    case TaskType::multi_all_params: return "multi_all_params";
    case TaskType::multi_missing_params: return "multi_missing_params";
    case TaskType::single_api_unavailable: return "single_api_unavailable";
    case TaskType::multi_api_unavailable: return "multi_api_unavailable";
  }
  return "single_all_params";
}

TaskType task_type_from_string(const std::string& text) {
  for (auto type : all_task_types()) {
    if (to_string(type) == text) return type;
  }
  throw ConfigError("unknown tool task type: " + text);
}

bool expects_final_answer(TaskType type) {
  switch (type) {
    case TaskType::single_all_params:
    case TaskType::single_superfluous_params:
    case TaskType::multi_all_params:
      return true;
    default:
      return false;
  }
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Splits "k=v, k2=v2" at top-level commas, honoring quotes and brackets.
std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      current.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        current.push_back(text[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        current.push_back(c);
        break;
      case '(':
      case '[':
      case '{':
        ++depth;
        current.push_back(c);
        break;
      case ')':
      case ']':
      case '}':
        --depth;
        current.push_back(c);
        break;
      case ',':
        if (depth == 0) {
          parts.push_back(current);
          current.clear();
        } else {
          current.push_back(c);
        }
        break;
      default:
        current.push_back(c);
    }
  }
  if (!trim(current).empty()) parts.push_back(current);
  return parts;
}

}  // namespace

ToolAction parse_action(const std::string& text) {
  const auto lines = split_lines(text);

  std::optional<std::size_t> type_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).rfind("ACTION_TYPE", 0) == 0) {
      type_line = i;
      break;
    }
  }
  if (!type_line) throw ActionParseFailure("missing ACTION_TYPE line");

  std::string type_rest = trim(lines[*type_line]).substr(11);
  type_rest = trim(type_rest);
  if (type_rest.empty() || type_rest[0] != ':') {
    throw ActionParseFailure("malformed ACTION_TYPE line");
  }
  type_rest = trim(type_rest.substr(1));

  ToolAction action;
  if (type_rest == "API_CALL") {
    action.kind = ActionKind::api_call;
  } else if (type_rest == "STOP") {
    action.kind = ActionKind::stop;
  } else {
    throw ActionParseFailure("ACTION_TYPE must be API_CALL or STOP, got: " + type_rest);
  }

  std::optional<std::string> action_line;
  for (std::size_t i = *type_line + 1; i < lines.size(); ++i) {
    const std::string stripped = trim(lines[i]);
    if (stripped.empty() || stripped.rfind("```", 0) == 0) continue;
    action_line = stripped;
    break;
  }
  if (!action_line || action_line->rfind("ACTION", 0) != 0) {
    throw ActionParseFailure("ACTION line must follow ACTION_TYPE");
  }
  std::string rest = trim(action_line->substr(6));
  if (rest.empty() || rest[0] != ':') throw ActionParseFailure("malformed ACTION line");
  rest = trim(rest.substr(1));

  const std::size_t open = rest.find('(');
  const std::size_t close = rest.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ActionParseFailure("ACTION line must be name(arguments)");
  }
  action.name = trim(rest.substr(0, open));
  if (action.name.empty()) throw ActionParseFailure("ACTION has an empty name");
  const std::string args_text = rest.substr(open + 1, close - open - 1);

  if (action.kind == ActionKind::stop) {
    if (action.name != "FINAL_ANSWER" && action.name != "FAILED") {
      throw ActionParseFailure("STOP action must be FINAL_ANSWER or FAILED, got: " +
                               action.name);
    }
    if (trim(args_text).empty()) {
      throw ActionParseFailure("STOP action requires exactly one argument");
    }
    action.arguments.emplace_back("", trim(args_text));
    return action;
  }

  for (const auto& part : split_top_level(args_text)) {
    const std::string entry = trim(part);
    if (entry.empty()) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ActionParseFailure("API_CALL argument must be name=value: " + entry);
    }
    action.arguments.emplace_back(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
  }
  return action;
}

std::string format_action(const ToolAction& action) {
  std::string out = "ACTION_TYPE : ";
  out += action.kind == ActionKind::api_call ? "API_CALL" : "STOP";
  out += "\nACTION: " + action.name + "(";
  if (action.kind == ActionKind::stop) {
    if (!action.arguments.empty()) out += action.arguments.front().second;
  } else {
    for (std::size_t i = 0; i < action.arguments.size(); ++i) {
      if (i > 0) out += ", ";
      out += action.arguments[i].first + "=" + action.arguments[i].second;
    }
  }
  out += ")";
  return out;
}

namespace {

std::string normalize_value(const std::string& raw) {
  const std::string value = trim(raw);
  if (value.empty()) return "\"\"";
  if (value.front() == '"' || value.front() == '[' || value.front() == '{') return value;
  if (value == "true" || value == "false" || value == "null") return value;

  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end == value.c_str() + value.size() && std::isfinite(parsed)) {
    if (parsed == std::floor(parsed) && std::fabs(parsed) < 9.0e15) {
      char buffer[32];
      std::snprintf(buffer, sizeof buffer, "%" PRId64, static_cast<std::int64_t>(parsed));
      return buffer;
    }
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.10g", parsed);
    return buffer;
  }
  return "\"" + value + "\"";
}

}  // namespace

std::string canonicalize_arguments(
    const std::vector<std::pair<std::string, std::string>>& args) {
  std::vector<std::pair<std::string, std::string>> sorted = args;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& [key, value] : sorted) {
    if (!out.empty()) out += ", ";
    if (key.empty()) {
      out += normalize_value(value);
    } else {
      out += key + "=" + normalize_value(value);
    }
  }
  return out;
}

SimulatedExecutor SimulatedExecutor::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadablePath("cannot open executor fixture file: " + path.string());
  std::map<std::pair<std::string, std::string>, std::string> table;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    json obj = json::parse(line);
    table[{obj.at("api").get<std::string>(), obj.at("args_canonical").get<std::string>()}] =
        obj.at("response").get<std::string>();
  }
  return SimulatedExecutor(std::move(table));
}

std::string SimulatedExecutor::execute(
    const std::string& api, const std::vector<std::pair<std::string, std::string>>& args) const {
  const std::string canonical = canonicalize_arguments(args);
  auto it = table_.find({api, canonical});
  if (it != table_.end()) return it->second;
  json echo;
  echo["status"] = "success";
  echo["api"] = api;
  json arguments = json::object();
  for (const auto& [key, value] : args) arguments[key] = value;
  echo["arguments"] = std::move(arguments);
  return echo.dump();
}

Prompts load_prompts(const std::filesystem::path& prompts_dir) {
  auto read = [&prompts_dir](const std::string& name) {
    const auto path = prompts_dir / "tooluse" / (name + ".txt");
    std::ifstream in(path);
    if (!in) throw ConfigError("tooluse pack: missing prompt file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (is_blank(buffer.str())) {
      throw ConfigError("tooluse pack: empty prompt file " + path.string());
    }
    return buffer.str();
  };
  Prompts prompts;
  prompts.api_synthesis = read("api_synthesis");
  prompts.library_hypothesize = read("library_hypothesize");
  prompts.conversation_system = read("conversation_system");
  for (auto type : all_task_types()) {
    prompts.task_prompts[type] = read("task_" + to_string(type));
  }
  prompts.suggester = read("suggester");
  prompts.editor = read("editor");
  return prompts;
}

ApiSpec synthesize_api_from_code(const SeedDocument& seed, const Prompts& prompts,
                                 Backend& backend, std::vector<std::string>* request_tags) {
  if (seed.kind != SeedKind::code) {
    throw InvalidRequest("api synthesis requires a code seed");
  }
  CompletionRequest request;
  request.messages = {system_message(prompts.api_synthesis), user_message(seed.content)};
  request.tag = make_tag("api_synthesis", seed.id, "toolspec", 0);
  CompletionResponse response = backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  if (response.finish_reason != FinishReason::complete) {
    throw ApiParseFailure("api synthesis output is not a complete payload");
  }
  auto body = extract_balanced(response.content, '{', '}');
  if (!body) throw ApiParseFailure("no JSON object in api synthesis output");
  return api_spec_from_json(*body);
}

std::vector<std::string> similar_code_ids(const CorpusManifest& corpus, const std::string& query,
                                          std::size_t top_k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& doc : corpus.documents) {
    if (doc.kind != SeedKind::code) continue;
    scored.emplace_back(shingle_similarity(query, doc.content, 2), doc.id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < scored.size() && i < top_k; ++i) ids.push_back(scored[i].second);
  return ids;
}

std::vector<ApiSpec> reconstruct_library(const ApiSpec& seed, ReconstructionStrategy strategy,
                                         std::size_t target_count, const Prompts& prompts,
                                         Backend& backend, RandomStream& rng,
                                         const CorpusManifest* corpus,
                                         ReconstructionCounters* counters,
                                         std::vector<std::string>* request_tags) {
  (void)rng;
  if (target_count < 1) throw ConfigError("reconstruct_library: target_count must be >= 1");
  std::vector<ApiSpec> library = {seed};
  std::set<std::string> names = {seed.name};
  auto admit = [&](ApiSpec spec) {
    if (library.size() >= target_count) return;
    if (!names.insert(spec.name).second) {
      if (counters) ++counters->duplicate_names;
      return;
    }
    library.push_back(std::move(spec));
  };

  const std::string lib_seed_id = content_digest(api_spec_to_json(seed));
  if (strategy == ReconstructionStrategy::hypothesize) {
    CompletionRequest request;
    std::string user = "Seed API:\n" + api_spec_to_json(seed) + "\n\nPropose up to " +
                       std::to_string(target_count - 1) + " additional APIs from this library.";
    request.messages = {system_message(prompts.library_hypothesize), user_message(user)};
    request.tag = make_tag("library_hypothesize", lib_seed_id, "toollib", 0);
    CompletionResponse response = backend.complete(request);
    if (request_tags) request_tags->push_back(request.tag);
    if (response.finish_reason != FinishReason::complete) {
      throw ApiParseFailure("library hypothesis output is not a complete payload");
    }
    auto body = extract_balanced(response.content, '[', ']');
    if (!body) throw ApiParseFailure("no JSON array in library hypothesis output");
    json array;
    try {
      array = json::parse(*body);
    } catch (const json::exception& ex) {
      throw ApiParseFailure(std::string("library hypothesis is not valid JSON: ") + ex.what());
    }
    for (const auto& item : array) {
      try {
        admit(api_spec_from_json_value(item));
      } catch (const ApiParseFailure&) {
        if (counters) ++counters->malformed_specs;
      }
    }
  } else {
    if (corpus == nullptr) {
      throw ConfigError("retrieval strategy requires a corpus manifest");
    }
    const auto ids =
        similar_code_ids(*corpus, seed.name + " " + seed.description, target_count * 2);
    for (const auto& id : ids) {
      if (library.size() >= target_count) break;
      const SeedDocument* doc = corpus->find(id);
      if (doc == nullptr) continue;
      try {
        admit(synthesize_api_from_code(*doc, prompts, backend, request_tags));
      } catch (const ApiParseFailure&) {
        if (counters) ++counters->malformed_specs;
      }
    }
  }

  if (library.size() < 2) {
    throw LibraryTooSmall("library reconstruction produced only " +
                          std::to_string(library.size()) + " spec(s)");
  }
  return library;
}

ToolTaskPlan plan_from_json(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ApiParseFailure(std::string("task plan is not valid JSON: ") + ex.what());
  }
  ToolTaskPlan plan;
  try {
    plan.apis = obj.at("apis").get<std::vector<std::string>>();
    const json provided = obj.value("provided", json::object());
    for (const auto& [key, value] : provided.items()) {
      plan.provided[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  } catch (const json::exception& ex) {
    throw ApiParseFailure(std::string("task plan shape error: ") + ex.what());
  }
  return plan;
}

std::string plan_to_json(const ToolTaskPlan& plan) {
  json obj;
  obj["apis"] = plan.apis;
  json provided = json::object();
  for (const auto& [key, value] : plan.provided) provided[key] = value;
  obj["provided"] = std::move(provided);
  return obj.dump();
}

std::optional<TaskType> classify_tool_task(const ToolTaskPlan& plan,
                                           const std::vector<std::string>& presented_names,
                                           const std::vector<ApiSpec>& library) {
  if (plan.apis.empty()) return std::nullopt;
  const std::set<std::string> presented(presented_names.begin(), presented_names.end());
  const bool multi = plan.apis.size() > 1;

  auto find_spec = [&library](const std::string& name) -> const ApiSpec* {
    for (const auto& spec : library) {
      if (spec.name == name) return &spec;
    }
    return nullptr;
  };

  // Targets must exist in the (full) library; an unknown name is not a
  // classification, it is a broken plan.
  for (const auto& name : plan.apis) {
    if (find_spec(name) == nullptr) return std::nullopt;
  }

  bool any_unavailable = false;
  for (const auto& name : plan.apis) {
    if (!presented.count(name)) any_unavailable = true;
  }
  if (any_unavailable) {
    return multi ? TaskType::multi_api_unavailable : TaskType::single_api_unavailable;
  }

  bool any_missing = false;
  for (const auto& name : plan.apis) {
    for (const auto& required : find_spec(name)->required_parameter_names()) {
      if (!plan.provided.count(required)) any_missing = true;
    }
  }
  if (multi) {
    return any_missing ? TaskType::multi_missing_params : TaskType::multi_all_params;
  }
  if (any_missing) return TaskType::single_missing_params;

  const ApiSpec* target = find_spec(plan.apis.front());
  for (const auto& [key, value] : plan.provided) {
    if (!target->has_parameter(key)) return TaskType::single_superfluous_params;
  }
  return TaskType::single_all_params;
}

ValidationReport validate_tool_task(const SeedInstruction& task,
                                    const std::vector<ApiSpec>& library) {
  ValidationReport report;
  if (is_blank(task.task)) report.fail("task text is empty");

  std::vector<std::string> presented_names;
  if (!task.context) {
    report.fail("task has no presented API list in context");
  } else {
    try {
      for (const auto& spec : library_from_json(*task.context)) {
        presented_names.push_back(spec.name);
      }
    } catch (const ApiParseFailure& ex) {
      report.fail(std::string("context: ") + ex.what());
    }
  }

  std::optional<ToolTaskPlan> plan;
  if (!task.reference_answer) {
    report.fail("task has no reference plan");
  } else {
    try {
      plan = plan_from_json(*task.reference_answer);
    } catch (const ApiParseFailure& ex) {
      report.fail(std::string("plan: ") + ex.what());
    }
  }
  if (!report.ok()) return report;

  const auto classified = classify_tool_task(*plan, presented_names, library);
  if (!classified) {
    report.fail("plan references APIs absent from the library");
    return report;
  }
  if (to_string(*classified) != task.task_type) {
    report.fail("classification " + to_string(*classified) + " does not match task_type " +
                task.task_type);
  }
  return report;
}

namespace {

struct TaskBrief {
  std::vector<ApiSpec> presented;
  std::vector<std::string> target_names;
  std::vector<std::string> must_provide;
  std::vector<std::string> must_omit;
  std::optional<std::string> superfluous_key;
};

const ApiSpec& pick(const std::vector<ApiSpec>& from, RandomStream& rng) {
  return from[rng.uniform_index(from.size())];
}

TaskBrief build_brief(const std::vector<ApiSpec>& library, TaskType type, RandomStream& rng) {
  TaskBrief brief;
  brief.presented = library;

  std::vector<ApiSpec> with_required;
  for (const auto& spec : library) {
    if (!spec.required_parameter_names().empty()) with_required.push_back(spec);
  }

  switch (type) {
    case TaskType::single_all_params:
    case TaskType::single_superfluous_params: {
      const ApiSpec& target = pick(library, rng);
      brief.target_names = {target.name};
      brief.must_provide = target.required_parameter_names();
      if (type == TaskType::single_superfluous_params) {
        std::string extra = "urgency";
        while (target.has_parameter(extra)) extra += "_note";
        brief.superfluous_key = extra;
      }
      break;
    }
    case TaskType::single_missing_params: {
      if (with_required.empty()) {
        throw InfeasibleTaskType("no API in the library has a required parameter");
      }
      const ApiSpec& target = pick(with_required, rng);
      brief.target_names = {target.name};
      auto required = target.required_parameter_names();
      const std::size_t omit = rng.uniform_index(required.size());
      for (std::size_t i = 0; i < required.size(); ++i) {
        if (i == omit) {
          brief.must_omit.push_back(required[i]);
        } else {
          brief.must_provide.push_back(required[i]);
        }
      }
      break;
    }
    case TaskType::multi_all_params:
    case TaskType::multi_missing_params: {
      if (library.size() < 2) {
        throw InfeasibleTaskType("multi-API task needs a library of at least 2");
      }
      if (type == TaskType::multi_missing_params && with_required.empty()) {
        throw InfeasibleTaskType("no API in the library has a required parameter");
      }
      std::vector<std::size_t> order(library.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      std::size_t count = 2;
      if (library.size() > 2 && rng.uniform_index(2) == 1) count = 3;
      // A missing-params task must target an API that has required params.
      if (type == TaskType::multi_missing_params) {
        const ApiSpec& anchor = pick(with_required, rng);
        brief.target_names.push_back(anchor.name);
        for (auto index : order) {
          if (brief.target_names.size() >= count) break;
          if (library[index].name == anchor.name) continue;
          brief.target_names.push_back(library[index].name);
        }
      } else {
        for (std::size_t i = 0; i < count; ++i) {
          brief.target_names.push_back(library[order[i]].name);
        }
      }
      std::set<std::string> provide;
      for (const auto& name : brief.target_names) {
        for (const auto& spec : library) {
          if (spec.name != name) continue;
          for (const auto& required : spec.required_parameter_names()) provide.insert(required);
        }
      }
      if (type == TaskType::multi_missing_params) {
        // Omit one required parameter of the anchor API.
        for (const auto& spec : with_required) {
          if (spec.name != brief.target_names.front()) continue;
          auto required = spec.required_parameter_names();
          const std::string omit = required[rng.uniform_index(required.size())];
          provide.erase(omit);
          brief.must_omit.push_back(omit);
          break;
        }
      }
      brief.must_provide.assign(provide.begin(), provide.end());
      break;
    }
    case TaskType::single_api_unavailable: {
      if (library.size() < 2) {
        throw InfeasibleTaskType("withholding an API needs a library of at least 2");
      }
      const std::size_t target_index = rng.uniform_index(library.size());
      brief.target_names = {library[target_index].name};
      brief.must_provide = library[target_index].required_parameter_names();
      brief.presented.clear();
      for (std::size_t i = 0; i < library.size(); ++i) {
        if (i != target_index) brief.presented.push_back(library[i]);
      }
      break;
    }
    case TaskType::multi_api_unavailable: {
      if (library.size() < 2) {
        throw InfeasibleTaskType("withholding an API needs a library of at least 2");
      }
      std::vector<std::size_t> order(library.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      const std::size_t count = std::min<std::size_t>(library.size(), 2);
      std::set<std::size_t> withheld;
      for (std::size_t i = 0; i < count; ++i) {
        brief.target_names.push_back(library[order[i]].name);
      }
      withheld.insert(order[0]);  // at least one essential API is missing
      std::set<std::string> provide;
      for (const auto& name : brief.target_names) {
        for (const auto& spec : library) {
          if (spec.name != name) continue;
          for (const auto& required : spec.required_parameter_names()) provide.insert(required);
        }
      }
      brief.must_provide.assign(provide.begin(), provide.end());
      brief.presented.clear();
      for (std::size_t i = 0; i < library.size(); ++i) {
        if (!withheld.count(i)) brief.presented.push_back(library[i]);
      }
      break;
    }
  }
  return brief;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

struct ParsedToolItem {
  std::string task;
  std::string plan_json;
};

// Items are numbered; within each, the final "PLAN: {...}" line separates
// the user-visible task text from the hidden reference plan.
std::vector<ParsedToolItem> parse_tool_task_items(const std::string& text, std::size_t* malformed) {
  std::vector<ParsedToolItem> items;
  ParsedItems numbered = parse_instruction_items(text);
  if (malformed) *malformed += numbered.malformed;
  for (const auto& entry : numbered.items) {
    const std::string rendered = entry.task;
    const std::size_t plan_at = rendered.find("PLAN:");
    if (plan_at == std::string::npos) {
      if (malformed) ++*malformed;
      continue;
    }
    ParsedToolItem item;
    item.task = trim(rendered.substr(0, plan_at));
    auto body = extract_balanced(rendered.substr(plan_at), '{', '}');
    if (!body || item.task.empty()) {
      if (malformed) ++*malformed;
      continue;
    }
    item.plan_json = *body;
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

std::vector<SeedInstruction> make_tool_tasks(const std::vector<ApiSpec>& library,
                                             TaskType task_type, const Prompts& prompts,
                                             Backend& backend, RandomStream& rng,
                                             FlowCounters* counters,
                                             std::vector<std::string>* request_tags) {
  if (library.empty()) throw InfeasibleTaskType("empty API library");
  const TaskBrief brief = build_brief(library, task_type, rng);
  const std::string presented_json = library_to_json(brief.presented);
  const std::string task_key = content_digest(presented_json + to_string(task_type));

  std::string user = "Available APIs:\n" + presented_json + "\n\n";
  user += "Target API(s): " + join(brief.target_names) + "\n";
  if (!brief.must_provide.empty()) {
    user += "The user supplies values for: " + join(brief.must_provide) + "\n";
  }
  if (!brief.must_omit.empty()) {
    user += "The user must NOT mention values for: " + join(brief.must_omit) + "\n";
  }
  if (brief.superfluous_key) {
    user += "The user also supplies an extra detail the API does not accept, named: " +
            *brief.superfluous_key + "\n";
  }

  CompletionRequest request;
  request.messages = {system_message(prompts.task_prompts.at(task_type)),
                      user_message(std::move(user))};
  request.tag = make_tag("tool_task_" + to_string(task_type), task_key, "tooltask", 0);
  CompletionResponse response = backend.complete(request);
  if (request_tags) request_tags->push_back(request.tag);
  if (response.finish_reason != FinishReason::complete) {
    throw NoInstructionsProduced("task agent output is not a complete payload");
  }

  std::size_t malformed = 0;
  std::vector<SeedInstruction> tasks;
  for (const auto& item : parse_tool_task_items(response.content, &malformed)) {
    SeedInstruction task;
    task.seed_id = task_key;
    task.transformation_agent = "library_reconstruction";
    task.instruction_agent = "tool_task_" + to_string(task_type);
    task.task_type = to_string(task_type);
    task.context = presented_json;
    task.task = item.task;
    try {
      // Reserialize so the stored plan is canonical.
      task.reference_answer = plan_to_json(plan_from_json(item.plan_json));
    } catch (const ApiParseFailure&) {
      ++malformed;
      continue;
    }
    if (!validate_tool_task(task, library).ok()) {
      ++malformed;
      continue;
    }
    tasks.push_back(std::move(task));
  }
  if (counters) {
    counters->malformed_items += malformed;
    counters->instructions_parsed += tasks.size();
  }
  if (tasks.empty()) {
    throw NoInstructionsProduced("no valid " + to_string(task_type) + " tasks parsed");
  }
  return tasks;
}

namespace {

std::string render_api_list(const std::string& presented_json) {
  // Stored compact; presented to the model pretty-printed.
  return json::parse(presented_json).dump(2);
}

}  // namespace

ToolConversation synthesize_tool_conversation(const SeedInstruction& task,
                                              const std::vector<ApiSpec>& library,
                                              const Prompts& prompts, Backend& backend,
                                              const SimulatedExecutor& executor,
                                              const ConversationOptions& options,
                                              std::vector<std::string>* request_tags) {
  (void)library;
  if (!task.context) throw InvalidRequest("tool task has no presented API list");
  const TaskType type = task_type_from_string(task.task_type);

  std::set<std::string> presented_names;
  for (const auto& spec : library_from_json(*task.context)) presented_names.insert(spec.name);

  std::string system = prompts.conversation_system;
  const std::string placeholder = "{{api_list}}";
  const auto at = system.find(placeholder);
  if (at == std::string::npos) {
    throw ConfigError("conversation system prompt lacks the {{api_list}} slot");
  }
  system.replace(at, placeholder.size(), render_api_list(*task.context));

  ToolConversation conversation;
  conversation.system_message = system;
  conversation.turns.push_back(user_message(task.task));

  const std::string task_digest = content_digest({task.seed_id, task.task});
  for (int turn = 0; turn < options.max_assistant_turns; ++turn) {
    CompletionRequest request;
    request.messages.push_back(system_message(conversation.system_message));
    for (const auto& message : conversation.turns) request.messages.push_back(message);
    request.tag = make_tag("tool_assistant", task_digest, "toolconv.t" + std::to_string(turn), 0);
    CompletionResponse response = backend.complete(request);
    if (request_tags) request_tags->push_back(request.tag);
    if (response.finish_reason != FinishReason::complete) {
      throw ActionParseFailure("assistant turn is not a complete payload");
    }

    ToolAction action = parse_action(response.content);
    conversation.turns.push_back(assistant_message(trim(response.content)));

    if (action.kind == ActionKind::api_call) {
      const bool unavailable_type = !expects_final_answer(type) &&
                                    (type == TaskType::single_api_unavailable ||
                                     type == TaskType::multi_api_unavailable);
      if (!presented_names.count(action.name) && !unavailable_type) {
        throw ActionParseFailure("assistant called an API outside the presented list: " +
                                 action.name);
      }
      conversation.turns.push_back(user_message(executor.execute(action.name, action.arguments)));
      continue;
    }

    const bool expect_answer = expects_final_answer(type);
    if (expect_answer && action.name != "FINAL_ANSWER") {
      throw TerminalMismatch("task type " + task.task_type + " must end in FINAL_ANSWER, got " +
                             action.name);
    }
    if (!expect_answer && action.name != "FAILED") {
      throw TerminalMismatch("task type " + task.task_type + " must end in FAILED, got " +
                             action.name);
    }
    conversation.expected_terminal = std::move(action);
    return conversation;
  }
  throw TurnCapExceeded("conversation exceeded " +
                        std::to_string(options.max_assistant_turns) + " assistant turns");
}

SeedInstruction refine_tool_task(const SeedInstruction& task,
                                 const ToolConversation& conversation,
                                 const std::vector<ApiSpec>& library, const Prompts& prompts,
                                 Backend& backend, RandomStream& rng, int rounds,
                                 FlowCounters* counters,
                                 std::vector<std::string>* request_tags) {
  (void)rng;
  SeedInstruction current = task;
  const std::string task_digest = content_digest({task.seed_id, task.task});

  std::string transcript;
  for (const auto& turn : conversation.turns) {
    transcript += to_string(turn.role) + ": " + turn.content + "\n";
  }

  for (int round = 0; round < rounds; ++round) {
    const std::string round_key = ".r" + std::to_string(round);
    std::string suggester_input = "Task: " + current.task + "\n\nAvailable APIs:\n" +
                                  current.context.value_or("[]") + "\n\nConversation:\n" +
                                  transcript;
    CompletionRequest suggest_request;
    suggest_request.messages = {system_message(prompts.suggester),
                                user_message(suggester_input)};
    suggest_request.tag = make_tag("tool_suggester", task_digest, "toolrefine.s" + round_key, 0);
    CompletionResponse suggested = backend.complete(suggest_request);
    if (request_tags) request_tags->push_back(suggest_request.tag);
    std::vector<std::string> suggestions;
    if (suggested.finish_reason == FinishReason::complete) {
      suggestions = parse_suggestion_list(suggested.content);
    }
    if (suggestions.empty()) {
      if (counters) ++counters->empty_suggestions;
      continue;
    }
    const std::size_t chosen = rng.uniform_index(suggestions.size());

    CompletionRequest edit_request;
    edit_request.messages = {
        system_message(prompts.editor),
        user_message(suggester_input + "\n\nSuggestion: " + suggestions[chosen])};
    edit_request.tag = make_tag("tool_editor", task_digest, "toolrefine.e" + round_key, 0);
    CompletionResponse edited = backend.complete(edit_request);
    if (request_tags) request_tags->push_back(edit_request.tag);
    if (edited.finish_reason != FinishReason::complete) {
      if (counters) ++counters->editor_failures;
      continue;
    }

    std::size_t malformed = 0;
    auto items = parse_tool_task_items(edited.content, &malformed);
    if (items.empty()) {
      if (counters) ++counters->editor_failures;
      continue;
    }
    SeedInstruction candidate = current;
    candidate.task = items.front().task;
    try {
      const ToolTaskPlan plan = plan_from_json(items.front().plan_json);
      candidate.reference_answer = plan_to_json(plan);
      std::vector<std::string> presented_names;
      for (const auto& spec : library_from_json(*candidate.context)) {
        presented_names.push_back(spec.name);
      }
      const auto classified = classify_tool_task(plan, presented_names, library);
      if (!classified) throw ApiParseFailure("edited plan references unknown APIs");
      candidate.task_type = to_string(*classified);
    } catch (const ApiParseFailure&) {
      if (counters) ++counters->editor_failures;
      continue;
    }
    if (!validate_tool_task(candidate, library).ok()) {
      if (counters) ++counters->editor_failures;
      continue;
    }
    current = std::move(candidate);
    if (counters) ++counters->refinement_rounds;
  }
  return current;
}

InstructionRecord conversation_record(const ToolConversation& conversation, Lineage lineage,
                                      RecordOrigin created_from) {
  return make_record("tool_use", conversation.system_message, conversation.turns,
                     std::move(lineage), created_from);
}

}  // namespace agentforge::skills::tooluse
