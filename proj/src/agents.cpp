#include "agentforge/agents.hpp"

#include "agentforge/chat.hpp"
#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace agentforge {

using nlohmann::json;

std::string to_string(AgentStage stage) {
  switch (stage) {
    case AgentStage::content_transformation:
      return "content_transformation";
    case AgentStage::seed_instruction:
      return "seed_instruction";
    case AgentStage::suggester:
      return "suggester";
    case AgentStage::editor:
      return "editor";
  }
  return "content_transformation";
}

AgentStage agent_stage_from_string(const std::string& text) {
  if (text == "content_transformation") return AgentStage::content_transformation;
  if (text == "seed_instruction") return AgentStage::seed_instruction;
  if (text == "suggester") return AgentStage::suggester;
  if (text == "editor") return AgentStage::editor;
  throw ConfigError("unknown agent stage: " + text);
}

std::string to_string(OutputContract contract) {
  switch (contract) {
    case OutputContract::free_text:
      return "free_text";
    case OutputContract::instruction_list:
      return "instruction_list";
    case OutputContract::suggestion_list:
      return "suggestion_list";
    case OutputContract::edited_instruction:
      return "edited_instruction";
    case OutputContract::structured:
      return "structured";
  }
  return "free_text";
}

OutputContract output_contract_from_string(const std::string& text) {
  if (text == "free_text") return OutputContract::free_text;
  if (text == "instruction_list") return OutputContract::instruction_list;
  if (text == "suggestion_list") return OutputContract::suggestion_list;
  if (text == "edited_instruction") return OutputContract::edited_instruction;
  if (text == "structured") return OutputContract::structured;
  throw ConfigError("unknown output contract: " + text);
}

std::string to_string(InstructionSelection selection) {
  return selection == InstructionSelection::all_routed ? "all_routed" : "uniform_one";
}

InstructionSelection instruction_selection_from_string(const std::string& text) {
  if (text == "all_routed") return InstructionSelection::all_routed;
  if (text == "uniform_one") return InstructionSelection::uniform_one;
  throw ConfigError("unknown instruction selection mode: " + text);
}

const AgentSpec* FlowConfig::find_transformation_agent(const std::string& name) const {
  for (const auto& agent : transformation_agents) {
    if (agent.name == name) return &agent;
  }
  return nullptr;
}

const AgentSpec* FlowConfig::find_instruction_agent(const std::string& name) const {
  for (const auto& agent : instruction_agents) {
    if (agent.name == name) return &agent;
  }
  return nullptr;
}

void validate_flow_config(const FlowConfig& flow) {
  if (flow.skill.empty()) throw ConfigError("flow config: skill identifier missing");
  if (flow.transformation_agents.empty()) {
    throw ConfigError("flow config: no transformation agents");
  }
  if (flow.instruction_agents.empty()) {
    throw ConfigError("flow config: no instruction agents");
  }
  if (flow.max_refinement_rounds < 0) {
    throw ConfigError("flow config: max_refinement_rounds must be >= 0");
  }
  if (flow.max_refinement_rounds > 0 && flow.refinement_pairs.empty()) {
    throw ConfigError("flow config: refinement rounds requested without refinement pairs");
  }

  std::set<std::string> names;
  auto check_agent = [&names](const AgentSpec& agent, AgentStage expected) {
    if (agent.name.empty()) throw ConfigError("agent with empty name");
    if (!agent.identity && is_blank(agent.role_prompt)) {
      throw ConfigError("agent " + agent.name + " has an empty role prompt");
    }
    if (agent.stage != expected) {
      throw ConfigError("agent " + agent.name + " has stage " + to_string(agent.stage) +
                        ", expected " + to_string(expected));
    }
    if (!names.insert(agent.name).second) {
      throw ConfigError("duplicate agent name: " + agent.name);
    }
  };
  for (const auto& agent : flow.transformation_agents) {
    check_agent(agent, AgentStage::content_transformation);
  }
  for (const auto& agent : flow.instruction_agents) {
    check_agent(agent, AgentStage::seed_instruction);
  }
  for (const auto& pair : flow.refinement_pairs) {
    check_agent(pair.suggester, AgentStage::suggester);
    check_agent(pair.editor, AgentStage::editor);
  }

  for (const auto& [transform, targets] : flow.routing) {
    if (flow.find_transformation_agent(transform) == nullptr) {
      throw ConfigError("routing source is not a transformation agent: " + transform);
    }
    for (const auto& target : targets) {
      if (flow.find_instruction_agent(target) == nullptr) {
        throw ConfigError("routing target is not an instruction agent: " + target);
      }
    }
  }
}

namespace {

json agent_to_json(const AgentSpec& agent) {
  json obj;
  obj["name"] = agent.name;
  obj["stage"] = to_string(agent.stage);
  obj["output_contract"] = to_string(agent.output_contract);
  if (!agent.role_prompt_file.empty()) {
    obj["role_prompt_file"] = agent.role_prompt_file.string();
  } else {
    obj["role_prompt"] = agent.role_prompt;
  }
  if (!agent.task_type.empty()) obj["task_type"] = agent.task_type;
  if (agent.temperature) obj["temperature"] = *agent.temperature;
  if (agent.max_tokens) obj["max_tokens"] = *agent.max_tokens;
  if (agent.weight != 1.0) obj["weight"] = agent.weight;
  if (agent.identity) obj["identity"] = true;
  return obj;
}

AgentSpec agent_from_json(const json& obj, const std::filesystem::path& base_dir) {
  AgentSpec agent;
  agent.name = obj.at("name").get<std::string>();
  agent.stage = agent_stage_from_string(obj.at("stage").get<std::string>());
  agent.output_contract =
      output_contract_from_string(obj.value("output_contract", "free_text"));
  agent.task_type = obj.value("task_type", "");
  if (obj.contains("temperature")) agent.temperature = obj.at("temperature").get<double>();
  if (obj.contains("max_tokens")) agent.max_tokens = obj.at("max_tokens").get<int>();
  agent.weight = obj.value("weight", 1.0);
  agent.identity = obj.value("identity", false);
  if (obj.contains("role_prompt_file")) {
    std::filesystem::path prompt_path = obj.at("role_prompt_file").get<std::string>();
    if (prompt_path.is_relative()) prompt_path = base_dir / prompt_path;
    agent.role_prompt_file = prompt_path;
    std::ifstream in(prompt_path);
    if (!in) {
      throw ConfigError("cannot read role prompt file: " + prompt_path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    agent.role_prompt = buffer.str();
  } else {
    agent.role_prompt = obj.value("role_prompt", "");
  }
  return agent;
}

}  // namespace

FlowConfig load_flow_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadablePath("cannot read flow config: " + path.string());
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("flow config " + path.string() + ": " + ex.what());
  }
  const auto base_dir = path.parent_path();

  FlowConfig flow;
  flow.skill = obj.at("skill").get<std::string>();
  flow.max_refinement_rounds = obj.value("max_refinement_rounds", 1);
  flow.instruction_selection =
      instruction_selection_from_string(obj.value("instruction_selection", "all_routed"));
  flow.fan_out = obj.value("fan_out", false);
  for (const auto& item : obj.at("transformation_agents")) {
    flow.transformation_agents.push_back(agent_from_json(item, base_dir));
  }
  for (const auto& item : obj.at("instruction_agents")) {
    flow.instruction_agents.push_back(agent_from_json(item, base_dir));
  }
  for (const auto& item : obj.value("refinement_pairs", json::array())) {
    RefinementPair pair;
    pair.suggester = agent_from_json(item.at("suggester"), base_dir);
    pair.editor = agent_from_json(item.at("editor"), base_dir);
    flow.refinement_pairs.push_back(std::move(pair));
  }
  const json routing = obj.value("routing", json::object());
  for (const auto& [key, value] : routing.items()) {
    flow.routing[key] = value.get<std::vector<std::string>>();
  }
  if (obj.contains("responder")) {
    flow.responder = agent_from_json(obj.at("responder"), base_dir);
  }
  validate_flow_config(flow);
  return flow;
}

void save_flow_config(const FlowConfig& flow, const std::filesystem::path& path) {
  json obj;
  obj["skill"] = flow.skill;
  obj["max_refinement_rounds"] = flow.max_refinement_rounds;
  obj["instruction_selection"] = to_string(flow.instruction_selection);
  obj["fan_out"] = flow.fan_out;
  obj["transformation_agents"] = json::array();
  for (const auto& agent : flow.transformation_agents) {
    obj["transformation_agents"].push_back(agent_to_json(agent));
  }
  obj["instruction_agents"] = json::array();
  for (const auto& agent : flow.instruction_agents) {
    obj["instruction_agents"].push_back(agent_to_json(agent));
  }
  obj["refinement_pairs"] = json::array();
  for (const auto& pair : flow.refinement_pairs) {
    obj["refinement_pairs"].push_back(
        {{"suggester", agent_to_json(pair.suggester)}, {"editor", agent_to_json(pair.editor)}});
  }
  json routing = json::object();
  for (const auto& [key, value] : flow.routing) routing[key] = value;
  obj["routing"] = std::move(routing);
  if (flow.responder) obj["responder"] = agent_to_json(*flow.responder);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UnreadablePath("cannot write flow config: " + path.string());
  out << obj.dump(2) << "\n";
}

std::string flow_config_digest(const FlowConfig& flow) {
  // Digest resolved behavior, not file paths: prompts inline, keys sorted
  // by nlohmann's ordered object representation.
  json obj;
  obj["skill"] = flow.skill;
  obj["max_refinement_rounds"] = flow.max_refinement_rounds;
  obj["instruction_selection"] = to_string(flow.instruction_selection);
  obj["fan_out"] = flow.fan_out;
  auto resolved_agent = [](const AgentSpec& agent) {
    json item = agent_to_json(agent);
    item.erase("role_prompt_file");
    item["role_prompt"] = agent.role_prompt;
    return item;
  };
  obj["transformation_agents"] = json::array();
  for (const auto& agent : flow.transformation_agents) {
    obj["transformation_agents"].push_back(resolved_agent(agent));
  }
  obj["instruction_agents"] = json::array();
  for (const auto& agent : flow.instruction_agents) {
    obj["instruction_agents"].push_back(resolved_agent(agent));
  }
  obj["refinement_pairs"] = json::array();
  for (const auto& pair : flow.refinement_pairs) {
    obj["refinement_pairs"].push_back(
        {{"suggester", resolved_agent(pair.suggester)}, {"editor", resolved_agent(pair.editor)}});
  }
  json routing = json::object();
  for (const auto& [key, value] : flow.routing) routing[key] = value;
  obj["routing"] = std::move(routing);
  if (flow.responder) obj["responder"] = resolved_agent(*flow.responder);
  return content_digest(obj.dump());
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Content of the first fenced block if the text has one, else the text.
std::string unfence(const std::string& text) {
  auto open = text.find("```");
  if (open == std::string::npos) return text;
  auto body_start = text.find('\n', open);
  if (body_start == std::string::npos) return text;
  ++body_start;
  auto close = text.find("```", body_start);
  if (close == std::string::npos) return text.substr(body_start);
  return text.substr(body_start, close - body_start);
}

// Matches "1. ", "12) " at the start of a (trimmed) line; returns the rest.
std::optional<std::string> numbered_item_rest(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t digits_start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits_start) return std::nullopt;
  if (i >= line.size() || (line[i] != '.' && line[i] != ')')) return std::nullopt;
  ++i;
  if (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) return std::nullopt;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return line.substr(i);
}

bool is_option_line(const std::string& line) {
  const std::string stripped = trim(line);
  return stripped.size() >= 3 && stripped[0] == '(' &&
         std::isupper(static_cast<unsigned char>(stripped[1])) && stripped[2] == ')';
}

std::optional<std::string> answer_line_rest(const std::string& line) {
  const std::string stripped = trim(line);
  constexpr std::string_view kPrefix = "Answer:";
  if (stripped.rfind(kPrefix, 0) != 0) return std::nullopt;
  return trim(stripped.substr(kPrefix.size()));
}

SeedInstruction item_from_lines(const std::vector<std::string>& lines) {
  SeedInstruction item;
  std::string task;
  bool in_options = false;
  for (const auto& line : lines) {
    if (auto answer = answer_line_rest(line)) {
      if (!answer->empty()) item.reference_answer = *answer;
      continue;
    }
    if (is_option_line(line)) {
      item.answer_options.push_back(trim(line));
      in_options = true;
      continue;
    }
    if (in_options && !is_blank(line)) {
      // wrapped option text
      item.answer_options.back() += " " + trim(line);
      continue;
    }
    if (!task.empty()) task += "\n";
    task += line;
  }
  item.task = trim(task);
  return item;
}

}  // namespace

ParsedItems parse_instruction_items(const std::string& text) {
  ParsedItems result;
  const auto lines = split_lines(unfence(text));

  std::vector<std::vector<std::string>> raw_items;
  bool in_item = false;
  for (const auto& line : lines) {
    if (auto rest = numbered_item_rest(line)) {
      raw_items.push_back({*rest});
      in_item = true;
    } else if (in_item) {
      raw_items.back().push_back(line);
    }
    // lines before the first numbered entry are prose; skipped
  }

  for (const auto& raw : raw_items) {
    SeedInstruction item = item_from_lines(raw);
    if (item.task.empty()) {
      ++result.malformed;
      continue;
    }
    result.items.push_back(std::move(item));
  }
  return result;
}

std::vector<std::string> parse_suggestion_list(const std::string& text) {
  std::vector<std::string> suggestions;
  const auto lines = split_lines(unfence(text));
  bool in_item = false;
  for (const auto& line : lines) {
    std::optional<std::string> rest = numbered_item_rest(line);
    if (!rest) {
      const std::string stripped = trim(line);
      if (stripped.size() >= 2 && (stripped[0] == '-' || stripped[0] == '*') &&
          stripped[1] == ' ') {
        rest = trim(stripped.substr(2));
      }
    }
    if (rest) {
      if (!trim(*rest).empty()) {
        suggestions.push_back(trim(*rest));
        in_item = true;
      } else {
        in_item = false;
      }
    } else if (in_item && !is_blank(line)) {
      suggestions.back() += " " + trim(line);
    } else if (is_blank(line)) {
      in_item = false;
    }
  }
  return suggestions;
}

SeedInstruction parse_edited_instruction(const std::string& text) {
  const std::string body = unfence(text);
  const auto lines = split_lines(body);

  // Labeled form, used when a refinement rewrites the passage itself:
  //   Context: <revised passage, until the Task: line>
  //   Task: <revised instruction>
  //   (A) ... / Answer: ...
  std::optional<std::size_t> context_at;
  std::optional<std::size_t> task_at;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string stripped = trim(lines[i]);
    if (!context_at && stripped.rfind("Context:", 0) == 0) context_at = i;
    if (!task_at && stripped.rfind("Task:", 0) == 0) task_at = i;
  }
  if (task_at) {
    SeedInstruction item;
    if (context_at && *context_at < *task_at) {
      std::string context = trim(trim(lines[*context_at]).substr(8));
      for (std::size_t i = *context_at + 1; i < *task_at; ++i) {
        context += context.empty() ? lines[i] : "\n" + lines[i];
      }
      context = trim(context);
      if (!context.empty()) item.context = context;
    }
    std::vector<std::string> task_lines;
    task_lines.push_back(trim(trim(lines[*task_at]).substr(5)));
    for (std::size_t i = *task_at + 1; i < lines.size(); ++i) task_lines.push_back(lines[i]);
    SeedInstruction rest = item_from_lines(task_lines);
    item.task = rest.task;
    item.answer_options = std::move(rest.answer_options);
    item.reference_answer = std::move(rest.reference_answer);
    if (item.task.empty()) {
      throw EditorParseFailure("editor output has an empty Task section");
    }
    return item;
  }

  ParsedItems parsed = parse_instruction_items(text);
  if (!parsed.items.empty()) {
    return parsed.items.front();
  }
  SeedInstruction item = item_from_lines(lines);
  if (item.task.empty()) {
    throw EditorParseFailure("editor output contains no usable instruction");
  }
  return item;
}

std::string render_instruction(const SeedInstruction& instr) {
  std::string out = instr.task;
  for (const auto& option : instr.answer_options) {
    out += "\n" + option;
  }
  if (instr.reference_answer) {
    out += "\nAnswer: " + *instr.reference_answer;
  }
  return out;
}

}  // namespace agentforge
