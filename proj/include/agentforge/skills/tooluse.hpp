#pragma once

#include "agentforge/agents.hpp"
#include "agentforge/backend.hpp"
#include "agentforge/corpus.hpp"
#include "agentforge/flow.hpp"
#include "agentforge/rng.hpp"
#include "agentforge/validation.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace agentforge::skills::tooluse {

struct ApiParameter {
  std::string name;
  std::string type_tag;  // free-form: NUMBER, string, object, ...
  std::string description;
  bool required = false;
};

struct ApiSpec {
  std::string name;
  std::string description;
  std::vector<ApiParameter> parameters;

  std::vector<std::string> required_parameter_names() const;
  bool has_parameter(const std::string& name) const;
};

// JSON wire shape:
//   {"name": ..., "description": ...,
//    "parameters": {"type": "object",
//                   "properties": {<pname>: {"type": ..., "description": ...}},
//                   "required": [...]}}
ApiSpec api_spec_from_json(const std::string& json_text);
std::string api_spec_to_json(const ApiSpec& spec);       // canonical, sorted keys
std::string library_to_json(const std::vector<ApiSpec>& library);
std::vector<ApiSpec> library_from_json(const std::string& json_text);

// Library files: one JSON array of API objects per file.
std::vector<ApiSpec> load_library(const std::filesystem::path& path);
void save_library(const std::vector<ApiSpec>& library, const std::filesystem::path& path);

// The seven task types over an API list.
enum class TaskType {
  single_all_params,
  single_superfluous_params,
  single_missing_params,
  multi_all_params,
  multi_missing_params,
  single_api_unavailable,
  multi_api_unavailable
};

const std::vector<TaskType>& all_task_types();  // exactly 7
std::string to_string(TaskType type);
TaskType task_type_from_string(const std::string& text);
bool expects_final_answer(TaskType type);  // false -> terminal must be FAILED

// Plain-text tool invocation grammar, exactly two lines:
//   ACTION_TYPE : API_CALL        |  ACTION_TYPE : STOP
//   ACTION: name(k=v, k2=v2)      |  ACTION: FINAL_ANSWER(value)
enum class ActionKind { api_call, stop };

struct ToolAction {
  ActionKind kind = ActionKind::api_call;
  std::string name;  // API name, FINAL_ANSWER or FAILED
  // api_call: (parameter, value text) in written order; stop: one entry
  // with an empty key holding the single value.
  std::vector<std::pair<std::string, std::string>> arguments;
};

// Scans the assistant text for the ACTION block (prose and fences around it
// are tolerated). Throws ActionParseFailure.
ToolAction parse_action(const std::string& text);
std::string format_action(const ToolAction& action);

// Sorted-key argument form with normalized number formatting and quoted
// strings; the executor's lookup key.
std::string canonicalize_arguments(const std::vector<std::pair<std::string, std::string>>& args);

// Deterministic stand-in for API execution: a fixture table keyed by
// (api, canonical arguments) with a templated echo fallback. Immutable.
class SimulatedExecutor {
 public:
  SimulatedExecutor() = default;
  explicit SimulatedExecutor(std::map<std::pair<std::string, std::string>, std::string> table)
      : table_(std::move(table)) {}

  // JSON Lines, fields: api, args_canonical, response.
  static SimulatedExecutor from_file(const std::filesystem::path& path);

  std::string execute(const std::string& api,
                      const std::vector<std::pair<std::string, std::string>>& args) const;

 private:
  std::map<std::pair<std::string, std::string>, std::string> table_;
};

struct ToolConversation {
  std::string system_message;
  std::vector<ChatMessage> turns;  // alternating user/assistant, user first
  ToolAction expected_terminal;
};

struct Prompts {
  std::string api_synthesis;
  std::string library_hypothesize;
  std::string conversation_system;  // template with an {{api_list}} slot
  std::map<TaskType, std::string> task_prompts;
  std::string suggester;
  std::string editor;
};

// Loads prompts/tooluse/*; a missing file fails configuration.
Prompts load_prompts(const std::filesystem::path& prompts_dir);

// Derives one API description from a code seed. Unparseable output raises
// ApiParseFailure.
ApiSpec synthesize_api_from_code(const SeedDocument& seed, const Prompts& prompts,
                                 Backend& backend,
                                 std::vector<std::string>* request_tags = nullptr);

enum class ReconstructionStrategy { retrieval, hypothesize };

struct ReconstructionCounters {
  std::uint64_t malformed_specs = 0;
  std::uint64_t duplicate_names = 0;
};

// Expands one API description into a plausible library. The hypothesize
// strategy asks for sibling APIs in one shot; the retrieval strategy walks
// the corpus for similar code and synthesizes a spec per hit. Duplicate
// names are dropped; fewer than 2 surviving specs raises LibraryTooSmall.
std::vector<ApiSpec> reconstruct_library(const ApiSpec& seed, ReconstructionStrategy strategy,
                                         std::size_t target_count, const Prompts& prompts,
                                         Backend& backend, RandomStream& rng,
                                         const CorpusManifest* corpus = nullptr,
                                         ReconstructionCounters* counters = nullptr,
                                         std::vector<std::string>* request_tags = nullptr);

// Rank corpus code documents by shingle similarity to the query; the
// retrieval strategy's local search. Exposed for tests.
std::vector<std::string> similar_code_ids(const CorpusManifest& corpus, const std::string& query,
                                          std::size_t top_k);

// Generated tool tasks carry the presented API list in `context` and a
// hidden reference plan in `reference_answer`:
//   {"apis": [names...], "provided": {param: value text...}}
struct ToolTaskPlan {
  std::vector<std::string> apis;
  std::map<std::string, std::string> provided;
};

ToolTaskPlan plan_from_json(const std::string& json_text);
std::string plan_to_json(const ToolTaskPlan& plan);

// Creates task instances of the given type over the library. For the
// *_unavailable variants the rng picks which target API(s) to withhold from
// the presented list. Every emitted task passes validate_tool_task; raises
// InfeasibleTaskType when the library cannot support the type and
// NoInstructionsProduced when the agent output yields nothing valid.
std::vector<SeedInstruction> make_tool_tasks(const std::vector<ApiSpec>& library,
                                             TaskType task_type, const Prompts& prompts,
                                             Backend& backend, RandomStream& rng,
                                             FlowCounters* counters = nullptr,
                                             std::vector<std::string>* request_tags = nullptr);

// Deterministic, backend-free: recomputes the task's classification from
// its plan, presented list and the library's parameter requirements, and
// compares it with task.task_type.
ValidationReport validate_tool_task(const SeedInstruction& task,
                                    const std::vector<ApiSpec>& library);

// Classification helper behind the validator; exposed for tests.
std::optional<TaskType> classify_tool_task(const ToolTaskPlan& plan,
                                           const std::vector<std::string>& presented_names,
                                           const std::vector<ApiSpec>& library);

struct ConversationOptions {
  int max_assistant_turns = 16;
};

// Plays the task against the backend until a stop action: assistant turns
// are parsed into actions, api_call actions are answered by the executor.
// The terminal action class must match the task type (FINAL_ANSWER for
// solvable types, FAILED otherwise).
ToolConversation synthesize_tool_conversation(const SeedInstruction& task,
                                              const std::vector<ApiSpec>& library,
                                              const Prompts& prompts, Backend& backend,
                                              const SimulatedExecutor& executor,
                                              const ConversationOptions& options = {},
                                              std::vector<std::string>* request_tags = nullptr);

// One suggester-editor pass over (task, conversation). The edited task is
// revalidated; on any failure the original is kept and the failure counted.
SeedInstruction refine_tool_task(const SeedInstruction& task,
                                 const ToolConversation& conversation,
                                 const std::vector<ApiSpec>& library, const Prompts& prompts,
                                 Backend& backend, RandomStream& rng, int rounds = 1,
                                 FlowCounters* counters = nullptr,
                                 std::vector<std::string>* request_tags = nullptr);

// Converts a finished conversation into a training record.
InstructionRecord conversation_record(const ToolConversation& conversation, Lineage lineage,
                                      RecordOrigin created_from);

}  // namespace agentforge::skills::tooluse
