#include "agentforge/skills/tooluse.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"

#include <doctest.h>

#include "support/helpers.hpp"

#include <algorithm>

using namespace agentforge;
namespace tooluse = agentforge::skills::tooluse;

namespace {

const char* kFoodItemsSpec = R"({
  "name": "View All Food Items",
  "description": "The request enables clients to obtain a detailed list of food items, complete with nutritional profiles.",
  "parameters": {
    "type": "object",
    "properties": {
      "limit": {
        "type": "NUMBER",
        "description": "limit the length of response"
      }
    },
    "required": []
  }
})";

tooluse::ApiSpec make_api(const std::string& name,
                          std::vector<std::tuple<std::string, std::string, bool>> params) {
  tooluse::ApiSpec spec;
  spec.name = name;
  spec.description = "The " + name + " operation.";
  for (auto& [pname, type, required] : params) {
    spec.parameters.push_back({pname, type, "the " + pname + " parameter", required});
  }
  return spec;
}

std::vector<tooluse::ApiSpec> food_library() {
  return {
      make_api("View All Food Items", {{"limit", "number", false}}),
      make_api("Search Food Items", {{"query", "string", true}, {"limit", "number", false}}),
      make_api("Create Meal Plan", {{"dietary_preferences", "array", true},
                                    {"caloric_goal", "number", true},
                                    {"num_meals", "number", true}}),
      make_api("Delete Food Item", {{"food_id", "string", true}}),
  };
}

}  // namespace

TEST_CASE("API specs parse from and serialize to the wire shape") {
  const auto spec = tooluse::api_spec_from_json(kFoodItemsSpec);
  CHECK(spec.name == "View All Food Items");
  REQUIRE(spec.parameters.size() == 1);
  CHECK(spec.parameters[0].name == "limit");
  CHECK(spec.parameters[0].type_tag == "NUMBER");
  CHECK_FALSE(spec.parameters[0].required);
  CHECK(spec.parameters[0].description == "limit the length of response");

  // canonical round trip: serialize(parse(x)) is byte-stable
  const std::string canonical = tooluse::api_spec_to_json(spec);
  CHECK(tooluse::api_spec_to_json(tooluse::api_spec_from_json(canonical)) == canonical);
}

TEST_CASE("API library files round-trip") {
  test::TempDir dir;
  const auto library = food_library();
  const auto path = dir.path() / "library.json";
  tooluse::save_library(library, path);
  const auto loaded = tooluse::load_library(path);
  REQUIRE(loaded.size() == library.size());
  CHECK(tooluse::library_to_json(loaded) == tooluse::library_to_json(library));
  CHECK_THROWS_AS(tooluse::load_library(dir.path() / "missing.json"), UnreadablePath);
}

TEST_CASE("malformed API payloads raise ApiParseFailure") {
  CHECK_THROWS_AS(tooluse::api_spec_from_json("not json"), ApiParseFailure);
  CHECK_THROWS_AS(tooluse::api_spec_from_json("{\"description\": \"no name\"}"),
                  ApiParseFailure);
  CHECK_THROWS_AS(tooluse::library_from_json("{\"name\": \"object not array\"}"),
                  ApiParseFailure);
}

TEST_CASE("the tool task taxonomy has exactly 7 members") {
  CHECK(tooluse::all_task_types().size() == 7);
  for (auto type : tooluse::all_task_types()) {
    CHECK(tooluse::task_type_from_string(tooluse::to_string(type)) == type);
  }
  CHECK(tooluse::expects_final_answer(tooluse::TaskType::single_all_params));
  CHECK(tooluse::expects_final_answer(tooluse::TaskType::single_superfluous_params));
  CHECK(tooluse::expects_final_answer(tooluse::TaskType::multi_all_params));
  CHECK_FALSE(tooluse::expects_final_answer(tooluse::TaskType::single_missing_params));
  CHECK_FALSE(tooluse::expects_final_answer(tooluse::TaskType::multi_missing_params));
  CHECK_FALSE(tooluse::expects_final_answer(tooluse::TaskType::single_api_unavailable));
  CHECK_FALSE(tooluse::expects_final_answer(tooluse::TaskType::multi_api_unavailable));
}

TEST_CASE("the ACTION grammar parses the meal plan call") {
  const std::string block =
      "```markdown\n"
      "ACTION_TYPE : API_CALL\n"
      "ACTION: Create Meal Plan(dietary_preferences=[\"vegetarian\"], caloric_goal=1500, "
      "num_meals=3)\n"
      "```";
  const auto action = tooluse::parse_action(block);
  CHECK(action.kind == tooluse::ActionKind::api_call);
  CHECK(action.name == "Create Meal Plan");
  REQUIRE(action.arguments.size() == 3);
  CHECK(action.arguments[0].first == "dietary_preferences");
  CHECK(action.arguments[0].second == "[\"vegetarian\"]");
  CHECK(action.arguments[1] == std::pair<std::string, std::string>{"caloric_goal", "1500"});
  CHECK(action.arguments[2] == std::pair<std::string, std::string>{"num_meals", "3"});
}

TEST_CASE("format(parse(text)) is idempotent on valid ACTION blocks") {
  const std::vector<std::string> blocks = {
      "ACTION_TYPE : API_CALL\nACTION: Search Food Items(query=\"tofu\", limit=5)",
      "Let me call the API.\n\nACTION_TYPE : API_CALL\nACTION: View All Food Items()",
      "ACTION_TYPE : STOP\nACTION: FINAL_ANSWER(Your meal plan is ready.)",
      "ACTION_TYPE : STOP\nACTION: FAILED(the appropriate APIs are not available)",
      "```markdown\nACTION_TYPE : API_CALL\nACTION: Create Meal "
      "Plan(dietary_preferences=[\"vegan\",\"gluten-free\"], caloric_goal=1800)\n```",
  };
  for (const auto& block : blocks) {
    const std::string once = tooluse::format_action(tooluse::parse_action(block));
    const std::string twice = tooluse::format_action(tooluse::parse_action(once));
    CHECK(once == twice);
  }
}

TEST_CASE("action parsing failures") {
  CHECK_THROWS_AS(tooluse::parse_action("I will now call the API."), ActionParseFailure);
  CHECK_THROWS_AS(tooluse::parse_action("ACTION_TYPE : API_CALL\nno action line"),
                  ActionParseFailure);
  CHECK_THROWS_AS(tooluse::parse_action("ACTION_TYPE : SOMETHING\nACTION: f(x=1)"),
                  ActionParseFailure);
  CHECK_THROWS_AS(tooluse::parse_action("ACTION_TYPE : STOP\nACTION: GIVE_UP(reason)"),
                  ActionParseFailure);
  CHECK_THROWS_AS(tooluse::parse_action("ACTION_TYPE : API_CALL\nACTION: f(no_equals_sign)"),
                  ActionParseFailure);
}

TEST_CASE("argument canonicalization sorts keys and normalizes values") {
  const std::vector<std::pair<std::string, std::string>> args = {
      {"num_meals", "3.0"}, {"caloric_goal", "1500"}, {"note", "light dinner"}};
  CHECK(tooluse::canonicalize_arguments(args) ==
        "caloric_goal=1500, note=\"light dinner\", num_meals=3");
  CHECK(tooluse::canonicalize_arguments({{"x", "2.50"}}) == "x=2.5");
  CHECK(tooluse::canonicalize_arguments({{"q", "\"quoted\""}}) == "q=\"quoted\"");
  CHECK(tooluse::canonicalize_arguments({{"l", "[\"a\", \"b\"]"}}) == "l=[\"a\", \"b\"]");
}

TEST_CASE("the simulated executor is a pure fixture lookup with an echo fallback") {
  std::map<std::pair<std::string, std::string>, std::string> table;
  table[{"Search Food Items", "query=\"tofu\""}] = "{\"status\": \"success\", \"items\": []}";
  tooluse::SimulatedExecutor executor(std::move(table));

  CHECK(executor.execute("Search Food Items", {{"query", "\"tofu\""}}) ==
        "{\"status\": \"success\", \"items\": []}");
  // argument order does not matter for the lookup
  CHECK(executor.execute("Search Food Items", {{"query", "tofu"}}) ==
        executor.execute("Search Food Items", {{"query", "tofu"}}));
  const std::string echo = executor.execute("Unknown API", {{"a", "1"}});
  CHECK(echo.find("\"status\":\"success\"") != std::string::npos);
  CHECK(echo.find("Unknown API") != std::string::npos);
}

TEST_CASE("executor fixture files load") {
  test::TempDir dir;
  test::write_file(dir.path() / "exec.jsonl",
                   "{\"api\": \"Delete Food Item\", \"args_canonical\": \"food_id=\\\"7\\\"\", "
                   "\"response\": \"{\\\"status\\\": \\\"deleted\\\"}\"}\n");
  const auto executor = tooluse::SimulatedExecutor::from_file(dir.path() / "exec.jsonl");
  CHECK(executor.execute("Delete Food Item", {{"food_id", "\"7\""}}) ==
        "{\"status\": \"deleted\"}");
}

TEST_CASE("api synthesis parses the scripted spec") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  const auto seed = make_seed_document(SeedKind::code,
                                       "def view_all_food_items(limit=None): ...", "test");
  SUBCASE("valid spec") {
    auto backend = test::scripted({{make_tag("api_synthesis", seed.id, "toolspec", 0),
                                    std::string("Here is the API description:\n") +
                                        kFoodItemsSpec}});
    const auto spec = tooluse::synthesize_api_from_code(seed, prompts, backend);
    CHECK(spec.name == "View All Food Items");
    CHECK_FALSE(spec.parameters[0].required);  // limit is optional
  }
  SUBCASE("malformed payload raises") {
    auto backend = test::scripted(
        {{make_tag("api_synthesis", seed.id, "toolspec", 0), "no json to be found"}});
    CHECK_THROWS_AS(tooluse::synthesize_api_from_code(seed, prompts, backend), ApiParseFailure);
  }
  SUBCASE("text seeds are rejected") {
    auto backend = test::scripted({});
    const auto text_seed = make_seed_document(SeedKind::text, "prose", "test");
    CHECK_THROWS_AS(tooluse::synthesize_api_from_code(text_seed, prompts, backend),
                    InvalidRequest);
  }
}

TEST_CASE("library reconstruction by hypothesis") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  const auto seed = tooluse::api_spec_from_json(kFoodItemsSpec);
  const std::string lib_tag =
      make_tag("library_hypothesize", content_digest(tooluse::api_spec_to_json(seed)),
               "toollib", 0);
  RandomStream rng(1);

  SUBCASE("the food library expands with sibling APIs") {
    const std::string fixture = std::string("[") +
        tooluse::api_spec_to_json(make_api("Search Food Items", {{"query", "string", true}})) +
        "," +
        tooluse::api_spec_to_json(make_api("Create Meal Plan", {{"caloric_goal", "number", true}})) +
        "," + tooluse::api_spec_to_json(make_api("Delete Food Item", {{"food_id", "string", true}})) +
        "]";
    auto backend = test::scripted({{lib_tag, fixture}});
    const auto library = tooluse::reconstruct_library(
        seed, tooluse::ReconstructionStrategy::hypothesize, 4, prompts, backend, rng);
    REQUIRE(library.size() == 4);
    CHECK(library[0].name == "View All Food Items");  // seed first
    std::vector<std::string> names;
    for (const auto& spec : library) names.push_back(spec.name);
    for (const char* expected : {"Search Food Items", "Create Meal Plan", "Delete Food Item"}) {
      CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    }
  }

  SUBCASE("duplicates of the seed name leave the library too small") {
    auto backend = test::scripted(
        {{lib_tag, std::string("[") + tooluse::api_spec_to_json(seed) + "]"}});
    tooluse::ReconstructionCounters counters;
    CHECK_THROWS_AS(tooluse::reconstruct_library(seed,
                                                 tooluse::ReconstructionStrategy::hypothesize, 4,
                                                 prompts, backend, rng, nullptr, &counters),
                    LibraryTooSmall);
    CHECK(counters.duplicate_names == 1);
  }

  SUBCASE("malformed entries are counted and dropped, size is capped") {
    std::string fixture = "[";
    for (int i = 0; i < 9; ++i) {
      if (i > 0) fixture += ",";
      fixture += tooluse::api_spec_to_json(
          make_api("API " + std::to_string(i), {{"p", "string", true}}));
    }
    fixture += ",{\"bad\": 1},{\"description\": \"no name\"},{\"name\": \"\"}]";
    auto backend = test::scripted({{lib_tag, fixture}});
    tooluse::ReconstructionCounters counters;
    const auto library = tooluse::reconstruct_library(
        seed, tooluse::ReconstructionStrategy::hypothesize, 10, prompts, backend, rng, nullptr,
        &counters);
    CHECK(library.size() == 10);
    CHECK(counters.malformed_specs == 3);
  }
}

TEST_CASE("retrieval reconstruction walks similar corpus code") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  test::TempDir dir;
  test::write_file(dir.path() / "food_search.py",
                   "# search food items by name query and limit results\n" +
                       std::string(250, '#'));
  test::write_file(dir.path() / "unrelated.py",
                   "# completely different machinery about tensors\n" + std::string(250, '='));
  const auto corpus = ingest({dir.path()});
  const auto seed = tooluse::api_spec_from_json(kFoodItemsSpec);

  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& doc : corpus.documents) {
    entries.emplace_back(
        make_tag("api_synthesis", doc.id, "toolspec", 0),
        tooluse::api_spec_to_json(make_api("API for " + doc.id.substr(0, 6),
                                           {{"query", "string", true}})));
  }
  auto backend = test::scripted(entries);
  RandomStream rng(1);
  const auto library =
      tooluse::reconstruct_library(seed, tooluse::ReconstructionStrategy::retrieval, 3, prompts,
                                   backend, rng, &corpus);
  CHECK(library.size() >= 2);
  CHECK(library[0].name == "View All Food Items");

  SUBCASE("retrieval without a corpus is a configuration error") {
    CHECK_THROWS_AS(tooluse::reconstruct_library(
                        seed, tooluse::ReconstructionStrategy::retrieval, 3, prompts, backend,
                        rng, nullptr),
                    ConfigError);
  }
}

TEST_CASE("task classification implements the taxonomy") {
  const auto library = food_library();
  std::vector<std::string> all_names;
  for (const auto& spec : library) all_names.push_back(spec.name);

  tooluse::ToolTaskPlan plan;
  plan.apis = {"Search Food Items"};
  plan.provided = {{"query", "tofu"}};
  CHECK(*tooluse::classify_tool_task(plan, all_names, library) ==
        tooluse::TaskType::single_all_params);

  plan.provided["urgency"] = "high";
  CHECK(*tooluse::classify_tool_task(plan, all_names, library) ==
        tooluse::TaskType::single_superfluous_params);

  plan.provided = {{"limit", "3"}};
  CHECK(*tooluse::classify_tool_task(plan, all_names, library) ==
        tooluse::TaskType::single_missing_params);

  plan.apis = {"Search Food Items", "Delete Food Item"};
  plan.provided = {{"query", "tofu"}, {"food_id", "9"}};
  CHECK(*tooluse::classify_tool_task(plan, all_names, library) ==
        tooluse::TaskType::multi_all_params);

  plan.provided = {{"query", "tofu"}};
  CHECK(*tooluse::classify_tool_task(plan, all_names, library) ==
        tooluse::TaskType::multi_missing_params);

  std::vector<std::string> without_search = {"View All Food Items", "Create Meal Plan",
                                             "Delete Food Item"};
  plan.apis = {"Search Food Items"};
  plan.provided = {{"query", "tofu"}};
  CHECK(*tooluse::classify_tool_task(plan, without_search, library) ==
        tooluse::TaskType::single_api_unavailable);

  plan.apis = {"Search Food Items", "Delete Food Item"};
  CHECK(*tooluse::classify_tool_task(plan, without_search, library) ==
        tooluse::TaskType::multi_api_unavailable);

  plan.apis = {"Nonexistent API"};
  CHECK_FALSE(tooluse::classify_tool_task(plan, all_names, library).has_value());
  plan.apis = {};
  CHECK_FALSE(tooluse::classify_tool_task(plan, all_names, library).has_value());
}

TEST_CASE("make_tool_tasks generates validated tasks from scripted output") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  // A two-API library where only Search has a required parameter, so the
  // missing-params brief must target it.
  const std::vector<tooluse::ApiSpec> library = {
      make_api("View All Food Items", {{"limit", "number", false}}),
      make_api("Search Food Items", {{"query", "string", true}, {"limit", "number", false}}),
  };
  const std::string presented = tooluse::library_to_json(library);

  SUBCASE("single_missing_params omits the required query") {
    const std::string task_key = content_digest(presented + "single_missing_params");
    auto backend = test::scripted(
        {{make_tag("tool_task_single_missing_params", task_key, "tooltask", 0),
          "1. I want to look up something in the food database, can you run the search for "
          "me?\nPLAN: {\"apis\": [\"Search Food Items\"], \"provided\": {}}\n"}});
    RandomStream rng(1);
    const auto tasks = tooluse::make_tool_tasks(
        library, tooluse::TaskType::single_missing_params, prompts, backend, rng);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].task_type == "single_missing_params");
    const auto report = tooluse::validate_tool_task(tasks[0], library);
    CHECK(report.ok());
    // the required parameter is indeed absent from the stated inputs
    const auto plan = tooluse::plan_from_json(*tasks[0].reference_answer);
    CHECK(plan.provided.count("query") == 0);
  }

  SUBCASE("multi task over a 1-API library is infeasible") {
    const std::vector<tooluse::ApiSpec> tiny = {library[0]};
    auto backend = test::scripted({});
    RandomStream rng(1);
    CHECK_THROWS_AS(tooluse::make_tool_tasks(tiny, tooluse::TaskType::multi_all_params, prompts,
                                             backend, rng),
                    InfeasibleTaskType);
  }

  SUBCASE("single_api_unavailable withholds the target from the presented list") {
    // the rng picks one of two withholding choices; cover both briefs
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t withheld = 0; withheld < library.size(); ++withheld) {
      std::vector<tooluse::ApiSpec> shown;
      for (std::size_t i = 0; i < library.size(); ++i) {
        if (i != withheld) shown.push_back(library[i]);
      }
      const std::string task_key =
          content_digest(tooluse::library_to_json(shown) + "single_api_unavailable");
      entries.emplace_back(
          make_tag("tool_task_single_api_unavailable", task_key, "tooltask", 0),
          "1. Please use " + library[withheld].name +
              " to get what I need.\nPLAN: {\"apis\": [\"" + library[withheld].name +
              "\"], \"provided\": {}}\n");
    }
    auto backend = test::scripted(entries);
    RandomStream rng(42);
    const auto tasks = tooluse::make_tool_tasks(
        library, tooluse::TaskType::single_api_unavailable, prompts, backend, rng);
    REQUIRE(tasks.size() == 1);
    const auto plan = tooluse::plan_from_json(*tasks[0].reference_answer);
    REQUIRE(plan.apis.size() == 1);
    // hidden target is not in the presented list
    CHECK(tasks[0].context->find("\"" + plan.apis[0] + "\"") == std::string::npos);
    CHECK(tooluse::validate_tool_task(tasks[0], library).ok());
  }
}

namespace {

SeedInstruction meal_plan_task(const std::vector<tooluse::ApiSpec>& library) {
  SeedInstruction task;
  task.seed_id = "mealseed";
  task.task_type = "single_all_params";
  task.context = tooluse::library_to_json(library);
  task.task =
      "I want to start a new diet plan for the next week. My goal is to consume around 1500 "
      "calories per day, and I prefer vegetarian meals. I'll be eating three meals a day. Can "
      "you create a meal plan for me?";
  tooluse::ToolTaskPlan plan;
  plan.apis = {"Create Meal Plan"};
  plan.provided = {{"dietary_preferences", "[\"vegetarian\"]"},
                   {"caloric_goal", "1500"},
                   {"num_meals", "3"}};
  task.reference_answer = tooluse::plan_to_json(plan);
  return task;
}

}  // namespace

TEST_CASE("conversation synthesis alternates actions and executor results") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  const auto library = food_library();
  const auto task = meal_plan_task(library);
  const std::string task_digest = content_digest({task.seed_id, task.task});

  SUBCASE("meal plan conversation ends in FINAL_ANSWER") {
    auto backend = test::scripted(
        {{make_tag("tool_assistant", task_digest, "toolconv.t0", 0),
          "Let's start by creating a vegetarian meal plan.\n\n```markdown\n"
          "ACTION_TYPE : API_CALL\n"
          "ACTION: Create Meal Plan(dietary_preferences=[\"vegetarian\"], caloric_goal=1500, "
          "num_meals=3)\n```"},
         {make_tag("tool_assistant", task_digest, "toolconv.t1", 0),
          "Your meal plan is ready.\n\nACTION_TYPE : STOP\n"
          "ACTION: FINAL_ANSWER(Your vegetarian meal plan for the week is ready.)"}});
    const auto conversation =
        tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                              tooluse::SimulatedExecutor{});
    REQUIRE(conversation.turns.size() == 4);  // user, assistant, executor, assistant
    const auto first_action = tooluse::parse_action(conversation.turns[1].content);
    CHECK(first_action.name == "Create Meal Plan");
    CHECK(first_action.arguments[0].second == "[\"vegetarian\"]");
    CHECK(conversation.turns[2].role == Role::user);  // executor result
    CHECK(conversation.expected_terminal.name == "FINAL_ANSWER");
    CHECK(conversation.system_message.find("ACTION_TYPE : API_CALL") != std::string::npos);
    CHECK(conversation.system_message.find("Create Meal Plan") != std::string::npos);
  }

  SUBCASE("unavailable-API tasks must end in FAILED") {
    auto unavailable = task;
    unavailable.task_type = "single_api_unavailable";
    std::vector<tooluse::ApiSpec> shown = {library[0], library[1]};  // no Create Meal Plan
    unavailable.context = tooluse::library_to_json(shown);
    const std::string digest = content_digest({unavailable.seed_id, unavailable.task});
    auto backend = test::scripted(
        {{make_tag("tool_assistant", digest, "toolconv.t0", 0),
          "ACTION_TYPE : STOP\nACTION: FAILED(the appropriate APIs are not available)"}});
    const auto conversation = tooluse::synthesize_tool_conversation(
        unavailable, library, prompts, backend, tooluse::SimulatedExecutor{});
    CHECK(conversation.expected_terminal.name == "FAILED");
    REQUIRE(conversation.expected_terminal.arguments.size() == 1);
    CHECK(conversation.expected_terminal.arguments[0].second ==
          "the appropriate APIs are not available");
  }

  SUBCASE("missing ACTION_TYPE raises ActionParseFailure") {
    auto backend = test::scripted({{make_tag("tool_assistant", task_digest, "toolconv.t0", 0),
                                    "I think I should call an API now."}});
    CHECK_THROWS_AS(tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                                          tooluse::SimulatedExecutor{}),
                    ActionParseFailure);
  }

  SUBCASE("a truncated assistant turn is never parsed as an action") {
    std::unordered_map<std::string, CompletionResponse> fixtures;
    CompletionResponse cut;
    cut.content = "ACTION_TYPE : API_CALL\nACTION: View All Food Items()";
    cut.finish_reason = FinishReason::truncated;
    fixtures[make_tag("tool_assistant", task_digest, "toolconv.t0", 0)] = cut;
    ScriptedBackend backend(fixtures);
    CHECK_THROWS_AS(tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                                          tooluse::SimulatedExecutor{}),
                    ActionParseFailure);
  }

  SUBCASE("a terminal of the wrong class raises TerminalMismatch") {
    auto backend = test::scripted(
        {{make_tag("tool_assistant", task_digest, "toolconv.t0", 0),
          "ACTION_TYPE : STOP\nACTION: FAILED(giving up for no reason)"}});
    CHECK_THROWS_AS(tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                                          tooluse::SimulatedExecutor{}),
                    TerminalMismatch);
  }

  SUBCASE("calling an unlisted API on a solvable task is a failure") {
    auto backend = test::scripted(
        {{make_tag("tool_assistant", task_digest, "toolconv.t0", 0),
          "ACTION_TYPE : API_CALL\nACTION: Fabricated API(x=1)"}});
    CHECK_THROWS_AS(tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                                          tooluse::SimulatedExecutor{}),
                    ActionParseFailure);
  }

  SUBCASE("endless call loops hit the turn cap") {
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 3; ++i) {
      entries.emplace_back(make_tag("tool_assistant", task_digest,
                                    "toolconv.t" + std::to_string(i), 0),
                           "ACTION_TYPE : API_CALL\nACTION: View All Food Items()");
    }
    auto backend = test::scripted(entries);
    tooluse::ConversationOptions options;
    options.max_assistant_turns = 3;
    CHECK_THROWS_AS(tooluse::synthesize_tool_conversation(task, library, prompts, backend,
                                                          tooluse::SimulatedExecutor{}, options),
                    TurnCapExceeded);
  }
}

TEST_CASE("tool task refinement") {
  const auto prompts = tooluse::load_prompts(test::prompts_dir());
  const auto library = food_library();
  const auto task = meal_plan_task(library);
  const std::string task_digest = content_digest({task.seed_id, task.task});

  tooluse::ToolConversation conversation;
  conversation.system_message = "system";
  conversation.turns = {user_message(task.task), assistant_message("ACTION_TYPE : STOP\n"
                                                                   "ACTION: FINAL_ANSWER(done)")};

  SUBCASE("zero rounds is the identity") {
    auto backend = test::scripted({});
    RandomStream rng(1);
    const auto refined =
        tooluse::refine_tool_task(task, conversation, library, prompts, backend, rng, 0);
    CHECK(refined.task == task.task);
    CHECK(refined.task_type == task.task_type);
  }

  SUBCASE("an edit that adds a second API reclassifies to multi") {
    auto backend = test::scripted(
        {{make_tag("tool_suggester", task_digest, "toolrefine.s.r0", 0),
          "1. Also have the user ask to remove an item from the database afterwards.\n"},
         {make_tag("tool_editor", task_digest, "toolrefine.e.r0", 0),
          "1. Create a vegetarian meal plan at 1500 calories with three meals a day, and "
          "afterwards delete 'Butter Chicken' (food id 42) from my list.\n"
          "PLAN: {\"apis\": [\"Create Meal Plan\", \"Delete Food Item\"], \"provided\": "
          "{\"dietary_preferences\": \"[\\\"vegetarian\\\"]\", \"caloric_goal\": \"1500\", "
          "\"num_meals\": \"3\", \"food_id\": \"42\"}}\n"}});
    RandomStream rng(1);
    FlowCounters counters;
    const auto refined = tooluse::refine_tool_task(task, conversation, library, prompts, backend,
                                                   rng, 1, &counters);
    CHECK(refined.task_type == "multi_all_params");
    CHECK(tooluse::validate_tool_task(refined, library).ok());
    const auto plan = tooluse::plan_from_json(*refined.reference_answer);
    CHECK(plan.apis.size() == 2);
    CHECK(counters.refinement_rounds == 1);
  }

  SUBCASE("an invalid edit keeps the original and counts the failure") {
    auto backend = test::scripted(
        {{make_tag("tool_suggester", task_digest, "toolrefine.s.r0", 0), "1. An idea.\n"},
         {make_tag("tool_editor", task_digest, "toolrefine.e.r0", 0),
          "1. A task naming a ghost API.\nPLAN: {\"apis\": [\"Ghost API\"], \"provided\": {}}\n"}});
    RandomStream rng(1);
    FlowCounters counters;
    const auto refined = tooluse::refine_tool_task(task, conversation, library, prompts, backend,
                                                   rng, 1, &counters);
    CHECK(refined.task == task.task);
    CHECK(counters.editor_failures == 1);
  }
}

TEST_CASE("conversations convert to records with ACTION blocks verbatim") {
  tooluse::ToolConversation conversation;
  conversation.system_message = "protocol text";
  const std::string action1 =
      "ACTION_TYPE : API_CALL\nACTION: Search Food Items(query=\"tofu\")";
  const std::string action2 = "ACTION_TYPE : API_CALL\nACTION: View All Food Items()";
  const std::string action3 = "ACTION_TYPE : STOP\nACTION: FINAL_ANSWER(done)";
  conversation.turns = {user_message("the task"),      assistant_message(action1),
                        user_message("{\"ok\": 1}"),   assistant_message(action2),
                        user_message("{\"ok\": 2}"),   assistant_message(action3)};
  conversation.expected_terminal = tooluse::parse_action(action3);

  Lineage lineage;
  lineage.seed_id = "s";
  const auto record =
      tooluse::conversation_record(conversation, lineage, RecordOrigin::seed_instruction);
  CHECK(record.skill == "tool_use");
  CHECK(record.system_message == "protocol text");
  REQUIRE(record.turns.size() == 6);
  CHECK(record.turns[1].content == action1);
  CHECK(record.turns[3].content == action2);
  CHECK(record.turns[5].content == action3);
}
