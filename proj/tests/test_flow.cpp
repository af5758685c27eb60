#include "agentforge/flow.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"

#include <doctest.h>

#include "support/helpers.hpp"

#include <map>
#include <set>

using namespace agentforge;

namespace {

AgentSpec identity_agent(const std::string& name = "identity") {
  AgentSpec agent;
  agent.name = name;
  agent.stage = AgentStage::content_transformation;
  agent.identity = true;
  return agent;
}

AgentSpec prompt_agent(const std::string& name, AgentStage stage, const std::string& prompt) {
  AgentSpec agent;
  agent.name = name;
  agent.stage = stage;
  agent.role_prompt = prompt;
  return agent;
}

FlowConfig minimal_flow() {
  FlowConfig flow;
  flow.skill = "demo";
  flow.max_refinement_rounds = 0;
  flow.transformation_agents.push_back(identity_agent());
  AgentSpec asker = prompt_agent("asker", AgentStage::seed_instruction, "ask questions");
  asker.task_type = "basic";
  flow.instruction_agents.push_back(asker);
  flow.routing["identity"] = {"asker"};
  flow.responder = prompt_agent("responder", AgentStage::seed_instruction, "answer tasks");
  return flow;
}

SeedDocument seed_of(const std::string& content) {
  return make_seed_document(SeedKind::text, content, "test");
}

}  // namespace

TEST_CASE("identity transformation replicates the seed verbatim") {
  FlowConfig flow = minimal_flow();
  auto backend = test::scripted({});
  RandomStream rng(1);
  const auto seed = seed_of("the exact seed content\nwith two lines");
  const auto transformed = transform_seed(seed, flow, rng, backend);
  CHECK(transformed.content == seed.content);
  CHECK(transformed.agent_name == "identity");
  CHECK(transformed.seed_id == seed.id);
}

TEST_CASE("argument passage transformation follows the scripted fixture") {
  FlowConfig flow = minimal_flow();
  flow.transformation_agents = {
      prompt_agent("argument_passage", AgentStage::content_transformation, "write arguments")};
  flow.routing.clear();
  const auto seed = seed_of(
      "Uric acid is a substance produced naturally by the breakdown of purine (a type of "
      "dietary protein). When it is in excess in the body, crystals composed of these "
      "substances are formed.");
  const std::string passage =
      "Recent studies have indicated that high levels of uric acid in the blood, known as "
      "hyperuricemia, may increase the risk of cardiovascular disease.";
  auto backend =
      test::scripted({{make_tag("argument_passage", seed.id, "transform", 0), passage}});
  RandomStream rng(1);
  const auto transformed = transform_seed(seed, flow, rng, backend);
  CHECK(transformed.content.rfind("Recent studies have indicated that high levels of uric acid",
                                  0) == 0);
}

TEST_CASE("blank or refused transformation output raises EmptyTransformation") {
  FlowConfig flow = minimal_flow();
  flow.transformation_agents = {
      prompt_agent("rewriter", AgentStage::content_transformation, "rewrite")};
  const auto seed = seed_of("content");
  auto backend = test::scripted({{make_tag("rewriter", seed.id, "transform", 0), "   "}});
  RandomStream rng(1);
  CHECK_THROWS_AS(transform_seed(seed, flow, rng, backend), EmptyTransformation);
}

TEST_CASE("agent selection over many seeds touches every agent") {
  // 9 identity-flagged agents stand in for the full transformation suite;
  // selection is what is under test. P(missing one) < 1e-40 at 900 draws.
  FlowConfig flow = minimal_flow();
  flow.transformation_agents.clear();
  for (int i = 0; i < 9; ++i) {
    flow.transformation_agents.push_back(identity_agent("agent_" + std::to_string(i)));
  }
  auto backend = test::scripted({});
  std::map<std::string, int> selections;
  RandomStream root(2024);
  for (int i = 0; i < 900; ++i) {
    const auto seed = seed_of("seed number " + std::to_string(i));
    RandomStream rng = root.child("seed." + seed.id);
    selections[transform_seed(seed, flow, rng, backend).agent_name]++;
  }
  CHECK(selections.size() == 9);
}

TEST_CASE("instruction generation parses routed agent output") {
  FlowConfig flow = minimal_flow();
  const auto seed = seed_of("passage seed");
  TransformedSeed transformed{seed.id, "identity", "The passage under question."};

  SUBCASE("strengthen-style fixture yields one instruction with options") {
    flow.instruction_agents[0].task_type = "strengthen";
    auto backend = test::scripted(
        {{make_tag("asker", seed.id, "instruct", 0),
          "1. Which one of the following, if true, most strengthens the argument that high "
          "levels of uric acid increase the risk of cardiovascular disease?\n"
          "(A) Some individuals with hyperuricemia do not develop cardiovascular disease.\n"
          "(B) Physical activity has been found to have no significant impact on uric acid "
          "levels in the blood.\n"
          "(C) Dietary supplements have been shown to reduce uric acid levels in the blood.\n"
          "(D) A significant number of patients with cardiovascular disease have been found "
          "to have uric acid levels above the defined thresholds for hyperuricemia.\n"
          "(E) Individuals with a family history of cardiovascular disease are more likely "
          "to have high uric acid levels.\n"}});
    RandomStream rng(1);
    FlowCounters counters;
    const auto instructions =
        generate_seed_instructions(transformed, flow, rng, backend, &counters);
    REQUIRE(instructions.size() == 1);
    CHECK(instructions[0].task_type == "strengthen");
    CHECK(instructions[0].answer_options.size() == 5);
    CHECK(instructions[0].task.find("most strengthens") != std::string::npos);
    CHECK(instructions[0].context == transformed.content);
    CHECK(instructions[0].seed_id == seed.id);
  }

  SUBCASE("empty output from every routed agent raises NoInstructionsProduced") {
    auto backend = test::scripted({{make_tag("asker", seed.id, "instruct", 0), "no list here"}});
    RandomStream rng(1);
    CHECK_THROWS_AS(generate_seed_instructions(transformed, flow, rng, backend),
                    NoInstructionsProduced);
  }

  SUBCASE("malformed items are dropped and counted") {
    auto backend = test::scripted({{make_tag("asker", seed.id, "instruct", 0),
                                    "1. Good one.\n2.\n3. Also good.\n4. Third good.\n"}});
    RandomStream rng(1);
    FlowCounters counters;
    const auto instructions =
        generate_seed_instructions(transformed, flow, rng, backend, &counters);
    CHECK(instructions.size() == 3);
    CHECK(counters.malformed_items == 1);
  }
}

TEST_CASE("truncated payloads are never parsed as structured output") {
  FlowConfig flow = minimal_flow();
  const auto seed = seed_of("passage seed");
  TransformedSeed transformed{seed.id, "identity", "The passage."};

  std::unordered_map<std::string, CompletionResponse> fixtures;
  CompletionResponse cut;
  cut.content = "1. A task that looks fine but was cut off";
  cut.finish_reason = FinishReason::truncated;
  fixtures[make_tag("asker", seed.id, "instruct", 0)] = cut;
  ScriptedBackend backend(fixtures);

  RandomStream rng(1);
  FlowCounters counters;
  CHECK_THROWS_AS(generate_seed_instructions(transformed, flow, rng, backend, &counters),
                  NoInstructionsProduced);
  CHECK(counters.malformed_items == 1);
}

TEST_CASE("refinement with zero rounds returns the input unchanged") {
  FlowConfig flow = minimal_flow();
  SeedInstruction instr;
  instr.seed_id = "s";
  instr.task = "original task";
  instr.task_type = "basic";
  auto backend = test::scripted({});
  RandomStream rng(1);
  const auto result = refine(instr, flow, rng, backend);
  CHECK(result.instruction.task == "original task");
  CHECK(result.trace.rounds.empty());
}

TEST_CASE("refinement applies a suggester-editor round") {
  FlowConfig flow = minimal_flow();
  flow.max_refinement_rounds = 1;
  RefinementPair pair;
  pair.suggester = prompt_agent("sugg", AgentStage::suggester, "suggest");
  pair.editor = prompt_agent("edit", AgentStage::editor, "edit");
  flow.refinement_pairs.push_back(pair);

  SeedInstruction instr;
  instr.seed_id = "seed1";
  instr.task = "Rewrite the event details (date, location, abstract deadline) in a more casual tone.";
  instr.task_type = "paraphrasing";
  instr.context = "April 6-8, 2017, University of Iowa, Iowa City, USA.";

  SUBCASE("suggestions are recorded and one edit is applied") {
    auto backend = test::scripted(
        {{make_tag("sugg", "seed1", "suggest.i0.r0", 0),
          "1. Incorporate a fictional narrative.\n"
          "2. Translate the event details into a poetic format. Maintain accurate information "
          "while using rhyming couplets and ensure the tone remains light and engaging.\n"
          "3. Frame the event details as a social media post.\n"},
         {make_tag("edit", "seed1", "edit.i0.r0", 0),
          "Transform the event details (date, location, abstract deadline) into a light-hearted "
          "poem with rhyming couplets, ensuring that the essential information is accurately "
          "conveyed in a poetic format.\n"}});
    RandomStream rng(7);
    FlowCounters counters;
    const auto result = refine(instr, flow, rng, backend, "i0", &counters);
    REQUIRE(result.trace.rounds.size() == 1);
    CHECK(result.trace.rounds[0].suggestions.size() == 3);
    CHECK(result.trace.rounds[0].suggestions[1].find("poetic format") != std::string::npos);
    CHECK(result.trace.rounds[0].chosen_suggestion_index <
          result.trace.rounds[0].suggestions.size());
    CHECK(result.instruction.task.find("light-hearted") != std::string::npos);
    CHECK(result.instruction.context == instr.context);  // editor did not touch the passage
    CHECK(result.pair_names == std::vector<std::string>{"sugg+edit"});
    CHECK(counters.refinement_rounds == 1);
  }

  SUBCASE("a distractor-inserting editor rewrites the options") {
    instr.task = "Which one of the following, if true, most strengthens the argument?";
    instr.task_type = "strengthen";
    instr.answer_options = {"(A) old a", "(B) old b", "(C) old c", "(D) old d", "(E) old e"};
    auto backend = test::scripted(
        {{make_tag("sugg", "seed1", "suggest.i0.r0", 0),
          "1. Include a distractor option that seems to strengthen the argument but does not "
          "directly relate to the causal relationship.\n"},
         {make_tag("edit", "seed1", "edit.i0.r0", 0),
          "Task: Which one of the following, if true, most strengthens the argument?\n"
          "(A) Some individuals with hyperuricemia do not develop cardiovascular disease.\n"
          "(B) Physical activity has been found to have no significant impact on uric acid "
          "levels in the blood.\n"
          "(C) A placebo-controlled trial shows that individuals taking uric acid-lowering "
          "medication do not exhibit a reduced incidence of cardiovascular disease compared "
          "to the placebo group.\n"
          "(D) A significant number of patients with cardiovascular disease have been found "
          "to have uric acid levels above the defined thresholds for hyperuricemia.\n"
          "(E) A cross-sectional study finds that high uric acid levels are associated with "
          "other risk factors for cardiovascular disease.\n"
          "Answer: (D)\n"}});
    RandomStream rng(3);
    const auto result = refine(instr, flow, rng, backend);
    REQUIRE(result.trace.rounds.size() == 1);
    bool has_distractor = false;
    for (const auto& option : result.instruction.answer_options) {
      if (option.find("placebo-controlled trial") != std::string::npos) has_distractor = true;
    }
    CHECK(has_distractor);
  }

  SUBCASE("editor failure discards the round and keeps the input") {
    auto backend = test::scripted({{make_tag("sugg", "seed1", "suggest.i0.r0", 0), "1. Idea.\n"},
                                   {make_tag("edit", "seed1", "edit.i0.r0", 0), "   "}});
    RandomStream rng(3);
    FlowCounters counters;
    const auto result = refine(instr, flow, rng, backend, "i0", &counters);
    CHECK(result.trace.rounds.empty());
    CHECK(result.instruction.task == instr.task);
    CHECK(counters.editor_failures == 1);
  }
}

namespace {

// Corpus + fixtures for pipeline tests: identity transform, one asker, one
// responder, fixtures for every seed.
struct PipelineFixture {
  test::TempDir corpus_dir;
  CorpusManifest manifest;
  FlowConfig flow = minimal_flow();
  std::unordered_map<std::string, CompletionResponse> fixtures;

  explicit PipelineFixture(int n_seeds, int blank_transform_count = 0) {
    for (int i = 0; i < n_seeds; ++i) {
      test::write_file(corpus_dir.path() / ("doc" + std::to_string(i) + ".txt"),
                       "Seed document number " + std::to_string(i) + ". " +
                           std::string(250, 'a' + (i % 20)));
    }
    manifest = ingest({corpus_dir.path()});

    if (blank_transform_count > 0) {
      flow.transformation_agents = {
          prompt_agent("rewriter", AgentStage::content_transformation, "rewrite")};
      flow.routing = {{"rewriter", {"asker"}}};
    }
    int blanks = blank_transform_count;
    for (const auto& doc : manifest.documents) {
      if (blank_transform_count > 0) {
        std::string passage = "Rewritten: " + doc.content.substr(0, 40);
        if (blanks > 0) {
          passage = "";
          --blanks;
        }
        add(make_tag("rewriter", doc.id, "transform", 0), passage);
      }
      add(make_tag("asker", doc.id, "instruct", 0), "1. Task about seed " + doc.id + "?\n");
      add(make_tag("responder", doc.id, "respond.i0.orig", 0), "Answer for seed " + doc.id + ".");
    }
  }

  void add(const std::string& tag, const std::string& content) {
    CompletionResponse response;
    response.content = content;
    response.usage = {10, static_cast<std::int64_t>(content.size() / 4)};
    fixtures[tag] = response;
  }
};

}  // namespace

TEST_CASE("minimal pipeline emits one record with full lineage") {
  PipelineFixture fixture(1);
  ScriptedBackend backend(fixture.fixtures);
  const auto result = run_pipeline(fixture.manifest, fixture.flow, 1, 5, backend);
  REQUIRE(result.shard.records.size() == 1);
  const auto& record = result.shard.records[0];
  const std::string seed_id = fixture.manifest.documents[0].id;
  CHECK(record.lineage.seed_id == seed_id);
  CHECK(record.lineage.transformation_agent == "identity");
  CHECK(record.lineage.instruction_agent == "asker");
  CHECK(record.created_from == RecordOrigin::seed_instruction);
  REQUIRE(record.turns.size() == 2);
  CHECK(record.turns[1].content == "Answer for seed " + seed_id + ".");
  // every lineage tag resolves in the fixture set
  for (const auto& tag : record.lineage.request_tags) {
    CHECK(backend.has_tag(tag));
  }
  CHECK(result.report.usage.responses == 2);  // asker + responder
}

TEST_CASE("worker counts do not change the shard") {
  PipelineFixture fixture(12);
  ScriptedBackend backend(fixture.fixtures);

  PipelineOptions serial;
  serial.workers = 1;
  PipelineOptions parallel;
  parallel.workers = 8;
  const auto a = run_pipeline(fixture.manifest, fixture.flow, 12, 99, backend, serial);
  const auto b = run_pipeline(fixture.manifest, fixture.flow, 12, 99, backend, parallel);

  test::TempDir out;
  export_shard(a.shard, out.path() / "a.jsonl");
  export_shard(b.shard, out.path() / "b.jsonl");
  CHECK(test::read_file(out.path() / "a.jsonl") == test::read_file(out.path() / "b.jsonl"));
  CHECK(a.report.usage.prompt_tokens == b.report.usage.prompt_tokens);
}

TEST_CASE("failed seeds are skipped and reported, not fatal") {
  PipelineFixture fixture(20, 2);
  ScriptedBackend backend(fixture.fixtures);
  const auto result = run_pipeline(fixture.manifest, fixture.flow, 20, 42, backend);
  CHECK(result.report.seeds_skipped == 2);
  CHECK(result.report.skip_reasons.at("empty_transformation") == 2);
  CHECK(result.report.seeds_completed == 18);
  CHECK(result.shard.records.size() == 18);
}

TEST_CASE("routing soundness holds across emitted records") {
  PipelineFixture fixture(6);
  ScriptedBackend backend(fixture.fixtures);
  const auto result = run_pipeline(fixture.manifest, fixture.flow, 6, 1, backend);
  for (const auto& record : result.shard.records) {
    const auto& eligible = fixture.flow.routing.at(record.lineage.transformation_agent);
    CHECK(std::find(eligible.begin(), eligible.end(), record.lineage.instruction_agent) !=
          eligible.end());
  }
}
