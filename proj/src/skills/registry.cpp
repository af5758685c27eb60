#include "agentforge/skills/registry.hpp"

namespace agentforge::skills {

const std::vector<SkillInfo>& skill_registry() {
  static const std::vector<SkillInfo> registry = {
      {"reading_comprehension", "Reading Comprehension",
       "Processing and understanding text passages and answering questions about them.",
       true},
      {"open_domain_qa", "Open Domain Question Answering",
       "Answering questions across a wide range of topics without domain restriction.",
       false},
      {"text_modification", "Text Modification",
       "Editing existing text to change its quality, tone, format or audience.", true},
      {"web_agent", "Web Agent",
       "Carrying out tasks on web pages such as clicking and scrolling.", false},
      {"brain_teaser", "Brain Teaser",
       "Puzzles that exercise logical thinking and problem solving.", false},
      {"analytical_reasoning", "Analytical Reasoning",
       "Discerning patterns and relationships in qualitative or quantitative information.",
       false},
      {"multiple_choice_questions", "Multiple Choice Questions",
       "Selecting the best answer(s) from a list of choices.", false},
      {"data_to_text", "Data To Text",
       "Producing readable summaries, reports or narratives from structured data.", false},
      {"fermi", "Fermi",
       "Order-of-magnitude estimation problems solved with justified assumptions.", false},
      {"coding", "Coding",
       "Writing, understanding, debugging and testing code.", false},
      {"text_extraction", "Text Extraction",
       "Retrieving entities, keywords or fields from larger documents.", false},
      {"text_classification", "Text Classification",
       "Assigning documents to predefined categories.", false},
      {"rag", "Retrieval Augmented Generation",
       "Answering with the help of retrieved supporting documents.", false},
      {"tool_use", "Tool Use",
       "Solving tasks by invoking external functions or APIs.", true},
      {"creative_content_generation", "Creative Content Generation",
       "Producing original content with novelty and value.", false},
      {"few_shot_reasoning", "Few Shot Reasoning",
       "Learning new tasks from a handful of examples.", false},
      {"conversation", "Conversation",
       "Natural multi-turn dialogue with a user.", false},
  };
  return registry;
}

const SkillInfo* find_skill(const std::string& id) {
  for (const auto& info : skill_registry()) {
    if (info.id == id) return &info;
  }
  return nullptr;
}

}  // namespace agentforge::skills
