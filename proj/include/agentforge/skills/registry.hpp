#pragma once

#include <string>
#include <vector>

namespace agentforge::skills {

// One entry per supported capability. Three skills ship full agent packs;
// the rest are registered for dataset bookkeeping and future packs.
struct SkillInfo {
  std::string id;
  std::string title;
  std::string description;
  bool has_pack = false;
};

const std::vector<SkillInfo>& skill_registry();
const SkillInfo* find_skill(const std::string& id);

}  // namespace agentforge::skills
