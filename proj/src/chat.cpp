#include "agentforge/chat.hpp"

#include "agentforge/error.hpp"

#include <algorithm>
#include <cctype>

namespace agentforge {

std::string to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& text) {
  if (text == "system") return Role::system;
  if (text == "user") return Role::user;
  if (text == "assistant") return Role::assistant;
  throw InvalidRequest("unknown chat role: " + text);
}

std::string trim(const std::string& text) {
  auto begin = std::find_if_not(text.begin(), text.end(),
                                [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(text.rbegin(), text.rend(),
                              [](unsigned char c) { return std::isspace(c); })
                 .base();
  if (begin >= end) return {};
  return std::string(begin, end);
}

bool is_blank(const std::string& text) { return trim(text).empty(); }

void validate_transcript(const std::vector<ChatMessage>& messages) {
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (is_blank(messages[i].content)) {
      throw InvalidRequest("message " + std::to_string(i) + " has empty content");
    }
    if (messages[i].role == Role::system && i != 0) {
      throw InvalidRequest("system message allowed only in first position");
    }
  }
}

}  // namespace agentforge
