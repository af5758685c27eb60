#pragma once

#include <string>
#include <vector>

namespace agentforge {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& text);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

inline ChatMessage system_message(std::string content) {
  return ChatMessage{Role::system, std::move(content)};
}
inline ChatMessage user_message(std::string content) {
  return ChatMessage{Role::user, std::move(content)};
}
inline ChatMessage assistant_message(std::string content) {
  return ChatMessage{Role::assistant, std::move(content)};
}

// Message content must be non-empty after trimming; a transcript may carry
// at most one system message and only in first position. Throws
// InvalidRequest on violation.
void validate_transcript(const std::vector<ChatMessage>& messages);

std::string trim(const std::string& text);
bool is_blank(const std::string& text);

}  // namespace agentforge
