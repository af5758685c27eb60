#pragma once

#include "agentforge/backend.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace agentforge::test {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("agentforge_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline ScriptedBackend scripted(std::vector<std::pair<std::string, std::string>> entries) {
  std::unordered_map<std::string, CompletionResponse> fixtures;
  for (auto& [tag, content] : entries) {
    CompletionResponse response;
    response.content = std::move(content);
    response.usage.completion_tokens = static_cast<std::int64_t>(response.content.size() / 4);
    fixtures[tag] = std::move(response);
  }
  return ScriptedBackend(std::move(fixtures));
}

inline std::filesystem::path repo_dir() { return std::filesystem::path(AGENTFORGE_REPO_DIR); }
inline std::filesystem::path prompts_dir() { return repo_dir() / "prompts"; }

}  // namespace agentforge::test
