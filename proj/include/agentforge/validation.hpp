#pragma once

#include <string>
#include <vector>

namespace agentforge {

// Report-based validation: failures are listed, never thrown.
struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  void fail(std::string issue) { issues.push_back(std::move(issue)); }
  std::string joined() const {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += "; ";
      out += issue;
    }
    return out;
  }
};

}  // namespace agentforge
