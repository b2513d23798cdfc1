#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace proalloc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using AuditReport = std::vector<CheckResult>;

inline bool all_passed(const AuditReport& report) {
  return std::all_of(report.begin(), report.end(),
                     [](const CheckResult& c) { return c.passed; });
}

inline void append(AuditReport& into, AuditReport more) {
  for (auto& c : more) into.push_back(std::move(c));
}

}  // namespace proalloc
