#pragma once

// Desk-scale run of the twelve acceptance criteria with measured values.

#include <optional>
#include <string>
#include <vector>

namespace sas {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct SelfCheckOptions {
  std::vector<int> only;             // empty: all twelve
  std::optional<int> corrupt_gamma;  // criterion whose implementation sees a wrong gamma
  double corruption_factor = 1.5;
  unsigned threads = 1;
};

struct SelfCheckReport {
  std::vector<CheckResult> results;

  bool all_passed() const;
  /// {"passed": bool, "criteria": [{"id", "name", "passed", "measured",
  /// "threshold", "detail", "seconds"}]}
  std::string to_json() const;
  /// One "PASS"/"FAIL" line per criterion.
  std::string to_text() const;
};

inline constexpr int criterion_count = 12;

/// Never throws for a failing check; exceptions become failed entries.
CheckResult run_criterion(int id, const SelfCheckOptions& options = {});
SelfCheckReport run_self_check(const SelfCheckOptions& options = {});

}  // namespace sas
