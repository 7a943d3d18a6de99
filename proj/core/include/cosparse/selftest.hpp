#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cosparse {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst observed error or the failure message
  double seconds = 0.0;
};

/// Names of the built-in invariant checks, in execution order.
std::vector<std::string> selftest_names();

/// Runs every invariant check whose name starts with `filter` (all when empty).
/// Exceptions thrown by a check count as a failure of that check.
std::vector<SelfTestResult> run_selftest(std::uint64_t seed, const std::string& filter = {},
                                         const std::function<void(const SelfTestResult&)>& progress = {});

}  // namespace cosparse
