#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace eigenflow::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// Worst observed deviation (or count, for the counting criteria).
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Salt for the randomized configurations of criteria 6, 7 and 9.
  std::uint64_t seed = 0;
};

/// Runs criteria 1..9 in order, calling `report` after each one.
std::vector<CriterionResult> run_all(const Options& options = {},
                                     const std::function<void(const CriterionResult&)>& report = {});

/// "PASS  [3] title: detail" style one-liner.
std::string format_line(const CriterionResult& result);

}  // namespace eigenflow::acceptance
