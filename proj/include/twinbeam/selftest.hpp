#pragma once

#include <string>
#include <vector>

namespace twinbeam {

struct CheckResult {
  std::string name;
  bool pass{false};
  std::string detail;
};

/// Closed-form and oracle equivalence checks; a few seconds in total.
std::vector<CheckResult> run_selftest();

}  // namespace twinbeam
