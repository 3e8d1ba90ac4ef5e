#pragma once

#include <string>
#include <vector>

namespace hartree::checks {

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Suite names accepted by run_suite, in criterion order, plus "all".
std::vector<std::string> suite_names();

/// Runs one suite. Throws Usage for an unknown name.
std::vector<CheckResult> run_suite(const std::string& name);

}  // namespace hartree::checks
