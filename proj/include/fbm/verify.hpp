#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbm::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // empty on success
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed = false;
};

// per-module property suites; "all" runs every suite with names prefixed by
// the owning module
std::vector<std::string> suite_names();
SuiteReport run_suite(const std::string& suite, std::uint64_t master_seed);

}  // namespace fbm::verify
