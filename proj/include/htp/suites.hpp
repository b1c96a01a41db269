#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace htp {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string line() const;  // "[PASS] 3 sandwich: ... (12.3 s)"
};

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  std::string artifact_dir;  // tables are written here when non-empty
  std::function<void(const std::string&)> log;
};

const std::vector<std::string>& suite_names();
// criteria ids of a suite; throws std::invalid_argument for an unknown name
const std::vector<int>& suite_criteria(const std::string& suite);

CriterionResult run_criterion(int id, const SuiteOptions& opt = {});

std::vector<CriterionResult> reproduce_suite(const std::string& suite, const SuiteOptions& opt = {},
                                             const std::function<void(const CriterionResult&)>& on_result = {});

std::string results_json(const std::vector<CriterionResult>& results);

}  // namespace htp
