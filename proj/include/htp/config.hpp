#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "htp/step_laws.hpp"

namespace htp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key = value text with [law], [task], [output] and [tolerance] sections.
// Values are kept verbatim, so to_text(parse(s)) parses back to an equal config.
struct ExperimentConfig {
  std::map<std::string, std::string> law;     // family + parameters, or file
  std::string task;
  std::map<std::string, std::string> params;  // task parameters
  std::string output;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> tolerance;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_text() const;
  void validate() const;  // throws ConfigError on unknown keys or tasks

  std::string param(const std::string& key, const std::string& fallback = "") const;
  bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& task_names();
const std::vector<std::string>& task_keys(const std::string& task);

std::shared_ptr<const StepLaw> law_from_config(const std::map<std::string, std::string>& law);

// "a..b" (inclusive), "a..b:step", or a comma list
std::vector<std::int64_t> parse_int_grid(const std::string& s);
std::vector<double> parse_real_grid(const std::string& s);

}  // namespace htp
