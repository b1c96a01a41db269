#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "htp/config.hpp"

namespace htp {

enum ExitStatus { exit_ok = 0, exit_error = 1, exit_flagged = 2 };

struct RunOutcome {
  int status = exit_ok;
  std::string summary;                 // one line
  std::vector<std::string> artifacts;  // paths written
};

// Runs one task; errors are reported on `err` and turn into exit_error.
RunOutcome run(const ExperimentConfig& config, std::ostream& err);

// run() plus printing the summary line on `out`; returns the exit status
int run_and_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace htp
