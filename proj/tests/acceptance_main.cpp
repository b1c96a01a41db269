// Runs acceptance criteria 1-11 and prints one line per criterion.
// Exit status is the number of failing criteria.

#include <cstdlib>
#include <iostream>

#include "htp/suites.hpp"

int main(int argc, char** argv) {
  htp::SuiteOptions opt;
  if (argc > 1) opt.artifact_dir = argv[1];
  opt.log = [](const std::string& s) { std::cerr << "  .. " << s << '\n'; };
  int failed = 0;
  for (int id = 1; id <= 11; ++id) {
    const auto r = htp::run_criterion(id, opt);
    std::cout << r.line() << std::endl;
    failed += !r.pass;
  }
  std::cout << (11 - failed) << "/11 criteria pass" << std::endl;
  return failed;
}
