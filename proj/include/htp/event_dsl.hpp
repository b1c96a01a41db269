#pragma once

#include <string>

#include "htp/mc_engine.hpp"

namespace htp {

// Grammar: race(<stop>, <stop>) from <x>
//   stop := hit:<y> | up:<R> | down:<L> | set:<y>|<y>... | out:<lo>:<hi>
// Example: "race(hit:1000, hit:0) from 5"
StopCondition parse_stop(const std::string& text);
RaceSpec parse_event(const std::string& text);

}  // namespace htp
