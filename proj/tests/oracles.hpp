#pragma once

// Reference computations for the tests; the absorbing-chain solver lives in the library
// so the reproduce suites can use it too.

#include "htp/absorbing_chain.hpp"

namespace oracle = htp::chain;
