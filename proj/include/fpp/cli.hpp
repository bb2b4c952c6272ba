#pragma once

#include <string>
#include <vector>

#include "fpp/experiments.hpp"

namespace fpp {

// Parses an experiment spec document. Unknown fields are rejected; every
// problem found is appended to `errors` (the parse never stops at the first).
ExperimentSpec experiment_spec_from_json(const std::string& text,
                                         std::vector<std::string>& errors);

// Target description: {"type":"point","p":[x,y]} | {"type":"segment","a":...,
// "b":...} | {"type":"line","origin":[x,y],"direction":[x,y]}.
TargetSet target_from_json(const std::string& text);

// Exit codes: 0 success, 1 usage/config error, 2 invariant violation,
// 130 interrupted.
int run_cli(int argc, const char* const* argv);

}  // namespace fpp
