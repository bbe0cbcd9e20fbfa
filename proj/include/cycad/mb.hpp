#pragma once

#include <string>

#include "cycad/ci.hpp"
#include "cycad/graph.hpp"

namespace cycad {

enum class MbAlgorithm { Tc, FastIamb, Iamb, HitonMb };

// Markov blanket of target among vars using the given provider. The result
// never contains the target and is a subset of vars.
NodeSet discover_mb(MbAlgorithm alg, CiProvider& provider, int target,
                    const NodeSet& vars);

const char* to_string(MbAlgorithm alg);
MbAlgorithm mb_algorithm_from_string(const std::string& s);

}  // namespace cycad
