#pragma once

#include <functional>
#include <vector>

#include "cycad/graph.hpp"
#include "cycad/separation.hpp"

namespace cycad {

// True iff z contains no descendant of x and blocks every path whose first
// edge points into x. x, y and the members of z must be observed and
// pairwise distinct.
bool is_backdoor_adjustment_set(const DirectedGraph& g, int x, int y,
                                const NodeSet& z);

// Same question answered through an auxiliary intervention node I -> x:
// z must be separated from I marginally, and y from I given {x} union z.
bool intervention_node_check(const DirectedGraph& g, int x, int y,
                             const NodeSet& z);

// All valid adjustment sets among observed nodes (excluding x and y) up to
// max_size, ordered by size then lexicographically. Requires the
// pre-treatment shape: y has no descendants, x none besides y.
std::vector<NodeSet> enumerate_valid_adjustment_sets(const DirectedGraph& g,
                                                     int x, int y,
                                                     int max_size);

// Calls fn for each subset of items with size <= max_size, sizes ascending,
// lexicographic within a size. Stops early when fn returns true.
bool for_each_subset(const std::vector<int>& items, int max_size,
                     const std::function<bool(const NodeSet&)>& fn);

}  // namespace cycad
