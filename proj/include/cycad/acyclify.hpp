#pragma once

#include <optional>
#include <vector>

#include "cycad/graph.hpp"

namespace cycad {

// Acyclic rewrite of g on the same nodes. Nodes inside a strongly connected
// component become fully connected following a total order (ascending index
// by default; scc_orders may override the order of individual components,
// each entry being a permutation of one component). A node outside a
// component points at all of it iff it points at any of it. Acyclic inputs
// come back unchanged.
DirectedGraph acyclify(
    const DirectedGraph& g,
    const std::optional<std::vector<std::vector<int>>>& scc_orders = std::nullopt);

// acyclify restricted to graphs where y has no descendants and x has no
// descendants besides y; under that shape the x -> y edge, the children of x
// and the sinkness of y all survive the rewrite.
DirectedGraph acyclify_preserving(const DirectedGraph& g, int x, int y);

}  // namespace cycad
