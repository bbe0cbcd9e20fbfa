#pragma once

#include "cycad/graph.hpp"

namespace cycad {

enum class SeparationKind { DSeparation, SigmaSeparation };

// True iff a and b are separated given s. For DSeparation the graph must be
// acyclic. Requires a != b and a, b not in s; adjacent nodes are never
// separated. On acyclic graphs the two kinds agree.
bool is_separated(const DirectedGraph& g, SeparationKind kind, int a, int b,
                  const NodeSet& s);

// Observed nodes y with x and y dependent given all other observed nodes.
// x must be observed.
NodeSet markov_blanket(const DirectedGraph& g, int x, SeparationKind kind);

namespace detail {

// True iff an open walk from a to b given s exists under the cycle-aware
// blocking rules. With backdoor_only, only walks whose first edge points
// into a are considered. On acyclic graphs this is the classical criterion.
bool open_walk_exists(const DirectedGraph& g, int a, int b, const NodeSet& s,
                      bool backdoor_only);

}  // namespace detail

}  // namespace cycad
