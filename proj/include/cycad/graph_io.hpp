#pragma once

#include <iosfwd>
#include <string>

#include "cycad/graph.hpp"

namespace cycad {

// A graph document: the structure plus its designated treatment and outcome.
struct GraphFile {
    DirectedGraph graph;
    int treatment;
    int outcome;

    bool operator==(const GraphFile&) const = default;
};

std::string graph_to_json(const GraphFile& gf);
GraphFile graph_from_json(const std::string& text);

void save_graph(const GraphFile& gf, const std::string& path);
GraphFile load_graph(const std::string& path);

}  // namespace cycad
