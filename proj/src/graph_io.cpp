#include "cycad/graph_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cycad {

namespace {

int require_label(const DirectedGraph& g, const std::string& name,
                  const char* role) {
    int v = g.label_index(name);
    if (v < 0)
        throw std::invalid_argument(std::string(role) + " label not among nodes: " + name);
    return v;
}

}  // namespace

std::string graph_to_json(const GraphFile& gf) {
    const DirectedGraph& g = gf.graph;
    nlohmann::ordered_json doc;
    doc["nodes"] = g.labels();
    auto& edges = doc["edges"] = nlohmann::ordered_json::array();
    for (auto [from, to] : g.edges())
        edges.push_back({g.label(from), g.label(to)});
    auto& observed = doc["observed"] = nlohmann::ordered_json::array();
    for (int v : g.observed()) observed.push_back(g.label(v));
    doc["treatment"] = g.label(gf.treatment);
    doc["outcome"] = g.label(gf.outcome);
    return doc.dump(2) + "\n";
}

GraphFile graph_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad graph document: ") + e.what());
    }
    for (const char* field : {"nodes", "edges", "observed", "treatment", "outcome"})
        if (!doc.contains(field))
            throw std::invalid_argument(std::string("graph document missing field: ") + field);

    std::vector<std::string> labels = doc["nodes"].get<std::vector<std::string>>();

    // indices resolved against the label list
    auto index_of = [&](const std::string& name) {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("unknown node label: " + name);
    };

    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("edge entries must be [from, to] label pairs");
        edges.emplace_back(index_of(e[0].get<std::string>()),
                           index_of(e[1].get<std::string>()));
    }

    std::vector<int> observed;
    for (const auto& name : doc["observed"])
        observed.push_back(index_of(name.get<std::string>()));

    DirectedGraph g(std::move(labels), edges, NodeSet(std::move(observed)));
    GraphFile gf{g, require_label(g, doc["treatment"].get<std::string>(), "treatment"),
                 require_label(g, doc["outcome"].get<std::string>(), "outcome")};
    if (!g.is_observed(gf.treatment) || !g.is_observed(gf.outcome))
        throw std::invalid_argument("treatment and outcome must be observed");
    return gf;
}

void save_graph(const GraphFile& gf, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << graph_to_json(gf);
    if (!out) throw std::runtime_error("write failed: " + path);
}

GraphFile load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return graph_from_json(text);
}

}  // namespace cycad
