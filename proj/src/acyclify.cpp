#include "cycad/acyclify.hpp"

#include <algorithm>
#include <stdexcept>

namespace cycad {

DirectedGraph acyclify(const DirectedGraph& g,
                       const std::optional<std::vector<std::vector<int>>>& scc_orders) {
    const std::vector<NodeSet> comps = strongly_connected_components(g);
    const std::vector<int> ids = scc_ids(g);

    // default order inside a component: ascending node index
    std::vector<std::vector<int>> order(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) order[c] = comps[c].values();

    if (scc_orders) {
        for (const auto& custom : *scc_orders) {
            if (custom.empty())
                throw std::invalid_argument("scc order must not be empty");
            std::vector<int> sorted = custom;
            NodeSet as_set(std::move(sorted));
            if (as_set.size() != static_cast<int>(custom.size()))
                throw std::invalid_argument("scc order contains duplicates");
            int first = custom.front();
            if (first < 0 || first >= g.node_count())
                throw std::invalid_argument("scc order node out of range");
            int c = ids[first];
            if (!(as_set == comps[c]))
                throw std::invalid_argument(
                    "scc order is not a permutation of a strongly connected component");
            order[c] = custom;
        }
    }

    std::vector<std::pair<int, int>> edges;
    edges.reserve(g.edge_count());

    // between components: fan every inbound neighbor across the whole target
    std::vector<int> seen_comp(comps.size(), -1);
    for (int v = 0; v < g.node_count(); ++v) {
        for (size_t c = 0; c < comps.size(); ++c) seen_comp[c] = -1;
        for (int w : g.children_of(v)) {
            int c = ids[w];
            if (c == ids[v] || seen_comp[c] == v) continue;
            seen_comp[c] = v;
            for (int t : comps[c]) edges.emplace_back(v, t);
        }
    }

    // inside a component: complete acyclic tournament along the chosen order
    for (const auto& seq : order)
        for (size_t i = 0; i < seq.size(); ++i)
            for (size_t j = i + 1; j < seq.size(); ++j)
                edges.emplace_back(seq[i], seq[j]);

    DirectedGraph out(g.labels(), edges, g.observed());
    if (!is_acyclic(out))
        throw std::logic_error("acyclify produced a cyclic graph");
    return out;
}

DirectedGraph acyclify_preserving(const DirectedGraph& g, int x, int y) {
    if (x == y) throw std::invalid_argument("treatment and outcome must differ");
    if (!descendants(g, y).empty())
        throw std::invalid_argument("outcome has descendants; rewrite would not preserve it");
    if (!descendants(g, x).subset_of(NodeSet{y}))
        throw std::invalid_argument(
            "treatment has descendants besides the outcome; rewrite would not preserve it");
    return acyclify(g);
}

}  // namespace cycad
