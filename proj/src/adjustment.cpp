#include "cycad/adjustment.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

namespace cycad {

namespace {

void check_query(const DirectedGraph& g, int x, int y, const NodeSet& z) {
    if (x < 0 || x >= g.node_count() || y < 0 || y >= g.node_count())
        throw std::invalid_argument("node index out of range");
    if (x == y) throw std::invalid_argument("treatment and outcome must differ");
    if (z.contains(x) || z.contains(y))
        throw std::invalid_argument("adjustment set must exclude treatment and outcome");
    if (!g.is_observed(x) || !g.is_observed(y))
        throw std::invalid_argument("treatment and outcome must be observed");
    for (int v : z)
        if (!g.is_observed(v))
            throw std::invalid_argument("adjustment set must be observed");
}

}  // namespace

bool is_backdoor_adjustment_set(const DirectedGraph& g, int x, int y,
                                const NodeSet& z) {
    check_query(g, x, y, z);
    if (!z.intersect(descendants(g, x)).empty()) return false;
    return !detail::open_walk_exists(g, x, y, z, /*backdoor_only=*/true);
}

bool intervention_node_check(const DirectedGraph& g, int x, int y,
                             const NodeSet& z) {
    check_query(g, x, y, z);

    std::string probe = "__do_" + g.label(x);
    while (g.label_index(probe) >= 0) probe += "_";
    std::vector<std::string> labels = g.labels();
    labels.push_back(probe);
    const int i_node = static_cast<int>(labels.size()) - 1;

    std::vector<std::pair<int, int>> edges = g.edges();
    edges.emplace_back(i_node, x);
    DirectedGraph augmented(std::move(labels), edges, g.observed().with(i_node));

    for (int v : z)
        if (!is_separated(augmented, SeparationKind::SigmaSeparation, i_node, v, NodeSet{}))
            return false;
    return is_separated(augmented, SeparationKind::SigmaSeparation, i_node, y,
                        z.with(x));
}

bool for_each_subset(const std::vector<int>& items, int max_size,
                     const std::function<bool(const NodeSet&)>& fn) {
    const int n = static_cast<int>(items.size());
    const int cap = std::min(max_size, n);
    if (cap < 0) return false;
    for (int k = 0; k <= cap; ++k) {
        std::vector<int> pick(k);
        for (int i = 0; i < k; ++i) pick[i] = i;
        while (true) {
            std::vector<int> subset(k);
            for (int i = 0; i < k; ++i) subset[i] = items[pick[i]];
            if (fn(NodeSet(std::move(subset)))) return true;
            // next combination in lexicographic order
            int i = k - 1;
            while (i >= 0 && pick[i] == n - k + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return false;
}

std::vector<NodeSet> enumerate_valid_adjustment_sets(const DirectedGraph& g,
                                                     int x, int y,
                                                     int max_size) {
    check_query(g, x, y, NodeSet{});
    if (!descendants(g, y).empty() || !descendants(g, x).subset_of(NodeSet{y}))
        throw std::invalid_argument(
            "enumeration requires outcome without descendants and treatment "
            "with none besides the outcome");
    if (max_size < 0) throw std::invalid_argument("max_size must be nonnegative");

    std::vector<int> candidates;
    for (int v : g.observed())
        if (v != x && v != y) candidates.push_back(v);

    std::vector<NodeSet> valid;
    for_each_subset(candidates, max_size, [&](const NodeSet& z) {
        if (is_backdoor_adjustment_set(g, x, y, z)) valid.push_back(z);
        return false;
    });
    return valid;
}

}  // namespace cycad
