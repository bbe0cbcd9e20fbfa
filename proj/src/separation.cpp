#include "cycad/separation.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace cycad {

namespace detail {

namespace {

// Arrival states of a walk at a node: via an edge pointing into the node, or
// via an edge pointing out of it (split by whether that edge stays inside the
// node's strongly connected component, which is what the blocking rule needs).
enum State : int { kHead = 0, kTailIn = 1, kTailOut = 2 };

}  // namespace

bool open_walk_exists(const DirectedGraph& g, int a, int b, const NodeSet& s,
                      bool backdoor_only) {
    const std::vector<int> scc = scc_ids(g);
    const NodeSet an_s = ancestors_with(g, s);
    std::vector<bool> in_s(g.node_count(), false);
    std::vector<bool> in_an_s(g.node_count(), false);
    for (int v : s) in_s[v] = true;
    for (int v : an_s) in_an_s[v] = true;

    std::vector<std::array<bool, 3>> seen(g.node_count(), {false, false, false});
    std::vector<std::pair<int, State>> todo;

    auto push = [&](int v, State st) {
        // Walks shortcut to paths with the same endpoints, but a shortcut at
        // the start node would change the first edge; with the first edge
        // constrained the walk must stay away from it, exactly like a path.
        if (backdoor_only && v == a) return;
        if (!seen[v][st]) {
            seen[v][st] = true;
            todo.emplace_back(v, st);
        }
    };

    // First step away from a carries no junction constraint at a.
    for (int u : g.parents_of(a))
        push(u, scc[u] == scc[a] ? kTailIn : kTailOut);
    if (!backdoor_only)
        for (int w : g.children_of(a)) push(w, kHead);

    while (!todo.empty()) {
        auto [v, st] = todo.back();
        todo.pop_back();
        if (v == b) return true;

        // Leave v along an edge v -> w. The junction at v is a non-collider;
        // when v is conditioned on, it blocks unless every outgoing edge of
        // the junction stays inside v's component.
        bool out_ok = !in_s[v] || st != kTailOut;
        if (out_ok) {
            for (int w : g.children_of(v)) {
                if (in_s[v] && scc[w] != scc[v]) continue;
                push(w, kHead);
            }
        }

        // Leave v against an edge u -> v. Entering and leaving via arrowheads
        // makes v a collider, which passes only inside the ancestry of s.
        bool in_ok = st == kHead ? in_an_s[v] : (!in_s[v] || st == kTailIn);
        if (in_ok) {
            for (int u : g.parents_of(v))
                push(u, scc[u] == scc[v] ? kTailIn : kTailOut);
        }
    }
    return false;
}

}  // namespace detail

bool is_separated(const DirectedGraph& g, SeparationKind kind, int a, int b,
                  const NodeSet& s) {
    if (a < 0 || a >= g.node_count() || b < 0 || b >= g.node_count())
        throw std::invalid_argument("node index out of range");
    for (int v : s)
        if (v < 0 || v >= g.node_count())
            throw std::invalid_argument("conditioning node out of range");
    if (a == b) throw std::invalid_argument("separation query needs distinct nodes");
    if (s.contains(a) || s.contains(b))
        throw std::invalid_argument("query nodes must not appear in the conditioning set");
    if (kind == SeparationKind::DSeparation && !is_acyclic(g))
        throw std::invalid_argument("d-separation requires an acyclic graph");
    return !detail::open_walk_exists(g, a, b, s, /*backdoor_only=*/false);
}

NodeSet markov_blanket(const DirectedGraph& g, int x, SeparationKind kind) {
    if (x < 0 || x >= g.node_count())
        throw std::invalid_argument("node index out of range");
    if (!g.is_observed(x))
        throw std::invalid_argument("markov blanket target must be observed");
    std::vector<int> mb;
    for (int y : g.observed()) {
        if (y == x) continue;
        NodeSet rest = g.observed().without(x).without(y);
        if (!is_separated(g, kind, x, y, rest)) mb.push_back(y);
    }
    return NodeSet(std::move(mb));
}

}  // namespace cycad
