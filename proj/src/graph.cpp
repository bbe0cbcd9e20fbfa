#include "cycad/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace cycad {

NodeSet::NodeSet(std::vector<int> xs) : v_(std::move(xs)) {
    std::sort(v_.begin(), v_.end());
    v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
}

NodeSet::NodeSet(std::initializer_list<int> xs) : NodeSet(std::vector<int>(xs)) {}

bool NodeSet::contains(int x) const {
    return std::binary_search(v_.begin(), v_.end(), x);
}

NodeSet NodeSet::with(int x) const {
    if (contains(x)) return *this;
    NodeSet out = *this;
    out.v_.insert(std::upper_bound(out.v_.begin(), out.v_.end(), x), x);
    return out;
}

NodeSet NodeSet::without(int x) const {
    NodeSet out = *this;
    auto it = std::lower_bound(out.v_.begin(), out.v_.end(), x);
    if (it != out.v_.end() && *it == x) out.v_.erase(it);
    return out;
}

NodeSet NodeSet::unioned(const NodeSet& other) const {
    std::vector<int> merged;
    merged.reserve(v_.size() + other.v_.size());
    std::set_union(v_.begin(), v_.end(), other.v_.begin(), other.v_.end(),
                   std::back_inserter(merged));
    NodeSet out;
    out.v_ = std::move(merged);
    return out;
}

NodeSet NodeSet::intersect(const NodeSet& other) const {
    std::vector<int> common;
    std::set_intersection(v_.begin(), v_.end(), other.v_.begin(), other.v_.end(),
                          std::back_inserter(common));
    NodeSet out;
    out.v_ = std::move(common);
    return out;
}

NodeSet NodeSet::minus(const NodeSet& other) const {
    std::vector<int> rest;
    std::set_difference(v_.begin(), v_.end(), other.v_.begin(), other.v_.end(),
                        std::back_inserter(rest));
    NodeSet out;
    out.v_ = std::move(rest);
    return out;
}

bool NodeSet::subset_of(const NodeSet& other) const {
    return std::includes(other.v_.begin(), other.v_.end(), v_.begin(), v_.end());
}

bool NodeSet::operator<(const NodeSet& other) const {
    if (v_.size() != other.v_.size()) return v_.size() < other.v_.size();
    return v_ < other.v_;
}

DirectedGraph::DirectedGraph(std::vector<std::string> labels,
                             const std::vector<std::pair<int, int>>& edges,
                             NodeSet observed)
    : labels_(std::move(labels)), observed_(std::move(observed)) {
    const int n = static_cast<int>(labels_.size());
    if (n == 0) throw std::invalid_argument("graph needs at least one node");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty()) throw std::invalid_argument("empty node label");
        if (!seen.insert(l).second)
            throw std::invalid_argument("duplicate node label: " + l);
    }
    for (int v : observed_)
        if (v < 0 || v >= n) throw std::invalid_argument("observed node out of range");

    out_.assign(n, {});
    in_.assign(n, {});
    for (auto [from, to] : edges) {
        if (from < 0 || from >= n || to < 0 || to >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (from == to)
            throw std::invalid_argument("self loop on node " + labels_[from]);
        out_[from].push_back(to);
    }
    for (int v = 0; v < n; ++v) {
        auto& ch = out_[v];
        std::sort(ch.begin(), ch.end());
        ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
        edge_count_ += static_cast<int>(ch.size());
        for (int w : ch) in_[w].push_back(v);
    }
    for (auto& pa : in_) std::sort(pa.begin(), pa.end());
}

const std::string& DirectedGraph::label(int v) const {
    check_node(v);
    return labels_[v];
}

int DirectedGraph::label_index(std::string_view name) const {
    for (int v = 0; v < node_count(); ++v)
        if (labels_[v] == name) return v;
    return -1;
}

bool DirectedGraph::has_edge(int from, int to) const {
    check_node(from);
    check_node(to);
    const auto& ch = out_[from];
    return std::binary_search(ch.begin(), ch.end(), to);
}

const std::vector<int>& DirectedGraph::children_of(int v) const {
    check_node(v);
    return out_[v];
}

const std::vector<int>& DirectedGraph::parents_of(int v) const {
    check_node(v);
    return in_[v];
}

std::vector<std::pair<int, int>> DirectedGraph::edges() const {
    std::vector<std::pair<int, int>> es;
    es.reserve(edge_count_);
    for (int v = 0; v < node_count(); ++v)
        for (int w : out_[v]) es.emplace_back(v, w);
    return es;
}

bool DirectedGraph::operator==(const DirectedGraph& other) const {
    return labels_ == other.labels_ && out_ == other.out_ && observed_ == other.observed_;
}

void DirectedGraph::check_node(int v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("node index out of range");
}

namespace {

// Tarjan's algorithm, iterative to keep the stack flat on long chains.
struct SccState {
    const DirectedGraph& g;
    std::vector<int> dfs_number;
    std::vector<int> dfs_min;
    std::vector<int> stack;
    std::vector<bool> on_stack;
    std::vector<int> component;
    int next_number = 0;
    int next_component = 0;

    explicit SccState(const DirectedGraph& graph)
        : g(graph),
          dfs_number(graph.node_count(), -1),
          dfs_min(graph.node_count(), 0),
          on_stack(graph.node_count(), false),
          component(graph.node_count(), -1) {}

    void visit(int root) {
        struct Frame {
            int v;
            size_t child;
        };
        std::vector<Frame> frames{{root, 0}};
        dfs_number[root] = dfs_min[root] = next_number++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, child] = frames.back();
            const auto& ch = g.children_of(v);
            if (child < ch.size()) {
                int w = ch[child++];
                if (dfs_number[w] < 0) {
                    dfs_number[w] = dfs_min[w] = next_number++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    dfs_min[v] = std::min(dfs_min[v], dfs_number[w]);
                }
            } else {
                if (dfs_min[v] == dfs_number[v]) {
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        component[w] = next_component;
                    } while (w != v);
                    ++next_component;
                }
                frames.pop_back();
                if (!frames.empty()) {
                    int parent = frames.back().v;
                    dfs_min[parent] = std::min(dfs_min[parent], dfs_min[v]);
                }
            }
        }
    }
};

NodeSet reach(const DirectedGraph& g, const std::vector<int>& seeds, bool forward) {
    std::vector<bool> seen(g.node_count(), false);
    std::vector<int> todo = seeds;
    std::vector<int> hit;
    while (!todo.empty()) {
        int v = todo.back();
        todo.pop_back();
        const auto& next = forward ? g.children_of(v) : g.parents_of(v);
        for (int w : next) {
            if (!seen[w]) {
                seen[w] = true;
                hit.push_back(w);
                todo.push_back(w);
            }
        }
    }
    return NodeSet(std::move(hit));
}

}  // namespace

std::vector<int> scc_ids(const DirectedGraph& g) {
    SccState state(g);
    for (int v = 0; v < g.node_count(); ++v)
        if (state.dfs_number[v] < 0) state.visit(v);
    // renumber components by smallest contained node index
    std::vector<int> smallest(state.next_component, g.node_count());
    for (int v = 0; v < g.node_count(); ++v)
        smallest[state.component[v]] = std::min(smallest[state.component[v]], v);
    std::vector<int> order(state.next_component);
    for (int c = 0; c < state.next_component; ++c) order[c] = c;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return smallest[a] < smallest[b]; });
    std::vector<int> rank(state.next_component);
    for (int i = 0; i < state.next_component; ++i) rank[order[i]] = i;
    std::vector<int> ids(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) ids[v] = rank[state.component[v]];
    return ids;
}

std::vector<NodeSet> strongly_connected_components(const DirectedGraph& g) {
    std::vector<int> ids = scc_ids(g);
    int count = *std::max_element(ids.begin(), ids.end()) + 1;
    std::vector<std::vector<int>> members(count);
    for (int v = 0; v < g.node_count(); ++v) members[ids[v]].push_back(v);
    std::vector<NodeSet> out;
    out.reserve(count);
    for (auto& m : members) out.push_back(NodeSet(std::move(m)));
    return out;
}

bool is_acyclic(const DirectedGraph& g) {
    for (const auto& comp : strongly_connected_components(g))
        if (comp.size() > 1) return false;
    return true;
}

NodeSet parents(const DirectedGraph& g, int x) {
    return NodeSet(g.parents_of(x));
}

NodeSet children(const DirectedGraph& g, int x) {
    return NodeSet(g.children_of(x));
}

NodeSet ancestors(const DirectedGraph& g, int x) {
    if (x < 0 || x >= g.node_count())
        throw std::invalid_argument("node index out of range");
    return reach(g, {x}, /*forward=*/false);
}

NodeSet descendants(const DirectedGraph& g, int x) {
    if (x < 0 || x >= g.node_count())
        throw std::invalid_argument("node index out of range");
    return reach(g, {x}, /*forward=*/true);
}

NodeSet ancestors_with(const DirectedGraph& g, const NodeSet& s) {
    for (int v : s)
        if (v < 0 || v >= g.node_count())
            throw std::invalid_argument("node index out of range");
    return reach(g, s.values(), /*forward=*/false).unioned(s);
}

}  // namespace cycad
