#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cycad {

// Sorted set of node indices with value semantics.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::vector<int> xs);
    NodeSet(std::initializer_list<int> xs);

    bool contains(int x) const;
    bool empty() const { return v_.empty(); }
    int size() const { return static_cast<int>(v_.size()); }

    NodeSet with(int x) const;
    NodeSet without(int x) const;
    NodeSet unioned(const NodeSet& other) const;
    NodeSet intersect(const NodeSet& other) const;
    NodeSet minus(const NodeSet& other) const;
    bool subset_of(const NodeSet& other) const;

    const std::vector<int>& values() const { return v_; }
    std::vector<int>::const_iterator begin() const { return v_.begin(); }
    std::vector<int>::const_iterator end() const { return v_.end(); }

    bool operator==(const NodeSet&) const = default;
    // size first, then lexicographic; gives the subset enumeration order
    bool operator<(const NodeSet& other) const;

private:
    std::vector<int> v_;
};

// Directed graph over labeled nodes; no self loops, parallel edges collapse.
// A subset of nodes is marked observed.
class DirectedGraph {
public:
    DirectedGraph(std::vector<std::string> labels,
                  const std::vector<std::pair<int, int>>& edges,
                  NodeSet observed);

    int node_count() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int v) const;
    // -1 when the label is unknown
    int label_index(std::string_view name) const;

    bool has_edge(int from, int to) const;
    const std::vector<int>& children_of(int v) const;
    const std::vector<int>& parents_of(int v) const;
    std::vector<std::pair<int, int>> edges() const;
    int edge_count() const { return edge_count_; }

    const NodeSet& observed() const { return observed_; }
    bool is_observed(int v) const { return observed_.contains(v); }

    bool operator==(const DirectedGraph& other) const;

private:
    void check_node(int v) const;

    std::vector<std::string> labels_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    NodeSet observed_;
    int edge_count_ = 0;
};

// Components ordered by smallest contained node index; members ascending.
std::vector<NodeSet> strongly_connected_components(const DirectedGraph& g);

// scc_ids[v] = index of v's component in strongly_connected_components(g).
std::vector<int> scc_ids(const DirectedGraph& g);

bool is_acyclic(const DirectedGraph& g);

NodeSet parents(const DirectedGraph& g, int x);
NodeSet children(const DirectedGraph& g, int x);

// Proper ancestors/descendants: x is included only when x lies on a cycle.
NodeSet ancestors(const DirectedGraph& g, int x);
NodeSet descendants(const DirectedGraph& g, int x);

// Ancestors of a set, including the set itself.
NodeSet ancestors_with(const DirectedGraph& g, const NodeSet& s);

}  // namespace cycad
