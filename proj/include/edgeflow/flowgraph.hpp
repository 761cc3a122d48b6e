#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/mermaid.hpp"

namespace edgeflow {

/// Adjacency-list control-flow graph. Node and arc order follow the AST, so
/// traversal is deterministic.
struct FlowGraph {
    struct Arc {
        std::string target;
        std::string label;

        friend bool operator==(const Arc&, const Arc&) = default;
    };

    std::vector<std::pair<std::string, std::string>> nodes;  // (id, label), declaration order
    std::map<std::string, std::vector<Arc>> adjacency;

    const std::string* label_of(const std::string& id) const {
        for (const auto& [nid, label] : nodes)
            if (nid == id) return &label;
        return nullptr;
    }
};

/// One candidate test case: the entry-to-terminal node-label sequence.
using Path = std::vector<std::string>;

/// One graph node per AST node, one directed arc per edge; duplicate
/// identical edges collapse to a single arc.
inline FlowGraph to_graph(const mermaid::FlowchartAst& ast) {
    FlowGraph g;
    for (const auto& node : ast.nodes) {
        g.nodes.emplace_back(node.id, node.label);
        g.adjacency[node.id];
    }
    for (const auto& edge : ast.edges) {
        auto& arcs = g.adjacency[edge.source];
        const FlowGraph::Arc arc{edge.target, edge.label};
        if (std::find(arcs.begin(), arcs.end(), arc) == arcs.end()) arcs.push_back(arc);
    }
    return g;
}

/// Entries are nodes with in-degree 0, terminals nodes with out-degree 0,
/// both in declaration order. An isolated node is both.
inline std::pair<std::vector<std::string>, std::vector<std::string>> entries_and_terminals(
    const FlowGraph& g) {
    std::set<std::string> has_incoming;
    for (const auto& [id, arcs] : g.adjacency)
        for (const auto& arc : arcs) has_incoming.insert(arc.target);

    std::vector<std::string> entries, terminals;
    for (const auto& [id, label] : g.nodes) {
        if (!has_incoming.count(id)) entries.push_back(id);
        auto it = g.adjacency.find(id);
        if (it == g.adjacency.end() || it->second.empty()) terminals.push_back(id);
    }
    return {entries, terminals};
}

namespace detail {

constexpr std::size_t kMaxPaths = 100000;

struct PathSearch {
    const FlowGraph& graph;
    const std::set<std::string>& terminal_set;
    std::map<std::string, int> visits;
    std::vector<std::string> current;
    std::vector<std::vector<std::string>> found;  // id sequences

    void dfs(const std::string& node) {
        current.push_back(node);
        ++visits[node];
        if (terminal_set.count(node)) {
            if (found.size() >= kMaxPaths)
                throw PathExplosionError("path enumeration exceeded " +
                                         std::to_string(kMaxPaths) + " paths");
            found.push_back(current);
        } else {
            auto it = graph.adjacency.find(node);
            if (it != graph.adjacency.end()) {
                for (const auto& arc : it->second) {
                    // "Unrolled once": at most two occurrences of a node per path.
                    if (visits[arc.target] >= 2) continue;
                    dfs(arc.target);
                }
            }
        }
        --visits[node];
        current.pop_back();
    }
};

}  // namespace detail

/// Depth-first enumeration of entry-to-terminal paths, permitting one revisit
/// per node so every loop body is traversable at least once. Paths are
/// reported as label sequences, deduplicated, and ordered lexicographically by
/// node-id sequence. Throws PathExplosionError beyond 100,000 paths.
inline std::vector<Path> enumerate_paths(const FlowGraph& g) {
    auto [entries, terminals] = entries_and_terminals(g);
    if (entries.empty() || terminals.empty()) return {};
    const std::set<std::string> terminal_set(terminals.begin(), terminals.end());

    detail::PathSearch search{g, terminal_set, {}, {}, {}};
    for (const auto& entry : entries) search.dfs(entry);

    std::sort(search.found.begin(), search.found.end());
    std::vector<Path> paths;
    std::set<Path> seen;
    for (const auto& ids : search.found) {
        Path labels;
        labels.reserve(ids.size());
        for (const auto& id : ids) {
            const std::string* label = g.label_of(id);
            labels.push_back(label ? *label : id);
        }
        if (seen.insert(labels).second) paths.push_back(std::move(labels));
    }
    return paths;
}

/// {nodes: [{id, label}], edges: [{source, target, label}]}
inline nlohmann::json graph_to_json(const FlowGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, label] : g.nodes) nodes.push_back({{"id", id}, {"label", label}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [id, arcs] : g.adjacency)
        for (const auto& arc : arcs)
            edges.push_back({{"source", id}, {"target", arc.target}, {"label", arc.label}});
    return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace edgeflow
