#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "edgeflow/error.hpp"
#include "edgeflow/flowgraph.hpp"
#include "edgeflow/mermaid.hpp"

namespace edgeflow {

enum class Level { Node, Edge, Path };

inline const std::array<Level, 3>& all_levels() {
    static const std::array<Level, 3> levels = {Level::Node, Level::Edge, Level::Path};
    return levels;
}

inline std::string to_string(Level level) {
    switch (level) {
        case Level::Node: return "node";
        case Level::Edge: return "edge";
        case Level::Path: return "path";
    }
    return "node";
}

struct MatchCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn_ = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn_ += o.fn_;
        return *this;
    }
    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision, recall and F1 per comparison level.
struct ScoreCard {
    std::map<Level, Score> by_level;

    const Score& at(Level level) const { return by_level.at(level); }
};

/// Exact matching (case-sensitive, no normalization) under a greedy one-to-one
/// constraint: each truth item is consumed at most once, which under equality
/// semantics is the multiset min-count intersection.
template <typename Key>
MatchCounts match_multiset(const std::vector<Key>& pred, const std::vector<Key>& truth) {
    std::map<Key, long long> pred_counts, truth_counts;
    for (const Key& k : pred) ++pred_counts[k];
    for (const Key& k : truth) ++truth_counts[k];
    long long tp = 0;
    for (const auto& [key, count] : pred_counts) {
        auto it = truth_counts.find(key);
        if (it != truth_counts.end()) tp += std::min(count, it->second);
    }
    return {tp, static_cast<long long>(pred.size()) - tp,
            static_cast<long long>(truth.size()) - tp};
}

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); every zero denominator
/// yields 0.
inline Score score(const MatchCounts& counts) {
    Score s;
    const double p_den = static_cast<double>(counts.tp + counts.fp);
    const double r_den = static_cast<double>(counts.tp + counts.fn_);
    s.precision = p_den > 0.0 ? counts.tp / p_den : 0.0;
    s.recall = r_den > 0.0 ? counts.tp / r_den : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

/// Per-level TP/FP/FN for one (prediction, truth) comparison.
using LevelCounts = std::map<Level, MatchCounts>;

/// Micro-average: pool counts across all records per level, then score once.
inline ScoreCard micro_aggregate(const std::vector<LevelCounts>& records) {
    if (records.empty()) throw ParamError("micro_aggregate: nothing to aggregate");
    ScoreCard card;
    for (Level level : all_levels()) {
        MatchCounts pooled;
        for (const auto& record : records) {
            auto it = record.find(level);
            if (it != record.end()) pooled += it->second;
        }
        card.by_level[level] = score(pooled);
    }
    return card;
}

/// Pools one flowchart's counts over its repeated runs, then scores. The
/// result is the paired observation consumed by the statistics.
inline ScoreCard per_flowchart_aggregate(const std::vector<LevelCounts>& runs) {
    return micro_aggregate(runs);
}

// Comparison keys per level.

/// Node keys: the label multiset (shapes do not participate in matching).
inline std::vector<std::string> node_keys(const mermaid::FlowchartAst& ast) {
    std::vector<std::string> keys;
    keys.reserve(ast.nodes.size());
    for (const auto& node : ast.nodes) keys.push_back(node.label);
    return keys;
}

/// Edge keys: (source_label, target_label, edge_label) triples; unlabeled
/// edges carry the empty string.
using EdgeKey = std::tuple<std::string, std::string, std::string>;

inline std::vector<EdgeKey> edge_keys(const mermaid::FlowchartAst& ast) {
    std::map<std::string, const std::string*> label_by_id;
    for (const auto& node : ast.nodes) label_by_id[node.id] = &node.label;
    std::vector<EdgeKey> keys;
    keys.reserve(ast.edges.size());
    for (const auto& edge : ast.edges) {
        auto src = label_by_id.find(edge.source);
        auto tgt = label_by_id.find(edge.target);
        keys.emplace_back(src != label_by_id.end() ? *src->second : edge.source,
                          tgt != label_by_id.end() ? *tgt->second : edge.target, edge.label);
    }
    return keys;
}

/// Path keys: full node-label sequences from the shared enumeration procedure.
inline std::vector<Path> path_keys(const mermaid::FlowchartAst& ast) {
    return enumerate_paths(to_graph(ast));
}

/// All three levels for one prediction/truth pair.
inline LevelCounts compare_ast(const mermaid::FlowchartAst& pred,
                               const mermaid::FlowchartAst& truth) {
    LevelCounts counts;
    counts[Level::Node] = match_multiset(node_keys(pred), node_keys(truth));
    counts[Level::Edge] = match_multiset(edge_keys(pred), edge_keys(truth));
    counts[Level::Path] = match_multiset(path_keys(pred), path_keys(truth));
    return counts;
}

/// Scoring for a record whose prediction failed to parse: nothing predicted,
/// everything in the truth missed.
inline LevelCounts empty_prediction_counts(const mermaid::FlowchartAst& truth) {
    LevelCounts counts;
    counts[Level::Node] = {0, 0, static_cast<long long>(node_keys(truth).size())};
    counts[Level::Edge] = {0, 0, static_cast<long long>(edge_keys(truth).size())};
    counts[Level::Path] = {0, 0, static_cast<long long>(path_keys(truth).size())};
    return counts;
}

}  // namespace edgeflow
