#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edgeflow::mermaid {

enum class Direction { TD, TB, LR, RL, BT };

enum class NodeShape {
    Rectangle,      // [text]
    Rounded,        // (text)
    Stadium,        // ([text])
    Diamond,        // {text}
    Parallelogram,  // [/text/]
    Circle,         // ((text))
    Subroutine,     // [[text]]
    Default,        // implicit declaration by bare id
};

inline std::string to_string(Direction d) {
    switch (d) {
        case Direction::TD: return "TD";
        case Direction::TB: return "TB";
        case Direction::LR: return "LR";
        case Direction::RL: return "RL";
        case Direction::BT: return "BT";
    }
    return "TD";
}

inline std::optional<Direction> direction_from(std::string_view s) {
    if (s == "TD") return Direction::TD;
    if (s == "TB") return Direction::TB;
    if (s == "LR") return Direction::LR;
    if (s == "RL") return Direction::RL;
    if (s == "BT") return Direction::BT;
    return std::nullopt;
}

/// Default renders identically to a rectangle; the two compare equal so that
/// canonical emission (which always writes delimiters) round-trips implicitly
/// declared nodes.
inline NodeShape canonical_shape(NodeShape s) {
    return s == NodeShape::Default ? NodeShape::Rectangle : s;
}

struct NodeDecl {
    std::string id;
    std::string label;  // stored without quotes or shape delimiters
    NodeShape shape = NodeShape::Default;

    friend bool operator==(const NodeDecl& a, const NodeDecl& b) {
        return a.id == b.id && a.label == b.label &&
               canonical_shape(a.shape) == canonical_shape(b.shape);
    }
};

struct EdgeDecl {
    std::string source;
    std::string target;
    std::string label;  // empty string when unlabeled
    bool directed = true;

    friend bool operator==(const EdgeDecl& a, const EdgeDecl& b) {
        return a.source == b.source && a.target == b.target && a.label == b.label &&
               a.directed == b.directed;
    }
};

struct FlowchartAst {
    Direction direction = Direction::TD;
    std::vector<NodeDecl> nodes;
    std::vector<EdgeDecl> edges;

    friend bool operator==(const FlowchartAst&, const FlowchartAst&) = default;

    const NodeDecl* find_node(std::string_view id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
};

struct Diagnostic {
    int line = 0;  // 1-based
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ParseDiagnostics {
    bool ok = true;
    std::vector<Diagnostic> messages;

    void add(int line, std::string message) {
        ok = false;
        messages.push_back({line, std::move(message)});
    }
};

struct ParseResult {
    std::optional<FlowchartAst> ast;
    ParseDiagnostics diagnostics;

    bool ok() const { return ast.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::string first_word(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return std::string(s.substr(0, i));
}

struct ShapeSyntax {
    std::string_view open;
    std::string_view close;
    NodeShape shape;
};

// Longest openers first so "([", "[[", "[/", "((" win over "[" and "(".
inline const std::vector<ShapeSyntax>& shape_table() {
    static const std::vector<ShapeSyntax> table = {
        {"([", "])", NodeShape::Stadium},   {"[[", "]]", NodeShape::Subroutine},
        {"[/", "/]", NodeShape::Parallelogram}, {"((", "))", NodeShape::Circle},
        {"[", "]", NodeShape::Rectangle},   {"(", ")", NodeShape::Rounded},
        {"{", "}", NodeShape::Diamond},
    };
    return table;
}

// Statement boundaries within a line: semicolons split statements, but not
// inside shape delimiters, |edge labels| or "quotes".
inline std::vector<std::string_view> split_statements(std::string_view line) {
    std::vector<std::string_view> parts;
    int bracket_depth = 0;
    bool in_pipe = false, in_quote = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quote) {
            if (c == '"') in_quote = false;
            continue;
        }
        switch (c) {
            case '"': in_quote = true; break;
            case '[': case '(': case '{': ++bracket_depth; break;
            case ']': case ')': case '}':
                if (bracket_depth > 0) --bracket_depth;
                break;
            case '|': in_pipe = !in_pipe; break;
            case ';':
                if (bracket_depth == 0 && !in_pipe) {
                    parts.push_back(line.substr(start, i - start));
                    start = i + 1;
                }
                break;
            default: break;
        }
    }
    parts.push_back(line.substr(start));
    return parts;
}

// Scanner over one statement.
struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    bool starts_with(std::string_view s) const { return text.substr(pos, s.size()) == s; }
    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(peek()))) ++pos;
    }
    std::string_view rest() const { return text.substr(pos); }
};

struct NodeRef {
    std::string id;
    std::optional<std::pair<std::string, NodeShape>> decl;  // label + shape when explicit
};

struct StatementError {
    std::string message;
};

// id, optionally followed immediately by a shape-delimited label.
inline std::optional<NodeRef> scan_node_ref(Cursor& cur, StatementError& err) {
    cur.skip_ws();
    std::size_t start = cur.pos;
    while (!cur.done() && is_id_char(cur.peek())) ++cur.pos;
    if (cur.pos == start) {
        err.message = cur.done() ? "expected node identifier, found end of statement"
                                 : std::string("expected node identifier before '") +
                                       cur.peek() + "'";
        return std::nullopt;
    }
    NodeRef ref;
    ref.id = std::string(cur.text.substr(start, cur.pos - start));
    if (cur.done()) return ref;

    for (const auto& syn : shape_table()) {
        if (!cur.starts_with(syn.open)) continue;
        cur.pos += syn.open.size();
        std::string label;
        if (!cur.done() && cur.peek() == '"') {
            ++cur.pos;
            std::size_t q = cur.text.find('"', cur.pos);
            if (q == std::string_view::npos) {
                err.message = "unterminated quoted label in node '" + ref.id + "'";
                return std::nullopt;
            }
            label = std::string(cur.text.substr(cur.pos, q - cur.pos));
            cur.pos = q + 1;
            if (!cur.starts_with(syn.close)) {
                err.message = "expected '" + std::string(syn.close) +
                              "' after quoted label in node '" + ref.id + "'";
                return std::nullopt;
            }
            cur.pos += syn.close.size();
        } else {
            std::size_t end = cur.text.find(syn.close, cur.pos);
            if (end == std::string_view::npos) {
                err.message = "unclosed '" + std::string(syn.open) + "' in node '" + ref.id + "'";
                return std::nullopt;
            }
            label = std::string(cur.text.substr(cur.pos, end - cur.pos));
            cur.pos = end + syn.close.size();
        }
        ref.decl = {std::move(label), syn.shape};
        break;
    }
    return ref;
}

// "-->" (two or more dashes), "-- label -->", or "-->|label|". Returns the
// edge label, empty when unlabeled.
inline std::optional<std::string> scan_arrow(Cursor& cur, StatementError& err) {
    cur.skip_ws();
    std::size_t dashes = 0;
    while (cur.pos + dashes < cur.text.size() && cur.text[cur.pos + dashes] == '-') ++dashes;
    if (dashes < 2) {
        err.message = "expected '-->' arrow before '" + std::string(cur.rest().substr(0, 8)) + "'";
        return std::nullopt;
    }
    std::size_t after = cur.pos + dashes;
    if (after < cur.text.size() && cur.text[after] == '>') {
        cur.pos = after + 1;
        // Optional |label| immediately after the arrowhead.
        std::size_t save = cur.pos;
        cur.skip_ws();
        if (!cur.done() && cur.peek() == '|') {
            ++cur.pos;
            std::size_t bar = cur.text.find('|', cur.pos);
            if (bar == std::string_view::npos) {
                err.message = "unterminated '|' edge label";
                return std::nullopt;
            }
            std::string label(cur.text.substr(cur.pos, bar - cur.pos));
            cur.pos = bar + 1;
            return label;
        }
        cur.pos = save;
        return std::string();
    }
    // "-- label -->": search for the closing arrowhead.
    std::size_t scan = after;
    while (scan < cur.text.size()) {
        if (cur.text[scan] == '-') {
            std::size_t d = 0;
            while (scan + d < cur.text.size() && cur.text[scan + d] == '-') ++d;
            if (d >= 2 && scan + d < cur.text.size() && cur.text[scan + d] == '>') {
                std::string label(trim(cur.text.substr(after, scan - after)));
                cur.pos = scan + d + 1;
                return label;
            }
            scan += d;
        } else {
            ++scan;
        }
    }
    err.message = "'--' link without closing '-->'";
    return std::nullopt;
}

struct AstBuilder {
    FlowchartAst ast;
    std::map<std::string, std::size_t, std::less<>> index;
    std::vector<bool> implicit;

    // Explicit declarations override implicit ones; two explicit declarations
    // with different labels are ambiguous for exact-match evaluation.
    bool touch(const NodeRef& ref, int line, ParseDiagnostics& diags) {
        auto it = index.find(ref.id);
        if (it == index.end()) {
            NodeDecl node{ref.id, ref.decl ? ref.decl->first : ref.id,
                          ref.decl ? ref.decl->second : NodeShape::Default};
            index.emplace(ref.id, ast.nodes.size());
            ast.nodes.push_back(std::move(node));
            implicit.push_back(!ref.decl.has_value());
            return true;
        }
        if (!ref.decl) return true;
        NodeDecl& existing = ast.nodes[it->second];
        if (implicit[it->second]) {
            existing.label = ref.decl->first;
            existing.shape = ref.decl->second;
            implicit[it->second] = false;
            return true;
        }
        if (existing.label != ref.decl->first) {
            diags.add(line, "node '" + ref.id + "' redeclared with conflicting label: '" +
                                existing.label + "' vs '" + ref.decl->first + "'");
            return false;
        }
        return true;
    }
};

inline void parse_statement(std::string_view stmt, int line, AstBuilder& builder,
                            ParseDiagnostics& diags) {
    Cursor cur{stmt};
    StatementError err;
    auto head = scan_node_ref(cur, err);
    if (!head) {
        diags.add(line, err.message);
        return;
    }
    if (!builder.touch(*head, line, diags)) return;
    std::string prev = head->id;
    cur.skip_ws();
    while (!cur.done()) {
        auto label = scan_arrow(cur, err);
        if (!label) {
            diags.add(line, err.message);
            return;
        }
        auto next = scan_node_ref(cur, err);
        if (!next) {
            diags.add(line, err.message);
            return;
        }
        if (!builder.touch(*next, line, diags)) return;
        builder.ast.edges.push_back({prev, next->id, *label, true});
        prev = next->id;
        cur.skip_ws();
    }
}

}  // namespace detail

/// Strips Mermaid comments (%%) and the presentation directives style,
/// classDef, click and linkStyle; normalizes line endings to LF. Nodes, edges
/// and labels pass through untouched.
inline std::string sanitize(std::string_view code) {
    std::string out;
    out.reserve(code.size());
    std::size_t pos = 0;
    bool first = true;
    while (pos <= code.size()) {
        std::size_t nl = code.find('\n', pos);
        std::string_view line = code.substr(pos, nl == std::string_view::npos ? code.size() - pos
                                                                              : nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        bool drop = false;
        std::string_view trimmed = detail::trim(line);
        if (trimmed.substr(0, 2) == "%%") {
            drop = true;
        } else {
            const std::string word = detail::first_word(trimmed);
            if (word == "style" || word == "classDef" || word == "click" || word == "linkStyle")
                drop = true;
        }
        if (!drop) {
            std::string_view kept = line;
            if (std::size_t cmt = kept.find("%%"); cmt != std::string_view::npos) {
                kept = kept.substr(0, cmt);
                while (!kept.empty() && std::isspace(static_cast<unsigned char>(kept.back())))
                    kept.remove_suffix(1);
            }
            if (!first) out.push_back('\n');
            out.append(kept);
            first = false;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

/// Parses the flowchart subset. Never throws on malformed input: failures are
/// returned as diagnostics with 1-based line numbers into the given text.
inline ParseResult parse(std::string_view code) {
    ParseResult result;
    detail::AstBuilder builder;
    ParseDiagnostics& diags = result.diagnostics;

    bool saw_header = false;
    int line_no = 0;
    std::size_t pos = 0;
    int last_line = 1;
    while (pos <= code.size()) {
        std::size_t nl = code.find('\n', pos);
        std::string_view line = code.substr(pos, nl == std::string_view::npos ? code.size() - pos
                                                                              : nl - pos);
        ++line_no;
        last_line = line_no;

        for (std::string_view stmt : detail::split_statements(line)) {
            stmt = detail::trim(stmt);
            if (!stmt.empty()) {
                if (!saw_header) {
                    const std::string word = detail::first_word(stmt);
                    if (word != "flowchart" && word != "graph") {
                        diags.add(line_no, "missing flowchart header: expected 'flowchart <dir>'"
                                           ", found '" + word + "'");
                    } else {
                        std::string_view rest = detail::trim(stmt.substr(word.size()));
                        if (rest.empty()) {
                            builder.ast.direction = Direction::TD;
                        } else if (auto dir = direction_from(rest)) {
                            builder.ast.direction = *dir;
                        } else {
                            diags.add(line_no, "unknown flow direction '" + std::string(rest) +
                                                   "' (expected TD, TB, LR, RL or BT)");
                        }
                    }
                    saw_header = true;
                } else {
                    const std::string word = detail::first_word(stmt);
                    if (word == "subgraph" || word == "end") {
                        // Accepted and flattened: grouping only, no graph content.
                    } else {
                        detail::parse_statement(stmt, line_no, builder, diags);
                    }
                }
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (!saw_header) diags.add(last_line, "missing flowchart header");
    if (diags.ok) result.ast = std::move(builder.ast);
    return result;
}

/// Canonical emission: header, one node declaration per line, one edge per
/// line. parse(emit(ast)) reproduces an equal AST for every AST the grammar
/// can construct.
inline std::string emit(const FlowchartAst& ast) {
    std::string out = "flowchart " + to_string(ast.direction);
    auto needs_quotes = [](const std::string& label, std::string_view close) {
        return label.find(close) != std::string::npos ||
               (!label.empty() && label.front() == '"');
    };
    for (const auto& node : ast.nodes) {
        std::string_view open = "[", close = "]";
        for (const auto& syn : detail::shape_table()) {
            if (syn.shape == canonical_shape(node.shape)) {
                open = syn.open;
                close = syn.close;
                break;
            }
        }
        out += "\n" + node.id + std::string(open);
        if (needs_quotes(node.label, close))
            out += "\"" + node.label + "\"";
        else
            out += node.label;
        out += std::string(close);
    }
    for (const auto& edge : ast.edges) {
        out += "\n" + edge.source;
        if (edge.label.empty()) {
            out += " --> ";
        } else if (edge.label.find("-->") == std::string::npos && !edge.label.empty() &&
                   edge.label == std::string(detail::trim(edge.label))) {
            out += " -- " + edge.label + " --> ";
        } else {
            out += " -->|" + edge.label + "| ";
        }
        out += edge.target;
    }
    out += "\n";
    return out;
}

/// sanitize then parse; ok reflects parse success.
inline ParseDiagnostics validate(std::string_view code) {
    return parse(sanitize(code)).diagnostics;
}

}  // namespace edgeflow::mermaid
