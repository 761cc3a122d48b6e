#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeflow/image.hpp"
#include "edgeflow/mermaid.hpp"

namespace testutil {

// Attribute-initialization loop example used across the suites: 8 nodes,
// 9 edges, one back edge G -> C, entry A, terminal H, 6 entry-to-terminal
// paths under single unrolling.
inline const char* kLoopChart =
    "flowchart LR\n"
    "  A([Start]) --> B[/Accept 'data' as input/]\n"
    "  B --> C{Start a loop...}\n"
    "  C --> D{Does 'self' have...}\n"
    "  D -- Yes --> E[/Use 'setattr'.../]\n"
    "  D -- No --> F[/Skip setting.../]\n"
    "  E --> G{End of loop?}\n"
    "  F --> G\n"
    "  G -- Yes --> H([End])\n"
    "  G -- No --> C\n";

inline edgeflow::mermaid::FlowchartAst parse_or_die(const std::string& code) {
    auto result = edgeflow::mermaid::parse(edgeflow::mermaid::sanitize(code));
    if (!result.ok()) throw std::runtime_error("test corpus failed to parse");
    return *result.ast;
}

inline edgeflow::RasterImage solid_image(int w, int h, std::uint8_t r, std::uint8_t g,
                                         std::uint8_t b) {
    edgeflow::RasterImage img(w, h, edgeflow::Channels::RGB8);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[i * 3 + 0] = r;
        img.data[i * 3 + 1] = g;
        img.data[i * 3 + 2] = b;
    }
    return img;
}

inline edgeflow::RasterImage solid_gray(int w, int h, std::uint8_t v) {
    edgeflow::RasterImage img(w, h, edgeflow::Channels::Gray8);
    std::fill(img.data.begin(), img.data.end(), v);
    return img;
}

/// White image with a black vertical bar spanning columns [x0, x1).
inline edgeflow::RasterImage vertical_bar_image(int w, int h, int x0, int x1) {
    edgeflow::RasterImage img = solid_gray(w, h, 255);
    for (int y = 0; y < h; ++y)
        for (int x = x0; x < x1; ++x) img.at(x, y) = 0;
    return img;
}

inline edgeflow::RasterImage random_image(std::mt19937& rng, int w, int h,
                                          edgeflow::Channels channels) {
    edgeflow::RasterImage img(w, h, channels);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

/// Random AST within the emittable grammar: ids are distinct, labels avoid
/// the delimiter sequences of their shape and have no leading/trailing
/// whitespace (the subset the canonical emitter round-trips).
inline edgeflow::mermaid::FlowchartAst random_ast(std::mt19937& rng) {
    using namespace edgeflow::mermaid;
    static const std::vector<NodeShape> shapes = {
        NodeShape::Rectangle, NodeShape::Rounded,       NodeShape::Stadium, NodeShape::Diamond,
        NodeShape::Default,   NodeShape::Parallelogram, NodeShape::Circle,  NodeShape::Subroutine,
    };
    static const std::string label_chars =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,?!'-_:";

    std::uniform_int_distribution<int> n_nodes(1, 8);
    std::uniform_int_distribution<int> shape_pick(0, static_cast<int>(shapes.size()) - 1);
    std::uniform_int_distribution<int> label_len(0, 12);
    std::uniform_int_distribution<int> char_pick(0, static_cast<int>(label_chars.size()) - 1);

    FlowchartAst ast;
    std::uniform_int_distribution<int> dir_pick(0, 4);
    ast.direction = static_cast<Direction>(dir_pick(rng));

    const int n = n_nodes(rng);
    for (int i = 0; i < n; ++i) {
        NodeDecl node;
        node.id = "n" + std::to_string(i);
        node.shape = shapes[shape_pick(rng)];
        if (node.shape == NodeShape::Default) {
            node.label = node.id;
        } else {
            const int len = label_len(rng);
            for (int k = 0; k < len; ++k) node.label += label_chars[char_pick(rng)];
            // Strip ws at the ends; inner spaces are fine.
            while (!node.label.empty() && node.label.front() == ' ') node.label.erase(0, 1);
            while (!node.label.empty() && node.label.back() == ' ') node.label.pop_back();
            if (node.label.empty()) node.label = "x";
        }
        ast.nodes.push_back(std::move(node));
    }
    std::uniform_int_distribution<int> n_edges(0, 2 * n);
    std::uniform_int_distribution<int> node_pick(0, n - 1);
    std::uniform_int_distribution<int> labeled(0, 2);
    const int m = n_edges(rng);
    for (int i = 0; i < m; ++i) {
        EdgeDecl edge;
        edge.source = ast.nodes[node_pick(rng)].id;
        edge.target = ast.nodes[node_pick(rng)].id;
        if (labeled(rng) == 0) {
            const int len = 1 + label_len(rng) % 6;
            for (int k = 0; k < len; ++k) edge.label += label_chars[char_pick(rng)];
            while (!edge.label.empty() && edge.label.front() == ' ') edge.label.erase(0, 1);
            while (!edge.label.empty() && edge.label.back() == ' ') edge.label.pop_back();
            if (edge.label.empty()) edge.label = "y";
        }
        ast.edges.push_back(std::move(edge));
    }
    return ast;
}

/// Random well-formed flowchart: a forward-edge DAG over a chain backbone,
/// so there is at least one node, one edge and one entry-to-terminal path.
inline edgeflow::mermaid::FlowchartAst random_flowchart_ast(std::mt19937& rng) {
    using namespace edgeflow::mermaid;
    std::uniform_int_distribution<int> n_nodes(2, 10);
    const int n = n_nodes(rng);
    FlowchartAst ast;
    ast.direction = Direction::TD;
    for (int i = 0; i < n; ++i)
        ast.nodes.push_back({"s" + std::to_string(i), "Step " + std::to_string(i),
                             i % 3 == 0 ? NodeShape::Diamond : NodeShape::Rectangle});
    for (int i = 0; i + 1 < n; ++i)
        ast.edges.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1), "", true});
    std::uniform_int_distribution<int> extra(0, 5);
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int m = extra(rng);
    for (int i = 0; i < m; ++i) {
        int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        ast.edges.push_back({"s" + std::to_string(a), "s" + std::to_string(b), "skip", true});
    }
    return ast;
}

/// Unique temporary directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("edgeflow_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testutil
