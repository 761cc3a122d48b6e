#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "edgeflow/mermaid.hpp"
#include "helpers.hpp"

using namespace edgeflow::mermaid;

TEST_CASE("sanitize strips comments and directives") {
    CHECK(sanitize("G -- No --> C  %% recovered") == "G -- No --> C");
    CHECK(sanitize("flowchart TD\nA --> B") == "flowchart TD\nA --> B");
    CHECK(sanitize("classDef red fill:#f00") == "");
    CHECK(sanitize("flowchart TD\n%% a comment\nA --> B") == "flowchart TD\nA --> B");
    CHECK(sanitize("flowchart TD\nstyle A fill:#fff\nlinkStyle 0 stroke:red\nclick A href\nA") ==
          "flowchart TD\nA");
    CHECK(sanitize("a\r\nb\r") == "a\nb");
}

TEST_CASE("sanitize is idempotent") {
    const std::string samples[] = {
        testutil::kLoopChart,
        "flowchart TD %% hdr\n%%full\nA[x]  %% tail\nstyle A fill:#fff\nB --> C",
        "",
        "no mermaid at all\n\n%%",
    };
    for (const auto& s : samples) CHECK(sanitize(sanitize(s)) == sanitize(s));
}

TEST_CASE("parses the loop example") {
    const ParseResult result = parse(sanitize(testutil::kLoopChart));
    REQUIRE(result.ok());
    const FlowchartAst& ast = *result.ast;
    CHECK(ast.direction == Direction::LR);
    REQUIRE(ast.nodes.size() == 8);
    REQUIRE(ast.edges.size() == 9);

    CHECK(ast.nodes[0].id == "A");
    CHECK(ast.nodes[0].label == "Start");
    CHECK(ast.nodes[0].shape == NodeShape::Stadium);
    CHECK(ast.nodes[1].label == "Accept 'data' as input");
    CHECK(ast.nodes[1].shape == NodeShape::Parallelogram);

    const NodeDecl* g = ast.find_node("G");
    REQUIRE(g != nullptr);
    CHECK(g->label == "End of loop?");
    CHECK(g->shape == NodeShape::Diamond);

    CHECK(ast.edges[3] == EdgeDecl{"D", "E", "Yes", true});
    CHECK(ast.edges[8] == EdgeDecl{"G", "C", "No", true});
}

TEST_CASE("minimal program declares implicit nodes") {
    const ParseResult result = parse("flowchart TD\nA --> B");
    REQUIRE(result.ok());
    REQUIRE(result.ast->nodes.size() == 2);
    CHECK(result.ast->nodes[0].label == "A");
    CHECK(result.ast->nodes[0].shape == NodeShape::Default);
    CHECK(result.ast->nodes[1].label == "B");
    REQUIRE(result.ast->edges.size() == 1);
    CHECK(result.ast->edges[0].label == "");
}

TEST_CASE("dangling arrow is a line-numbered diagnostic") {
    const ParseResult result = parse("flowchart TD\nA --> ");
    REQUIRE_FALSE(result.ok());
    REQUIRE_FALSE(result.diagnostics.messages.empty());
    CHECK(result.diagnostics.messages[0].line == 2);
}

TEST_CASE("parse failure classes") {
    SECTION("unknown header") {
        const ParseResult r = parse("sequenceDiagram\nA->>B: hi");
        REQUIRE_FALSE(r.ok());
        CHECK(r.diagnostics.messages[0].line == 1);
    }
    SECTION("unknown direction") {
        REQUIRE_FALSE(parse("flowchart XX\nA --> B").ok());
    }
    SECTION("unclosed bracket") {
        const ParseResult r = parse("flowchart TD\nA[open --> B");
        REQUIRE_FALSE(r.ok());
        CHECK(r.diagnostics.messages[0].line == 2);
    }
    SECTION("undirected link is out of subset") {
        REQUIRE_FALSE(parse("flowchart TD\nA --- B").ok());
    }
    SECTION("empty input") {
        const ParseResult r = parse("");
        REQUIRE_FALSE(r.ok());
        REQUIRE_FALSE(r.diagnostics.messages.empty());
    }
}

TEST_CASE("parse totality over random garbage") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> len(0, 200);
    std::uniform_int_distribution<int> byte(32, 126);
    for (int i = 0; i < 200; ++i) {
        std::string junk;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) {
            const int c = byte(rng);
            junk += static_cast<char>(c == 126 ? '\n' : c);
        }
        const ParseResult r = parse(junk);
        if (!r.ok()) {
            REQUIRE_FALSE(r.diagnostics.messages.empty());
            for (const auto& msg : r.diagnostics.messages) CHECK(msg.line >= 1);
        }
        CHECK(r.diagnostics.ok == r.diagnostics.messages.empty());
    }
}

TEST_CASE("all node shapes parse with exact labels") {
    const ParseResult r = parse(
        "flowchart TD\n"
        "R[plain]\n"
        "O(round)\n"
        "S([stad])\n"
        "D{dia}\n"
        "P[/para/]\n"
        "C((circ))\n"
        "U[[sub]]\n");
    REQUIRE(r.ok());
    const auto& n = r.ast->nodes;
    REQUIRE(n.size() == 7);
    CHECK(n[0].shape == NodeShape::Rectangle);
    CHECK(n[1].shape == NodeShape::Rounded);
    CHECK(n[2].shape == NodeShape::Stadium);
    CHECK(n[3].shape == NodeShape::Diamond);
    CHECK(n[4].shape == NodeShape::Parallelogram);
    CHECK(n[5].shape == NodeShape::Circle);
    CHECK(n[6].shape == NodeShape::Subroutine);
    CHECK(n[2].label == "stad");
    CHECK(n[5].label == "circ");
}

TEST_CASE("labels keep bytes inside delimiters") {
    const ParseResult r =
        parse("flowchart TD\nA[  spaced out  ]\nB[\"br]acket\"]\nA -->|  Yes  | B");
    REQUIRE(r.ok());
    CHECK(r.ast->nodes[0].label == "  spaced out  ");
    CHECK(r.ast->nodes[1].label == "br]acket");
    CHECK(r.ast->edges[0].label == "  Yes  ");
}

TEST_CASE("edge forms and chains") {
    const ParseResult r = parse(
        "flowchart LR\n"
        "A --> B\n"
        "A -- go --> C\n"
        "A -->|stop| D\n"
        "B --> C --> D\n"
        "E[x] --> F{y}; F --> E\n");
    REQUIRE(r.ok());
    const auto& e = r.ast->edges;
    REQUIRE(e.size() == 7);
    CHECK(e[0] == EdgeDecl{"A", "B", "", true});
    CHECK(e[1] == EdgeDecl{"A", "C", "go", true});
    CHECK(e[2] == EdgeDecl{"A", "D", "stop", true});
    CHECK(e[3] == EdgeDecl{"B", "C", "", true});
    CHECK(e[4] == EdgeDecl{"C", "D", "", true});
    CHECK(e[5] == EdgeDecl{"E", "F", "", true});
    CHECK(e[6] == EdgeDecl{"F", "E", "", true});
}

TEST_CASE("conflicting duplicate declarations are rejected") {
    REQUIRE_FALSE(parse("flowchart TD\nA[one]\nA[two]").ok());
    // Same label twice is fine; explicit declaration after implicit use is fine.
    CHECK(parse("flowchart TD\nA[one]\nA[one]").ok());
    const ParseResult r = parse("flowchart TD\nA --> B\nA[Start]");
    REQUIRE(r.ok());
    CHECK(r.ast->nodes[0].label == "Start");
}

TEST_CASE("subgraph blocks are flattened") {
    const ParseResult r = parse(
        "flowchart TD\n"
        "subgraph cluster one\n"
        "A --> B\n"
        "end\n"
        "B --> C\n");
    REQUIRE(r.ok());
    CHECK(r.ast->nodes.size() == 3);
    CHECK(r.ast->edges.size() == 2);
}

TEST_CASE("emit produces the canonical form") {
    FlowchartAst ast;
    ast.direction = Direction::TD;
    ast.nodes = {{"A", "A", NodeShape::Default}, {"B", "B", NodeShape::Default}};
    ast.edges = {{"A", "B", "", true}};
    CHECK(emit(ast) == "flowchart TD\nA[A]\nB[B]\nA --> B\n");

    FlowchartAst labeled;
    labeled.direction = Direction::LR;
    labeled.nodes = {{"G", "End of loop?", NodeShape::Diamond}};
    CHECK(emit(labeled) == "flowchart LR\nG{End of loop?}\n");
}

TEST_CASE("loop example round-trips") {
    const FlowchartAst ast = testutil::parse_or_die(testutil::kLoopChart);
    const ParseResult again = parse(emit(ast));
    REQUIRE(again.ok());
    CHECK(*again.ast == ast);
}

TEST_CASE("random ASTs round-trip through emit and parse") {
    std::mt19937 rng(123);
    for (int i = 0; i < 300; ++i) {
        const FlowchartAst ast = testutil::random_ast(rng);
        const std::string code = emit(ast);
        const ParseResult back = parse(code);
        REQUIRE(back.ok());
        REQUIRE(*back.ast == ast);
    }
}

TEST_CASE("semicolons inside labels do not split statements") {
    const ParseResult r = parse("flowchart TD\nA[one; two] --> B{x;y}; B -->|p;q| C\n");
    REQUIRE(r.ok());
    CHECK(r.ast->nodes[0].label == "one; two");
    CHECK(r.ast->nodes[1].label == "x;y");
    REQUIRE(r.ast->edges.size() == 2);
    CHECK(r.ast->edges[1].label == "p;q");
}

TEST_CASE("graph header and defaulted direction") {
    const ParseResult graph_hdr = parse("graph LR\nA --> B");
    REQUIRE(graph_hdr.ok());
    CHECK(graph_hdr.ast->direction == Direction::LR);

    const ParseResult bare = parse("flowchart\nA --> B");
    REQUIRE(bare.ok());
    CHECK(bare.ast->direction == Direction::TD);

    const ParseResult tb = parse("flowchart TB\nA --> B");
    REQUIRE(tb.ok());
    CHECK(tb.ast->direction == Direction::TB);
    CHECK(emit(*tb.ast).rfind("flowchart TB", 0) == 0);
}

TEST_CASE("emit escapes awkward labels and round-trips them") {
    FlowchartAst ast;
    ast.nodes = {{"A", "a]b", NodeShape::Rectangle},
                 {"B", "x --> y", NodeShape::Rectangle},
                 {"C", " padded ", NodeShape::Diamond}};
    ast.edges = {{"A", "B", " spaced ", true}, {"B", "C", "has --> arrow", true}};
    const std::string code = emit(ast);
    CHECK(code.find("A[\"a]b\"]") != std::string::npos);
    CHECK(code.find("-->| spaced |") != std::string::npos);
    const ParseResult back = parse(code);
    REQUIRE(back.ok());
    CHECK(*back.ast == ast);
}

TEST_CASE("validate combines sanitize and parse") {
    CHECK(validate(testutil::kLoopChart).ok);
    const ParseDiagnostics empty = validate("");
    REQUIRE_FALSE(empty.ok);
    CHECK(empty.messages[0].message.find("missing flowchart header") != std::string::npos);
    CHECK(validate("%% comment\nflowchart TD\nA --> B").ok);
}
