#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "edgeflow/metrics.hpp"
#include "helpers.hpp"

using namespace edgeflow;

namespace {

// Independent oracle: maximum bipartite matching between pred and truth items
// under exact equality, via augmenting paths.
int max_matching_tp(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    std::vector<int> match_truth(truth.size(), -1);
    std::vector<char> visited;

    std::function<bool(int)> augment = [&](int p) -> bool {
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (pred[p] != truth[t] || visited[t]) continue;
            visited[t] = 1;
            if (match_truth[t] < 0 || augment(match_truth[t])) {
                match_truth[t] = p;
                return true;
            }
        }
        return false;
    };

    int matched = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        visited.assign(truth.size(), 0);
        matched += augment(static_cast<int>(p));
    }
    return matched;
}

std::vector<std::string> random_labels(std::mt19937& rng, int max_len, int alphabet) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> pick(0, alphabet - 1);
    std::vector<std::string> items;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) items.push_back("L" + std::to_string(pick(rng)));
    return items;
}

}  // namespace

TEST_CASE("multiset matching examples") {
    CHECK(match_multiset<std::string>({"A", "B", "C"}, {"A", "B", "D"}) == MatchCounts{2, 1, 1});
    CHECK(match_multiset<std::string>({"A", "A", "B"}, {"A", "A", "B"}) == MatchCounts{3, 0, 0});
    // One-to-one consumption: the second X finds no unconsumed partner.
    CHECK(match_multiset<std::string>({"X", "X"}, {"X"}) == MatchCounts{1, 1, 0});
    CHECK(match_multiset<std::string>({}, {}) == MatchCounts{0, 0, 0});
}

TEST_CASE("matching is case sensitive without normalization") {
    CHECK(match_multiset<std::string>({"PortA"}, {"porta"}) == MatchCounts{0, 1, 1});
    CHECK(match_multiset<std::string>({"PortA "}, {"PortA"}) == MatchCounts{0, 1, 1});
}

TEST_CASE("multiset matching equals maximum matching on random inputs") {
    std::mt19937 rng(31);
    for (int i = 0; i < 200; ++i) {
        const auto pred = random_labels(rng, 12, 5);
        const auto truth = random_labels(rng, 12, 5);
        const MatchCounts counts = match_multiset(pred, truth);
        CHECK(counts.tp == max_matching_tp(pred, truth));
        CHECK(counts.tp + counts.fp == static_cast<long long>(pred.size()));
        CHECK(counts.tp + counts.fn_ == static_cast<long long>(truth.size()));
    }
}

TEST_CASE("swapping pred and truth swaps fp and fn") {
    std::mt19937 rng(32);
    for (int i = 0; i < 50; ++i) {
        const auto pred = random_labels(rng, 10, 4);
        const auto truth = random_labels(rng, 10, 4);
        const MatchCounts forward = match_multiset(pred, truth);
        const MatchCounts backward = match_multiset(truth, pred);
        CHECK(forward.tp == backward.tp);
        CHECK(forward.fp == backward.fn_);
        CHECK(forward.fn_ == backward.fp);
        CHECK(forward.tp <= std::min(pred.size(), truth.size()));
    }
}

TEST_CASE("score examples") {
    const Score a = score({2, 1, 1});
    CHECK(a.precision == Catch::Approx(2.0 / 3.0));
    CHECK(a.recall == Catch::Approx(2.0 / 3.0));
    CHECK(a.f1 == Catch::Approx(2.0 / 3.0));

    const Score zero = score({0, 0, 0});
    CHECK(zero.precision == 0.0);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);

    const Score half = score({1, 0, 1});
    CHECK(half.precision == 1.0);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("scores stay in bounds") {
    std::mt19937 rng(33);
    std::uniform_int_distribution<long long> c(0, 20);
    for (int i = 0; i < 100; ++i) {
        const Score s = score({c(rng), c(rng), c(rng)});
        CHECK(s.precision >= 0.0);
        CHECK(s.precision <= 1.0);
        CHECK(s.recall >= 0.0);
        CHECK(s.recall <= 1.0);
        CHECK(s.f1 >= 0.0);
        CHECK(s.f1 <= 1.0);
    }
}

namespace {

LevelCounts record(long long tp, long long fp, long long fn) {
    LevelCounts counts;
    for (Level level : all_levels()) counts[level] = {tp, fp, fn};
    return counts;
}

}  // namespace

TEST_CASE("micro aggregation pools counts before scoring") {
    const ScoreCard card = micro_aggregate({record(1, 1, 0), record(1, 0, 1)});
    for (Level level : all_levels())
        CHECK(card.at(level).f1 == Catch::Approx(2.0 / 3.0));

    const ScoreCard single = micro_aggregate({record(3, 1, 2)});
    const Score direct = score({3, 1, 2});
    CHECK(single.at(Level::Node).f1 == Catch::Approx(direct.f1));

    CHECK_THROWS_AS(micro_aggregate({}), ParamError);
}

TEST_CASE("micro F1 is not the mean of per-record F1") {
    std::mt19937 rng(34);
    std::uniform_int_distribution<long long> c(0, 8);
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        const LevelCounts r1 = record(c(rng), c(rng), c(rng));
        const LevelCounts r2 = record(c(rng), c(rng), c(rng));
        const double micro = micro_aggregate({r1, r2}).at(Level::Node).f1;
        const double mean =
            (score(r1.at(Level::Node)).f1 + score(r2.at(Level::Node)).f1) / 2.0;
        if (std::abs(micro - mean) > 1e-9) ++differing;
    }
    CHECK(differing > 0);
}

TEST_CASE("per-flowchart aggregation pools runs") {
    const std::vector<LevelCounts> runs = {record(1, 0, 1), record(1, 1, 0)};
    const ScoreCard card = per_flowchart_aggregate(runs);
    CHECK(card.at(Level::Edge).f1 == Catch::Approx(2.0 / 3.0));

    // Pooling identical counts changes nothing.
    const std::vector<LevelCounts> same(5, record(2, 1, 1));
    CHECK(per_flowchart_aggregate(same).at(Level::Node).f1 ==
          Catch::Approx(score({2, 1, 1}).f1));
}

TEST_CASE("self match is perfect at all levels") {
    std::mt19937 rng(35);
    for (int i = 0; i < 20; ++i) {
        const auto ast = testutil::random_flowchart_ast(rng);
        const LevelCounts counts = compare_ast(ast, ast);
        for (Level level : all_levels()) {
            const Score s = score(counts.at(level));
            CHECK(s.precision == 1.0);
            CHECK(s.recall == 1.0);
            CHECK(s.f1 == 1.0);
        }
    }
    const auto loop_ast = testutil::parse_or_die(testutil::kLoopChart);
    const LevelCounts counts = compare_ast(loop_ast, loop_ast);
    CHECK(counts.at(Level::Node) == MatchCounts{8, 0, 0});
    CHECK(counts.at(Level::Edge) == MatchCounts{9, 0, 0});
    CHECK(counts.at(Level::Path) == MatchCounts{6, 0, 0});
}

TEST_CASE("edge keys use labels with empty string for unlabeled") {
    const auto ast = testutil::parse_or_die("flowchart TD\nA[Start] --> B[End]\nB -- ok --> A");
    const auto keys = edge_keys(ast);
    REQUIRE(keys.size() == 2);
    CHECK(keys[0] == EdgeKey{"Start", "End", ""});
    CHECK(keys[1] == EdgeKey{"End", "Start", "ok"});
}

TEST_CASE("corrupting one node label never raises any level") {
    const auto truth = testutil::parse_or_die(testutil::kLoopChart);
    auto corrupted = truth;
    // Node C sits on every path: all levels must drop, path F1 strictly.
    for (auto& node : corrupted.nodes)
        if (node.id == "C") node.label = "Strt a loop...";
    for (auto& level : {Level::Node, Level::Edge, Level::Path}) {
        const Score before = score(compare_ast(truth, truth).at(level));
        const Score after = score(compare_ast(corrupted, truth).at(level));
        CHECK(after.f1 <= before.f1);
    }
    CHECK(score(compare_ast(corrupted, truth).at(Level::Path)).f1 < 1.0);
    CHECK(compare_ast(corrupted, truth).at(Level::Path).tp == 0);
}

TEST_CASE("missing back edge cascades into the path level") {
    const auto truth = testutil::parse_or_die(testutil::kLoopChart);
    auto pred = truth;
    std::erase_if(pred.edges, [](const mermaid::EdgeDecl& e) {
        return e.source == "G" && e.target == "C";
    });

    const LevelCounts counts = compare_ast(pred, truth);
    CHECK(score(counts.at(Level::Node)).f1 == 1.0);
    CHECK(counts.at(Level::Edge) == MatchCounts{8, 0, 1});
    CHECK(score(counts.at(Level::Edge)).precision == 1.0);
    CHECK(score(counts.at(Level::Edge)).recall == Catch::Approx(8.0 / 9.0));
    // Path set shrinks from 6 to the 2 loop-free ones.
    CHECK(counts.at(Level::Path) == MatchCounts{2, 0, 4});
}

TEST_CASE("empty prediction counts") {
    const auto truth = testutil::parse_or_die(testutil::kLoopChart);
    const LevelCounts counts = empty_prediction_counts(truth);
    CHECK(counts.at(Level::Node) == MatchCounts{0, 0, 8});
    CHECK(counts.at(Level::Edge) == MatchCounts{0, 0, 9});
    CHECK(counts.at(Level::Path) == MatchCounts{0, 0, 6});
    for (Level level : all_levels()) CHECK(score(counts.at(level)).recall == 0.0);
}
