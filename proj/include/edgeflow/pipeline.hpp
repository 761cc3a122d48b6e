#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgeflow/canny.hpp"
#include "edgeflow/error.hpp"
#include "edgeflow/image_io.hpp"
#include "edgeflow/metrics.hpp"
#include "edgeflow/noise.hpp"
#include "edgeflow/preprocess.hpp"
#include "edgeflow/repair.hpp"
#include "edgeflow/stats.hpp"
#include "edgeflow/vlm.hpp"

namespace edgeflow {

namespace fs = std::filesystem;

struct ManifestEntry {
    std::string id;
    fs::path image_path;
    fs::path truth_path;
};

/// Dataset listing: {entries: [{id, image, truth}]}. Paths are resolved
/// relative to the manifest file. Ids must be unique and every referenced
/// file must exist at load time.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    static DatasetManifest load(const fs::path& manifest_path) {
        std::ifstream in(manifest_path);
        if (!in) throw ConfigError("cannot open manifest: " + manifest_path.string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("manifest is not valid JSON: " + manifest_path.string());
        const fs::path base = manifest_path.parent_path();

        DatasetManifest manifest;
        std::map<std::string, bool> seen;
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.id = e.at("id").get<std::string>();
            entry.image_path = base / e.at("image").get<std::string>();
            entry.truth_path = base / e.at("truth").get<std::string>();
            if (seen.count(entry.id))
                throw ConfigError("duplicate manifest id: " + entry.id);
            seen[entry.id] = true;
            if (!fs::exists(entry.image_path))
                throw ConfigError("manifest image missing: " + entry.image_path.string());
            if (!fs::exists(entry.truth_path))
                throw ConfigError("manifest ground truth missing: " + entry.truth_path.string());
            manifest.entries.push_back(std::move(entry));
        }
        if (manifest.entries.empty()) throw ConfigError("manifest has no entries");
        return manifest;
    }
};

/// One experimental condition over a manifest: which prompt/image bundle to
/// send, how many repeated runs, and where replies come from (endpoint or
/// fixture directory).
struct RunConfig {
    Condition condition = Condition::Baseline;
    std::string tag;  // output/fixture directory name; defaults to the condition name
    CannyParams canny = canny_config("C3");
    int runs = 5;
    GenerationParams generation;
    EndpointConfig endpoint;
    fs::path out_dir = "runs";
    fs::path mock_fixtures;  // empty means live endpoint
    int workers = 4;
    int max_dim = 4000;

    std::string effective_tag() const { return tag.empty() ? to_string(condition) : tag; }

    void check_valid() const {
        if (runs < 1) throw ConfigError("runs must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        generation.check_valid();
        if (condition == Condition::EdgeFlow) canny.check_valid();
        if (mock_fixtures.empty() && endpoint.url.empty())
            throw ConfigError("either an endpoint url or a mock fixtures directory is required");
    }

    static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir) {
        RunConfig c;
        if (j.contains("condition")) c.condition = condition_from(j["condition"].get<std::string>());
        if (j.contains("tag")) c.tag = j["tag"].get<std::string>();
        if (j.contains("runs")) c.runs = j["runs"].get<int>();
        if (j.contains("workers")) c.workers = j["workers"].get<int>();
        if (j.contains("max_dim")) c.max_dim = j["max_dim"].get<int>();
        if (j.contains("canny")) {
            const auto& k = j["canny"];
            if (k.is_string()) {
                c.canny = canny_config(k.get<std::string>());
            } else {
                c.canny.low = k.value("low", c.canny.low);
                c.canny.high = k.value("high", c.canny.high);
                c.canny.aperture = k.value("aperture", c.canny.aperture);
                c.canny.config_id = k.value("config_id", std::string());
            }
        }
        if (j.contains("generation")) {
            const auto& g = j["generation"];
            c.generation.temperature = g.value("temperature", c.generation.temperature);
            c.generation.top_p = g.value("top_p", c.generation.top_p);
            c.generation.max_tokens = g.value("max_tokens", c.generation.max_tokens);
        }
        if (j.contains("endpoint")) {
            const auto& e = j["endpoint"];
            c.endpoint.url = e.value("url", c.endpoint.url);
            c.endpoint.model = e.value("model", c.endpoint.model);
            c.endpoint.fixer_model = e.value("fixer_model", c.endpoint.fixer_model);
            c.endpoint.api_key_env = e.value("api_key_env", c.endpoint.api_key_env);
            c.endpoint.timeout_seconds = e.value("timeout_seconds", c.endpoint.timeout_seconds);
            c.endpoint.max_attempts = e.value("max_attempts", c.endpoint.max_attempts);
        }
        if (j.contains("out")) c.out_dir = base_dir / j["out"].get<std::string>();
        if (j.contains("mock_fixtures"))
            c.mock_fixtures = base_dir / j["mock_fixtures"].get<std::string>();
        return c;
    }
};

/// The two-stage parameter sweep: stage 1 varies hysteresis thresholds at
/// aperture 3, stage 2 varies the aperture on the stage-1 winner's thresholds.
struct SweepPlan {
    std::vector<CannyParams> stage1;
    std::vector<int> stage2_apertures;

    static SweepPlan standard() {
        SweepPlan plan;
        for (const char* id : {"C1", "C2", "C3", "C4"}) plan.stage1.push_back(canny_config(id));
        plan.stage2_apertures = {5, 7};
        return plan;
    }

    /// Hysteresis ratio guidance is 2:1 to 3:1; out-of-range pairs are
    /// reported, not rejected (the standard plan itself contains one).
    std::vector<std::string> ratio_warnings() const {
        std::vector<std::string> warnings;
        for (const auto& p : stage1) {
            if (p.low <= 0.0) continue;
            const double ratio = p.high / p.low;
            if (ratio < 2.0 || ratio > 3.0) {
                char buf[128];
                std::snprintf(buf, sizeof(buf),
                              "config %s: high/low ratio %.2f outside the recommended 2:1..3:1",
                              p.config_id.empty() ? "(unnamed)" : p.config_id.c_str(), ratio);
                warnings.emplace_back(buf);
            }
        }
        return warnings;
    }
};

/// Outcome of one (flowchart, run) conversion, including failures: a failed
/// entry is kept with an error note and scored as an empty prediction.
struct ConvertRecord {
    std::string flowchart_id;
    std::string condition_tag;
    int run_index = 1;
    std::string raw_reply;
    std::string final_code;
    bool valid = false;
    int repair_iterations = 0;
    long long latency_ms = 0;
    std::string model_id;
    std::string error;

    nlohmann::json meta_json() const {
        return {{"flowchart_id", flowchart_id}, {"condition", condition_tag},
                {"run", run_index},             {"valid", valid},
                {"repair_iterations", repair_iterations},
                {"latency_ms", latency_ms},     {"model_id", model_id},
                {"error", error},               {"prompt_version", prompts::kPromptVersion}};
    }
};

namespace detail {

inline std::unique_ptr<Client> make_client(const RunConfig& config) {
    if (!config.mock_fixtures.empty())
        return std::make_unique<MockClient>(config.mock_fixtures);
    const fs::path audit = config.out_dir / config.effective_tag() / "_audit";
    return std::make_unique<HttpChatClient>(config.endpoint, audit.string());
}

inline void persist_record(const fs::path& out_root, const ConvertRecord& rec) {
    const fs::path dir =
        out_root / rec.condition_tag / rec.flowchart_id / ("run" + std::to_string(rec.run_index));
    fs::create_directories(dir);
    write_text_file(dir / "reply.txt", rec.raw_reply);
    write_text_file(dir / "final.mmd", rec.final_code);
    write_text_file(dir / "record.json", rec.meta_json().dump(2) + "\n");
}

}  // namespace detail

/// Full conversion for one prepared image pair: bundle, generation, code
/// extraction, repair loop.
inline ConvertRecord convert_one(Client& client, const RunConfig& config,
                                 const std::string& flowchart_id, int run_index,
                                 const RasterImage& prep, const EdgeMap* edge) {
    ConvertRecord rec;
    rec.flowchart_id = flowchart_id;
    rec.condition_tag = config.effective_tag();
    rec.run_index = run_index;
    try {
        const PromptBundle bundle = build_bundle(config.condition, prep, edge);
        RequestKey key{flowchart_id, rec.condition_tag, run_index, 0};
        const ModelReply reply = generate(client, bundle, config.generation, key);
        rec.raw_reply = reply.raw_text;
        rec.model_id = reply.model_id;
        rec.latency_ms = reply.latency.count();
        const std::string code = extract_code_block(reply.raw_text);
        const RepairOutcome outcome =
            repair_loop(code, make_client_fixer(client, config.generation, key));
        rec.final_code = outcome.final_code;
        rec.valid = outcome.valid;
        rec.repair_iterations = outcome.iterations_used;
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.valid = false;
    }
    return rec;
}

/// Runs every manifest entry for every run index under the configured
/// condition, with flowchart-level parallelism. Every (entry, run) pair
/// yields exactly one persisted record; per-entry failures never abort the
/// batch.
inline std::vector<ConvertRecord> convert(const DatasetManifest& manifest,
                                          const RunConfig& config) {
    config.check_valid();
    const std::unique_ptr<Client> client = detail::make_client(config);
    const std::string tag = config.effective_tag();

    std::vector<std::vector<ConvertRecord>> per_entry(manifest.entries.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.entries.size()) return;
            const ManifestEntry& entry = manifest.entries[i];

            RasterImage prep;
            std::optional<EdgeMap> edge;
            std::string prep_error;
            try {
                prep = preprocess(load_image(entry.image_path.string()), config.max_dim);
                if (config.condition == Condition::EdgeFlow)
                    edge = canny(prep, config.canny);
                const fs::path entry_dir = config.out_dir / tag / entry.id;
                fs::create_directories(entry_dir);
                save_png((entry_dir / "prep.png").string(), prep);
                if (edge) save_png((entry_dir / "edge.png").string(), *edge);
            } catch (const std::exception& e) {
                prep_error = e.what();
            }

            for (int run = 1; run <= config.runs; ++run) {
                ConvertRecord rec;
                if (!prep_error.empty()) {
                    rec.flowchart_id = entry.id;
                    rec.condition_tag = tag;
                    rec.run_index = run;
                    rec.error = "preprocessing failed: " + prep_error;
                } else {
                    rec = convert_one(*client, config, entry.id, run, prep,
                                      edge ? &*edge : nullptr);
                }
                detail::persist_record(config.out_dir, rec);
                if (!rec.error.empty()) {
                    std::lock_guard lock(log_mutex);
                    std::cerr << "[convert] " << entry.id << " run " << run
                              << " failed: " << rec.error << "\n";
                }
                per_entry[i].push_back(std::move(rec));
            }
        }
    };

    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(config.workers, static_cast<int>(manifest.entries.size()));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<ConvertRecord> records;
    records.reserve(manifest.entries.size() * config.runs);
    for (auto& group : per_entry)
        for (auto& rec : group) records.push_back(std::move(rec));
    return records;
}

/// Re-reads persisted conversion output so evaluation can run as a separate
/// invocation.
inline std::vector<ConvertRecord> load_convert_records(const DatasetManifest& manifest,
                                                       const fs::path& out_root,
                                                       const std::string& tag, int runs) {
    std::vector<ConvertRecord> records;
    for (const auto& entry : manifest.entries) {
        for (int run = 1; run <= runs; ++run) {
            const fs::path dir = out_root / tag / entry.id / ("run" + std::to_string(run));
            if (!fs::exists(dir / "record.json"))
                throw ConfigError("missing run artifact: " + (dir / "record.json").string());
            std::ifstream meta(dir / "record.json");
            nlohmann::json j = nlohmann::json::parse(meta);
            ConvertRecord rec;
            rec.flowchart_id = entry.id;
            rec.condition_tag = tag;
            rec.run_index = run;
            rec.valid = j.value("valid", false);
            rec.repair_iterations = j.value("repair_iterations", 0);
            rec.error = j.value("error", std::string());
            std::ifstream code(dir / "final.mmd", std::ios::binary);
            std::ostringstream buf;
            buf << code.rdbuf();
            rec.final_code = buf.str();
            records.push_back(std::move(rec));
        }
    }
    return records;
}

struct RunLevelRecord {
    std::string flowchart_id;
    int run_index = 1;
    LevelCounts counts;
};

/// Metric view of one condition over a manifest: per-run counts, pooled
/// per-flowchart scores, and the global micro-average.
struct Evaluation {
    std::string condition_tag;
    std::vector<RunLevelRecord> per_run;
    std::vector<std::pair<std::string, LevelCounts>> per_flowchart_counts;
    std::vector<std::pair<std::string, ScoreCard>> per_flowchart;
    ScoreCard micro;
};

namespace detail {

inline std::vector<Path> prediction_paths(const mermaid::FlowchartAst& ast, std::string& note) {
    try {
        return path_keys(ast);
    } catch (const PathExplosionError& e) {
        note = e.what();
        return {};
    }
}

}  // namespace detail

/// Scores every record against the ground truth. Truth and prediction go
/// through the identical parse and path-extraction procedure; predictions
/// that fail to parse count as empty (tp = fp = 0, fn = |truth|).
inline Evaluation evaluate(const DatasetManifest& manifest,
                           const std::vector<ConvertRecord>& records) {
    if (records.empty()) throw ConfigError("evaluate: no records");
    Evaluation eval;
    eval.condition_tag = records.front().condition_tag;

    struct TruthSide {
        std::vector<std::string> nodes;
        std::vector<EdgeKey> edges;
        std::vector<Path> paths;
    };
    std::map<std::string, TruthSide> truths;
    for (const auto& entry : manifest.entries) {
        std::ifstream in(entry.truth_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const mermaid::ParseResult parsed = mermaid::parse(mermaid::sanitize(buf.str()));
        if (!parsed.ok())
            throw ConfigError("ground truth for '" + entry.id + "' does not parse: " +
                              format_diagnostics(parsed.diagnostics));
        TruthSide side;
        side.nodes = node_keys(*parsed.ast);
        side.edges = edge_keys(*parsed.ast);
        side.paths = path_keys(*parsed.ast);
        truths.emplace(entry.id, std::move(side));
    }

    std::map<std::string, std::vector<LevelCounts>> by_flowchart;
    for (const auto& rec : records) {
        auto truth_it = truths.find(rec.flowchart_id);
        if (truth_it == truths.end())
            throw ConfigError("record for unknown flowchart id: " + rec.flowchart_id);
        const TruthSide& truth = truth_it->second;

        LevelCounts counts;
        const mermaid::ParseResult parsed = mermaid::parse(mermaid::sanitize(rec.final_code));
        if (!parsed.ok()) {
            counts[Level::Node] = {0, 0, static_cast<long long>(truth.nodes.size())};
            counts[Level::Edge] = {0, 0, static_cast<long long>(truth.edges.size())};
            counts[Level::Path] = {0, 0, static_cast<long long>(truth.paths.size())};
        } else {
            std::string note;
            counts[Level::Node] = match_multiset(node_keys(*parsed.ast), truth.nodes);
            counts[Level::Edge] = match_multiset(edge_keys(*parsed.ast), truth.edges);
            counts[Level::Path] =
                match_multiset(detail::prediction_paths(*parsed.ast, note), truth.paths);
            if (!note.empty())
                std::cerr << "[evaluate] " << rec.flowchart_id << " run " << rec.run_index
                          << ": " << note << " (path level scored as empty)\n";
        }
        eval.per_run.push_back({rec.flowchart_id, rec.run_index, counts});
        by_flowchart[rec.flowchart_id].push_back(counts);
    }

    std::vector<LevelCounts> all_counts;
    for (const auto& entry : manifest.entries) {
        auto it = by_flowchart.find(entry.id);
        if (it == by_flowchart.end()) continue;
        LevelCounts pooled;
        for (const auto& counts : it->second)
            for (const auto& [level, c] : counts) pooled[level] += c;
        eval.per_flowchart_counts.emplace_back(entry.id, pooled);
        eval.per_flowchart.emplace_back(entry.id, per_flowchart_aggregate(it->second));
        for (const auto& counts : it->second) all_counts.push_back(counts);
    }
    eval.micro = micro_aggregate(all_counts);
    return eval;
}

namespace detail {

inline nlohmann::json score_record_json(const std::string& id, const std::string& condition,
                                        Level level, const MatchCounts& c, const Score& s) {
    return {{"flowchart_id", id}, {"condition", condition}, {"level", to_string(level)},
            {"tp", c.tp},         {"fp", c.fp},             {"fn", c.fn_},
            {"p", s.precision},   {"r", s.recall},          {"f1", s.f1}};
}

inline void append_csv_row(std::string& csv, const std::string& id, const std::string& condition,
                           Level level, const MatchCounts& c, const Score& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%lld,%lld,%lld,%.6f,%.6f,%.6f\n", id.c_str(),
                  condition.c_str(), to_string(level).c_str(), c.tp, c.fp, c.fn_, s.precision,
                  s.recall, s.f1);
    csv += buf;
}

}  // namespace detail

/// results.json plus summary.csv. Per-flowchart and global rows share one
/// record schema; the global row uses flowchart_id "ALL".
inline void write_evaluation(const Evaluation& eval, const fs::path& dir) {
    fs::create_directories(dir);

    nlohmann::json per_run = nlohmann::json::array();
    for (const auto& rec : eval.per_run) {
        for (Level level : all_levels()) {
            const MatchCounts& c = rec.counts.at(level);
            nlohmann::json row =
                detail::score_record_json(rec.flowchart_id, eval.condition_tag, level, c, score(c));
            row["run"] = rec.run_index;
            per_run.push_back(std::move(row));
        }
    }

    std::string csv = "flowchart_id,condition,level,tp,fp,fn,precision,recall,f1\n";
    nlohmann::json per_flowchart = nlohmann::json::array();
    for (std::size_t i = 0; i < eval.per_flowchart.size(); ++i) {
        const auto& [id, card] = eval.per_flowchart[i];
        const auto& [id2, counts] = eval.per_flowchart_counts[i];
        for (Level level : all_levels()) {
            per_flowchart.push_back(detail::score_record_json(id, eval.condition_tag, level,
                                                              counts.at(level), card.at(level)));
            detail::append_csv_row(csv, id, eval.condition_tag, level, counts.at(level),
                                   card.at(level));
        }
    }

    nlohmann::json global = nlohmann::json::array();
    LevelCounts pooled;
    for (const auto& rec : eval.per_run)
        for (const auto& [level, c] : rec.counts) pooled[level] += c;
    for (Level level : all_levels()) {
        global.push_back(detail::score_record_json("ALL", eval.condition_tag, level,
                                                   pooled.at(level), eval.micro.at(level)));
        detail::append_csv_row(csv, "ALL", eval.condition_tag, level, pooled.at(level),
                               eval.micro.at(level));
    }

    const nlohmann::json out = {{"condition", eval.condition_tag},
                                {"per_run", per_run},
                                {"per_flowchart", per_flowchart},
                                {"global", global}};
    detail::write_text_file(dir / "results.json", out.dump(2) + "\n");
    detail::write_text_file(dir / "summary.csv", csv);
}

/// Paired per-level, per-measure significance comparison of two conditions
/// evaluated over the same manifest.
struct ComparisonReport {
    std::string condition_a;
    std::string condition_b;
    // One block per level; columns are precision, recall, f1.
    std::vector<std::pair<std::string, std::array<StatsReport, 3>>> blocks;

    nlohmann::json to_json() const {
        nlohmann::json levels = nlohmann::json::object();
        for (const auto& [level, cols] : blocks) {
            levels[level] = {{"precision", stats_report_json(cols[0])},
                             {"recall", stats_report_json(cols[1])},
                             {"f1", stats_report_json(cols[2])}};
        }
        return {{"condition_a", condition_a}, {"condition_b", condition_b}, {"levels", levels}};
    }

    std::string to_text() const {
        std::string out = "Paired comparison: " + condition_a + " vs " + condition_b +
                          " (H1: " + condition_a + " > " + condition_b + ")\n";
        return out + render_stats_table(blocks);
    }
};

inline ComparisonReport compare_evaluations(const Evaluation& a, const Evaluation& b,
                                            DeltaConvention convention = DeltaConvention::AllPairs) {
    if (a.per_flowchart.size() != b.per_flowchart.size())
        throw ConfigError("compare: conditions cover different flowchart sets");
    for (std::size_t i = 0; i < a.per_flowchart.size(); ++i)
        if (a.per_flowchart[i].first != b.per_flowchart[i].first)
            throw ConfigError("compare: flowchart id mismatch at index " + std::to_string(i) +
                              ": " + a.per_flowchart[i].first + " vs " +
                              b.per_flowchart[i].first);

    ComparisonReport report;
    report.condition_a = a.condition_tag;
    report.condition_b = b.condition_tag;
    for (Level level : all_levels()) {
        std::array<StatsReport, 3> cols;
        for (int m = 0; m < 3; ++m) {
            PairedSample sample;
            for (std::size_t i = 0; i < a.per_flowchart.size(); ++i) {
                const Score& sa = a.per_flowchart[i].second.at(level);
                const Score& sb = b.per_flowchart[i].second.at(level);
                sample.labels.push_back(a.per_flowchart[i].first);
                sample.a.push_back(m == 0 ? sa.precision : m == 1 ? sa.recall : sa.f1);
                sample.b.push_back(m == 0 ? sb.precision : m == 1 ? sb.recall : sb.f1);
            }
            cols[m] = compare_paired(sample, convention);
        }
        report.blocks.emplace_back(to_string(level), cols);
    }
    return report;
}

/// Two-stage hyperparameter sweep results.
struct SweepResult {
    struct Entry {
        CannyParams params;
        std::string tag;
        int stage = 1;
        double node_f1 = 0.0;
        double edge_f1 = 0.0;

        double ranking_key() const { return node_f1 + edge_f1; }
    };
    std::vector<Entry> evaluated;  // evaluation order: stage 1 then stage 2
    CannyParams reference_c5;      // stage-1 winner carried into stage 2
    std::size_t winner_index = 0;  // into evaluated

    std::vector<std::size_t> ranking() const {
        std::vector<std::size_t> order(evaluated.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return evaluated[x].ranking_key() > evaluated[y].ranking_key();
        });
        return order;
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i : ranking()) {
            const Entry& e = evaluated[i];
            rows.push_back({{"config", e.params.config_id},
                            {"tag", e.tag},
                            {"stage", e.stage},
                            {"low", e.params.low},
                            {"high", e.params.high},
                            {"aperture", e.params.aperture},
                            {"node_f1", e.node_f1},
                            {"edge_f1", e.edge_f1},
                            {"node_plus_edge_f1", e.ranking_key()},
                            {"winner", i == winner_index}});
        }
        return {{"ranking", rows},
                {"reference_c5",
                 {{"low", reference_c5.low},
                  {"high", reference_c5.high},
                  {"aperture", reference_c5.aperture}}},
                {"winner", evaluated[winner_index].params.config_id}};
    }

    std::string to_text() const {
        std::string out;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-8s %-6s %8s %8s %9s %9s %9s %11s %7s\n", "Config",
                      "Stage", "Low", "High", "Aperture", "NodeF1", "EdgeF1", "Node+Edge",
                      "Winner");
        out += buf;
        out += std::string(82, '-') + "\n";
        for (std::size_t i : ranking()) {
            const Entry& e = evaluated[i];
            std::snprintf(buf, sizeof(buf), "%-8s %-6d %8.0f %8.0f %9d %9.4f %9.4f %11.4f %7s\n",
                          e.params.config_id.c_str(), e.stage, e.params.low, e.params.high,
                          e.params.aperture, e.node_f1, e.edge_f1, e.ranking_key(),
                          i == winner_index ? "*" : "");
            out += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "Reference C5 (stage-1 winner thresholds): low=%.0f high=%.0f aperture=%d\n",
                      reference_c5.low, reference_c5.high, reference_c5.aperture);
        out += buf;
        return out;
    }
};

/// Stage 1 evaluates the plan's threshold configs at aperture 3 and selects
/// the winner by micro node F1 + edge F1; stage 2 keeps the winner's
/// thresholds and evaluates the remaining apertures. The overall winner is
/// the best ranking key across both stages; ties resolve to the earlier
/// evaluated (lower-index) configuration.
inline SweepResult sweep(const DatasetManifest& manifest, RunConfig config,
                         const SweepPlan& plan = SweepPlan::standard()) {
    if (plan.stage1.empty()) throw ConfigError("sweep: stage 1 plan is empty");
    config.condition = Condition::EdgeFlow;
    for (const auto& warning : plan.ratio_warnings())
        std::cerr << "[sweep] " << warning << "\n";

    SweepResult result;
    auto run_config = [&](const CannyParams& params, int stage) {
        RunConfig rc = config;
        rc.canny = params;
        rc.tag = "edgeflow-" + (params.config_id.empty() ? "custom" : params.config_id);
        const Evaluation eval = evaluate(manifest, convert(manifest, rc));
        SweepResult::Entry entry;
        entry.params = params;
        entry.tag = rc.tag;
        entry.stage = stage;
        entry.node_f1 = eval.micro.at(Level::Node).f1;
        entry.edge_f1 = eval.micro.at(Level::Edge).f1;
        result.evaluated.push_back(entry);
    };

    for (const auto& params : plan.stage1) run_config(params, 1);

    std::size_t best1 = 0;
    for (std::size_t i = 1; i < plan.stage1.size(); ++i)
        if (result.evaluated[i].ranking_key() > result.evaluated[best1].ranking_key()) best1 = i;
    result.reference_c5 = derive_c5(result.evaluated[best1].params);

    for (int aperture : plan.stage2_apertures) {
        CannyParams params = result.evaluated[best1].params;
        params.aperture = aperture;
        params.config_id.clear();
        // Reuse the canonical name when the combination is a registry entry.
        for (const auto& [id, registered] : canny_config_registry()) {
            if (registered.low == params.low && registered.high == params.high &&
                registered.aperture == aperture) {
                params.config_id = id;
                break;
            }
        }
        if (params.config_id.empty())
            params.config_id = result.evaluated[best1].params.config_id + "a" +
                               std::to_string(aperture);
        run_config(params, 2);
    }

    result.winner_index = 0;
    for (std::size_t i = 1; i < result.evaluated.size(); ++i)
        if (result.evaluated[i].ranking_key() > result.evaluated[result.winner_index].ranking_key())
            result.winner_index = i;
    return result;
}

/// Imaging diagnostics over a manifest: per-entry background noise sigma and
/// chromatic instability, with dataset means.
struct NoiseSummary {
    std::vector<std::pair<std::string, NoiseReport>> per_entry;
    NoiseReport mean;

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [id, report] : per_entry)
            rows.push_back({{"id", id},
                            {"background_noise_sigma", report.background_noise_sigma},
                            {"color_instability_mu", report.color_instability_mu}});
        return {{"entries", rows},
                {"mean",
                 {{"background_noise_sigma", mean.background_noise_sigma},
                  {"color_instability_mu", mean.color_instability_mu}}}};
    }

    std::string to_text() const {
        std::string out;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-24s %18s %18s\n", "Flowchart", "Noise sigma",
                      "Chroma mu");
        out += buf;
        out += std::string(62, '-') + "\n";
        for (const auto& [id, report] : per_entry) {
            std::snprintf(buf, sizeof(buf), "%-24s %18.4f %18.4f\n", id.c_str(),
                          report.background_noise_sigma, report.color_instability_mu);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), "%-24s %18.4f %18.4f\n", "(mean)",
                      mean.background_noise_sigma, mean.color_instability_mu);
        out += buf;
        return out;
    }
};

inline NoiseSummary noise_summary(const DatasetManifest& manifest, int max_dim = 4000) {
    NoiseSummary summary;
    for (const auto& entry : manifest.entries) {
        const RasterImage prep = preprocess(load_image(entry.image_path.string()), max_dim);
        summary.per_entry.emplace_back(entry.id, noise_report(prep));
    }
    for (const auto& [id, report] : summary.per_entry) {
        summary.mean.background_noise_sigma += report.background_noise_sigma;
        summary.mean.color_instability_mu += report.color_instability_mu;
    }
    if (!summary.per_entry.empty()) {
        summary.mean.background_noise_sigma /= summary.per_entry.size();
        summary.mean.color_instability_mu /= summary.per_entry.size();
    }
    return summary;
}

}  // namespace edgeflow
