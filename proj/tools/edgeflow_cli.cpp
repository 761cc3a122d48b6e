// Command-line front end for the flowchart-to-Mermaid conversion and
// evaluation pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgeflow/edgeflow.hpp"

namespace fs = std::filesystem;
using namespace edgeflow;

namespace {

struct CommonFlags {
    std::string manifest;
    std::string config_file;
    std::string condition;
    std::string tag;
    int runs = -1;
    std::string canny_spec;
    std::string out;
    std::string mock;
    std::string endpoint;
    std::string model;
    int workers = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool needs_generation) {
    cmd->add_option("--manifest", flags.manifest, "Dataset manifest JSON")->required();
    cmd->add_option("--config", flags.config_file, "Run configuration JSON (flags override it)");
    cmd->add_option("--out", flags.out, "Output directory for run artifacts and reports");
    if (needs_generation) {
        cmd->add_option("--condition", flags.condition, "baseline or edgeflow");
        cmd->add_option("--tag", flags.tag, "Override the output/fixture condition tag");
        cmd->add_option("--runs", flags.runs, "Independent runs per flowchart (default 5)");
        cmd->add_option("--canny", flags.canny_spec,
                        "Canny params as low,high,aperture or a config id like C3");
        cmd->add_option("--mock", flags.mock, "Fixture directory for offline (mock) replies");
        cmd->add_option("--endpoint", flags.endpoint,
                        "OpenAI-compatible chat completions URL");
        cmd->add_option("--model", flags.model, "Model identifier sent with each request");
        cmd->add_option("--workers", flags.workers, "Flowchart-level worker pool size");
    }
}

CannyParams parse_canny_spec(const std::string& spec) {
    if (!spec.empty() && (spec[0] == 'C' || spec[0] == 'c')) {
        std::string id = spec;
        id[0] = 'C';
        return canny_config(id);
    }
    CannyParams params;
    params.config_id.clear();
    double low = 0.0, high = 0.0;
    int aperture = 0;
    if (std::sscanf(spec.c_str(), "%lf,%lf,%d", &low, &high, &aperture) != 3)
        throw ConfigError("--canny expects low,high,aperture (e.g. 100,200,3) or a config id");
    params.low = low;
    params.high = high;
    params.aperture = aperture;
    params.check_valid();
    return params;
}

RunConfig build_config(const CommonFlags& flags) {
    RunConfig config;
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) throw ConfigError("cannot open config file: " + flags.config_file);
        nlohmann::json j = nlohmann::json::parse(in);
        config = RunConfig::from_json(j, fs::path(flags.config_file).parent_path());
    }
    if (!flags.condition.empty()) config.condition = condition_from(flags.condition);
    if (!flags.tag.empty()) config.tag = flags.tag;
    if (flags.runs > 0) config.runs = flags.runs;
    if (!flags.canny_spec.empty()) config.canny = parse_canny_spec(flags.canny_spec);
    if (!flags.out.empty()) config.out_dir = flags.out;
    if (!flags.mock.empty()) config.mock_fixtures = flags.mock;
    if (!flags.endpoint.empty()) config.endpoint.url = flags.endpoint;
    if (!flags.model.empty()) config.endpoint.model = flags.model;
    if (flags.workers > 0) config.workers = flags.workers;
    return config;
}

Evaluation evaluate_tag(const DatasetManifest& manifest, const fs::path& out_root,
                        const std::string& tag, int runs) {
    return evaluate(manifest, load_convert_records(manifest, out_root, tag, runs));
}

int run_convert(const CommonFlags& flags) {
    const DatasetManifest manifest = DatasetManifest::load(flags.manifest);
    const RunConfig config = build_config(flags);
    const auto records = convert(manifest, config);
    std::size_t failures = 0;
    for (const auto& rec : records) failures += !rec.error.empty();
    std::cout << "converted " << records.size() << " records ("
              << manifest.entries.size() << " flowcharts x " << config.runs
              << " runs) under condition '" << config.effective_tag() << "', " << failures
              << " failures\nartifacts: " << config.out_dir.string() << "\n";
    return 0;
}

int run_evaluate(const CommonFlags& flags) {
    const DatasetManifest manifest = DatasetManifest::load(flags.manifest);
    const RunConfig config = build_config(flags);
    const std::string tag = config.effective_tag();
    const Evaluation eval = evaluate_tag(manifest, config.out_dir, tag, config.runs);
    const fs::path eval_dir = config.out_dir / tag / "eval";
    write_evaluation(eval, eval_dir);
    std::cout << "evaluated " << eval.per_run.size() << " records; micro F1 node="
              << eval.micro.at(Level::Node).f1 << " edge=" << eval.micro.at(Level::Edge).f1
              << " path=" << eval.micro.at(Level::Path).f1 << "\nreports: " << eval_dir.string()
              << "\n";
    return 0;
}

int run_compare(const CommonFlags& flags, const std::string& tag_a, const std::string& tag_b,
                bool within_pair_delta) {
    const DatasetManifest manifest = DatasetManifest::load(flags.manifest);
    const RunConfig config = build_config(flags);
    const Evaluation eval_a = evaluate_tag(manifest, config.out_dir, tag_a, config.runs);
    const Evaluation eval_b = evaluate_tag(manifest, config.out_dir, tag_b, config.runs);
    const ComparisonReport report = compare_evaluations(
        eval_a, eval_b,
        within_pair_delta ? DeltaConvention::WithinPair : DeltaConvention::AllPairs);
    const fs::path dir = config.out_dir / ("compare_" + tag_a + "_vs_" + tag_b);
    fs::create_directories(dir);
    std::ofstream(dir / "stats.json") << report.to_json().dump(2) << "\n";
    std::ofstream(dir / "stats.txt") << report.to_text();
    std::cout << report.to_text() << "reports: " << dir.string() << "\n";
    return 0;
}

int run_sweep(const CommonFlags& flags) {
    const DatasetManifest manifest = DatasetManifest::load(flags.manifest);
    RunConfig config = build_config(flags);
    const SweepResult result = sweep(manifest, config);
    const fs::path dir = config.out_dir / "sweep";
    fs::create_directories(dir);
    std::ofstream(dir / "sweep.json") << result.to_json().dump(2) << "\n";
    std::ofstream(dir / "sweep.txt") << result.to_text();
    std::cout << result.to_text() << "reports: " << dir.string() << "\n";
    return 0;
}

int run_noise_report(const CommonFlags& flags) {
    const DatasetManifest manifest = DatasetManifest::load(flags.manifest);
    const NoiseSummary summary = noise_summary(manifest);
    if (!flags.out.empty()) {
        fs::create_directories(flags.out);
        std::ofstream(fs::path(flags.out) / "noise.json") << summary.to_json().dump(2) << "\n";
        std::ofstream(fs::path(flags.out) / "noise.txt") << summary.to_text();
    }
    std::cout << summary.to_text();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "edgeflow: flowchart image to Mermaid conversion with a deterministic edge-map "
        "structural prior, plus node/edge/path evaluation and paired statistics"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string tag_a = "edgeflow", tag_b = "baseline";
    bool within_pair_delta = false;

    CLI::App* cmd_convert = app.add_subcommand(
        "convert", "Generate Mermaid code for every manifest entry (per run, per condition)");
    add_common_flags(cmd_convert, flags, true);

    CLI::App* cmd_evaluate = app.add_subcommand(
        "evaluate", "Score persisted conversions against ground truth at node/edge/path level");
    add_common_flags(cmd_evaluate, flags, true);

    CLI::App* cmd_compare = app.add_subcommand(
        "compare",
        "Paired per-flowchart statistics (one-sided Wilcoxon, Cliff's delta, win/tie/loss) "
        "between two evaluated conditions");
    add_common_flags(cmd_compare, flags, true);
    cmd_compare->add_option("--condition-a", tag_a, "First condition tag (default edgeflow)");
    cmd_compare->add_option("--condition-b", tag_b, "Second condition tag (default baseline)");
    cmd_compare->add_flag("--delta-within-pair", within_pair_delta,
                          "Report Cliff's delta as within-pair dominance instead of the "
                          "default all-pairs form");

    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep",
        "Two-stage Canny parameter selection: thresholds at aperture 3, then apertures 5 and 7 "
        "on the stage-1 winner; ranked by micro node+edge F1, ties resolve to the "
        "earlier-evaluated (lower-index) configuration");
    add_common_flags(cmd_sweep, flags, true);

    CLI::App* cmd_noise = app.add_subcommand(
        "noise-report", "Dataset diagnostics: background noise sigma and color instability");
    add_common_flags(cmd_noise, flags, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_convert->parsed()) return run_convert(flags);
        if (cmd_evaluate->parsed()) return run_evaluate(flags);
        if (cmd_compare->parsed()) return run_compare(flags, tag_a, tag_b, within_pair_delta);
        if (cmd_sweep->parsed()) return run_sweep(flags);
        if (cmd_noise->parsed()) return run_noise_report(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
