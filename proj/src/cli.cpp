#include "chorusnet/cli.hpp"

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chorusnet/errors.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/study.hpp"

namespace chorusnet {

namespace {

namespace fs = std::filesystem;

int cmd_topology(const TopologySpec& spec, const fs::path& out_path) {
    const Graph g = make_topology(spec);
    write_text_file(out_path, graph_to_json(g).dump(2) + "\n");

    json metrics;
    if (is_connected(g)) {
        const auto m = topology_metrics(g);
        metrics = {{"avg_path_length", m.avg_path_length}, {"mean_betweenness", m.mean_betweenness}};
    } else {
        metrics = {{"avg_path_length", nullptr}, {"mean_betweenness", nullptr}};
    }
    json out = {{"file", out_path.string()}, {"n", g.n}, {"kind", g.kind}, {"metrics", metrics}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir) {
    const StudyConfig config = study_config_from_file(config_path);
    const RunResult result = run_study(config, out_dir);
    std::cout << "wrote " << result.log_hashes.size() << " logs under " << out_dir.string() << "\n"
              << "manifest: " << result.manifest_path.string() << "\n";
    return 0;
}

int cmd_analyze(const fs::path& run_dir, const fs::path& out_dir, const AnalyzeOptions& options) {
    const AnalyzeResult result = analyze_run(run_dir, out_dir, options);
    std::cout << "k: " << result.model.k << "\n"
              << "metrics: " << result.metrics_csv.string() << "\n"
              << "model: " << result.model_json.string() << "\n"
              << "summary: " << result.summary_json.string() << "\n";
    return 0;
}

int cmd_report(const fs::path& metrics_path, const fs::path& out_dir, int burn_in) {
    const auto metrics = metrics_from_csv(read_text_file(metrics_path));
    const auto written = write_report(metrics, out_dir, burn_in);
    for (const auto& p : written) std::cout << p.string() << "\n";
    return 0;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Networked melody-transmission simulator and analysis toolkit"};
    app.require_subcommand(1);

    // topology
    TopologySpec spec;
    std::string topology_out;
    auto* topology = app.add_subcommand("topology", "Generate a topology file and print its metrics");
    topology->add_option("--kind", spec.kind, "lattice | random_regular | modular | disconnected")
        ->required();
    topology->add_option("--rows", spec.rows, "lattice rows");
    topology->add_option("--cols", spec.cols, "lattice cols");
    topology->add_option("--n", spec.n, "node count (random_regular, disconnected)");
    topology->add_option("--degree", spec.degree, "degree (random_regular)");
    topology->add_option("--cliques", spec.cliques, "clique count (modular)");
    topology->add_option("--size", spec.clique_size, "clique size (modular)");
    topology->add_option("--seed", spec.seed, "construction seed");
    topology->add_option("--out", topology_out, "output file (default <kind>.json)");

    // run
    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "Execute a study config; write logs and a manifest");
    run->add_option("--config", run_config, "study config JSON")->required();
    run->add_option("--out", run_out, "output directory")->required();

    // analyze
    std::string analyze_run_dir, analyze_out, scorer_name, scorer_table;
    AnalyzeOptions options;
    int force_k = 0;
    auto* analyze = app.add_subcommand("analyze", "Fit the cluster model and write the metrics table");
    analyze->add_option("--run", analyze_run_dir, "run directory (with manifest.json)")->required();
    analyze->add_option("--out", analyze_out, "output directory (default <run>/analysis)");
    analyze->add_option("--force-k", force_k, "fix the cluster count instead of selecting by silhouette");
    analyze->add_option("--k-min", options.k_min, "smallest k tried");
    analyze->add_option("--k-max", options.k_max, "largest k tried");
    analyze->add_option("--burn-in", options.burn_in, "iterations excluded from aggregates (default 3)");
    analyze->add_option("--scorer", scorer_name, "override scorer: smoothness | uniform");
    analyze->add_option("--scorer-table", scorer_table, "override scorer with a table file");

    // report
    std::string report_metrics, report_out;
    int report_burn_in = 3;
    auto* report = app.add_subcommand("report", "Render SVG charts from a metrics CSV");
    report->add_option("--metrics", report_metrics, "metrics CSV path")->required();
    report->add_option("--out", report_out, "output directory")->required();
    report->add_option("--burn-in", report_burn_in, "burn-in for deviation charts (default 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (topology->parsed()) {
            const fs::path out = topology_out.empty() ? fs::path(spec.kind + ".json")
                                                      : fs::path(topology_out);
            return cmd_topology(spec, out);
        }
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (analyze->parsed()) {
            if (force_k > 0) options.force_k = force_k;
            if (!scorer_name.empty() && !scorer_table.empty())
                throw ParameterError("--scorer and --scorer-table are mutually exclusive");
            if (scorer_name == "smoothness") {
                options.scorer = Scorer{};
            } else if (scorer_name == "uniform") {
                Scorer s;
                s.kind = ScorerKind::uniform;
                options.scorer = s;
            } else if (!scorer_name.empty())
                throw ParameterError("unknown scorer override '" + scorer_name + "'");
            if (!scorer_table.empty()) options.scorer = table_scorer_from_file(scorer_table);
            const fs::path out = analyze_out.empty() ? fs::path(analyze_run_dir) / "analysis"
                                                     : fs::path(analyze_out);
            return cmd_analyze(analyze_run_dir, out, options);
        }
        if (report->parsed()) return cmd_report(report_metrics, report_out, report_burn_in);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace chorusnet
