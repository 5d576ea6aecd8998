#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "chorusnet/cli.hpp"
#include "chorusnet/errors.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/study.hpp"

using namespace chorusnet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "chorusnet_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

StudyConfig small_study() {
    StudyConfig config;
    config.study_id = "small";
    config.conditions = {Condition::full, Condition::no_selection, Condition::no_reproduction,
                         Condition::linear};
    TopologySpec lattice;
    lattice.kind = "lattice";
    TopologySpec modular;
    modular.kind = "modular";
    config.topologies = {lattice, modular};
    config.iterations = 4;
    config.batches = 2;
    config.base_seed = 555;
    return config;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"chorusnet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("study cell expansion counts") {
    const StudyConfig config = small_study();
    const auto cells = study_cells(config);
    // 3 networked conditions x 2 topologies x 2 batches + linear x 2 batches.
    CHECK(cells.size() == 3u * 2u * 2u + 2u);

    StudyConfig larger = config;
    TopologySpec rr;
    rr.kind = "random_regular";
    rr.seed = 1;
    larger.topologies.push_back(rr);
    larger.batches = 3;
    CHECK(study_cells(larger).size() == 3u * 3u * 3u + 3u);
}

TEST_CASE("run_study writes deterministic logs, topologies and a manifest") {
    const StudyConfig config = small_study();
    const fs::path dir_a = fresh_dir("run_a");
    const fs::path dir_b = fresh_dir("run_b");

    const RunResult a = run_study(config, dir_a);
    const RunResult b = run_study(config, dir_b);
    CHECK(a.log_hashes == b.log_hashes);
    CHECK(read_text_file(dir_a / "manifest.json") == read_text_file(dir_b / "manifest.json"));

    CHECK(fs::exists(dir_a / "topologies" / "lattice.json"));
    CHECK(fs::exists(dir_a / "topologies" / "modular.json"));
    CHECK(fs::exists(dir_a / "topologies" / "disconnected.json"));
    CHECK(fs::exists(dir_a / "deviation_model.json"));

    // Expected record counts: 49 nodes x 4 iterations per cell.
    const json manifest = json::parse(read_text_file(dir_a / "manifest.json"));
    for (const auto& entry : manifest.at("logs"))
        CHECK(entry.at("records").get<int>() == 49 * 4);
    CHECK(manifest.at("logs").size() == a.log_hashes.size());

    // The estimated deviation model came from the full condition.
    const json dev = json::parse(read_text_file(dir_a / "deviation_model.json"));
    CHECK(dev.at("sample_count").get<int>() == 2 * 2 * 49 * 4); // full-condition cells x records
}

TEST_CASE("no_reproduction without a full condition requires an explicit model") {
    StudyConfig config = small_study();
    config.conditions = {Condition::no_reproduction};
    CHECK_THROWS_AS(validate_study_config(config), ParameterError);

    // Providing a model file makes the same config valid.
    const fs::path dir = fresh_dir("dev_model");
    DeviationModel model;
    model.sigma = Eigen::Matrix4d::Identity() * 0.5;
    write_text_file(dir / "model.json", deviation_model_to_json(model).dump());
    config.deviation_model_path = dir / "model.json";
    CHECK_NOTHROW(validate_study_config(config));
    const RunResult result = run_study(config, dir / "out");
    CHECK(result.log_hashes.size() == 2u * 2u);
}

TEST_CASE("analyze_run produces metrics, model and summary") {
    const StudyConfig config = small_study();
    const fs::path run_dir = fresh_dir("analyze_run");
    run_study(config, run_dir);

    AnalyzeOptions options;
    options.force_k = 4;
    options.burn_in = 2;
    const AnalyzeResult result = analyze_run(run_dir, run_dir / "analysis", options);

    CHECK(result.model.k == 4);
    // One row per (cell, iteration 0..T).
    const auto cells = study_cells(config);
    CHECK(result.metrics.size() == cells.size() * 5u);

    for (const auto& row : result.metrics) {
        double sum = 0.0;
        for (double p : row.prevalence) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        if (row.condition == "linear") CHECK_FALSE(row.neighbor_similarity.has_value());
        else CHECK(row.neighbor_similarity.has_value());
    }

    const auto parsed = metrics_from_csv(read_text_file(result.metrics_csv));
    CHECK(parsed.size() == result.metrics.size());

    const json summary = json::parse(read_text_file(result.summary_json));
    CHECK(summary.at("k").get<int>() == 4);
    CHECK(summary.at("conditions").contains("full"));
    CHECK(summary.at("conditions").at("full").contains("pleasantness"));
    // Deviations across topologies sum to zero for every condition metric.
    for (const auto& [cond, entry] : summary.at("conditions").items()) {
        if (!entry.contains("deviations")) continue;
        for (const auto& [metric, topos] : entry.at("deviations").items()) {
            double sum = 0.0;
            for (const auto& [topo, dev] : topos.items()) sum += dev.at("mean").get<double>();
            CHECK(std::abs(sum) < 1e-9);
        }
    }

    const ClusterModel model =
        cluster_model_from_json(json::parse(read_text_file(result.model_json)));
    CHECK(model.k == 4);

    CHECK_THROWS_AS(analyze_run(run_dir, run_dir / "x", AnalyzeOptions{.burn_in = 99}),
                    ParameterError);
}

TEST_CASE("prevalence trajectory and population pleasantness over a real log") {
    StudyConfig config = small_study();
    config.conditions = {Condition::full};
    config.topologies.resize(1); // lattice only
    const fs::path run_dir = fresh_dir("prevalence");
    run_study(config, run_dir);

    const json manifest = json::parse(read_text_file(run_dir / "manifest.json"));
    std::vector<TrialRecord> records;
    for (const auto& entry : manifest.at("logs")) {
        const auto file = entry.at("file").get<std::string>();
        const auto part = trial_log_from_jsonl(read_text_file(run_dir / file), file);
        records.insert(records.end(), part.begin(), part.end());
    }

    std::vector<Melody> pooled;
    for (const auto& rec : records) pooled.push_back(rec.produced);
    const ClusterModel model = fit_cluster_model(pooled, 9, 4);

    const auto trajectory = prevalence_trajectory(records, model);
    CHECK(trajectory.count(0) == 1);        // iteration 0 from initial melodies
    CHECK(trajectory.size() == 5);          // iterations 0..4
    for (const auto& [iteration, p] : trajectory) {
        double sum = 0.0;
        for (double v : p) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    const Scorer scorer;
    const auto ci = population_pleasantness(records, scorer, 2);
    CHECK(ci.ci_lo <= ci.mean);
    CHECK(ci.mean <= ci.ci_hi);
    CHECK_THROWS_AS(population_pleasantness(records, scorer, 4), DataError);

    // Uniform scorer means zero pleasantness everywhere.
    Scorer uniform;
    uniform.kind = ScorerKind::uniform;
    const auto zero = population_pleasantness(records, uniform, 2);
    CHECK(zero.mean == 0.0);
    CHECK(zero.ci_hi == 0.0);
}

TEST_CASE("degenerate populations: one-hot prevalence and zero-width pleasantness CI") {
    Rng rng(7);
    const auto pool = [&] {
        std::vector<Melody> out;
        for (int i = 0; i < 200; ++i) out.push_back(random_melody(rng, -15, 15));
        return out;
    }();
    const ClusterModel model = fit_cluster_model(pool, 5, 4);

    // Every node produces the same melody at every iteration.
    const Melody fixed = {0, 2, 4, 5, 7};
    std::vector<TrialRecord> log;
    for (int t = 1; t <= 3; ++t) {
        for (int v = 0; v < 5; ++v) {
            TrialRecord rec;
            rec.topology = "disconnected";
            rec.condition = Condition::linear;
            rec.iteration = t;
            rec.node = v;
            rec.candidates = {{v, fixed}};
            rec.selected = 0;
            rec.produced = fixed;
            log.push_back(rec);
        }
    }

    const auto trajectory = prevalence_trajectory(log, model);
    const int label = model.assign(fixed);
    for (const auto& [iteration, p] : trajectory) {
        for (int c = 0; c < model.k; ++c)
            CHECK(p[static_cast<std::size_t>(c)] == (c == label ? 1.0 : 0.0));
    }

    const Scorer scorer;
    const auto ci = population_pleasantness(log, scorer, 0);
    CHECK(ci.mean == doctest::Approx(score(scorer, fixed)));
    CHECK(ci.ci_hi - ci.ci_lo == 0.0);
}

TEST_CASE("iteration-0 prevalence approximates the model's base rates") {
    Rng rng(100);
    std::vector<Melody> sample;
    for (int i = 0; i < 10000; ++i) sample.push_back(random_melody(rng, -15, 15));
    const ClusterModel model = fit_cluster_model(sample, 3, 4);

    std::vector<double> base(4, 0.0);
    for (const auto& m : sample) base[static_cast<std::size_t>(model.assign(m))] += 1e-4;

    std::vector<double> fresh(4, 0.0);
    for (int i = 0; i < 10000; ++i)
        fresh[static_cast<std::size_t>(model.assign(random_melody(rng, -15, 15)))] += 1e-4;
    for (int c = 0; c < 4; ++c) CHECK(std::abs(base[c] - fresh[c]) < 0.02);
}

TEST_CASE("report writes three deterministic SVGs per condition") {
    StudyConfig config = small_study();
    config.conditions = {Condition::full};
    const fs::path run_dir = fresh_dir("report");
    run_study(config, run_dir);
    AnalyzeOptions options;
    options.force_k = 4;
    options.burn_in = 2;
    const AnalyzeResult analysis = analyze_run(run_dir, run_dir / "analysis", options);

    const auto files = write_report(analysis.metrics, run_dir / "plots", 2);
    CHECK(files.size() == 3);
    for (const auto& f : files) {
        CHECK(fs::exists(f));
        const std::string body = read_text_file(f);
        CHECK(body.rfind("<svg", 0) == 0);
    }

    const auto again = write_report(analysis.metrics, run_dir / "plots2", 2);
    for (std::size_t i = 0; i < files.size(); ++i)
        CHECK(read_text_file(files[i]) == read_text_file(again[i]));
}

TEST_CASE("shipped default study config matches the canonical parameters") {
    const fs::path path = fs::path(CHORUSNET_SOURCE_DIR) / "configs" / "default_study.json";
    const StudyConfig config = study_config_from_file(path);
    CHECK(config.conditions.size() == 4);
    CHECK(config.topologies.size() == 3);
    CHECK(config.iterations == 10);
    CHECK(config.batches == 3);
    CHECK(config.base_seed == 20250101);
    CHECK(config.mode == RunMode::synchronous);
    CHECK(config.agent.scorer.kind == ScorerKind::smoothness);
    CHECK(config.agent.selection.temperature == 1.0);
    CHECK(config.agent.reproduction.sigma == 0.75);
    CHECK(study_cells(config).size() == 30);
}

TEST_CASE("cli drives the full pipeline") {
    const fs::path dir = fresh_dir("cli");

    CHECK(run_cli({"topology", "--kind", "lattice", "--rows", "7", "--cols", "7", "--out",
                   (dir / "lattice.json").string()}) == 0);
    const Graph g = graph_from_json(json::parse(read_text_file(dir / "lattice.json")));
    CHECK(g.n == 49);
    CHECK(avg_path_length(g) == 3.5);

    CHECK(run_cli({"topology", "--kind", "bogus"}) == 2);
    CHECK(run_cli({"topology", "--kind", "lattice", "--rows", "1", "--cols", "7", "--out",
                   (dir / "bad.json").string()}) == 2);
    CHECK(run_cli({"nonsense"}) == 2);

    StudyConfig config = small_study();
    write_text_file(dir / "study.json", study_config_to_json(config).dump(2));
    CHECK(run_cli({"run", "--config", (dir / "study.json").string(), "--out",
                   (dir / "out").string()}) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));

    CHECK(run_cli({"analyze", "--run", (dir / "out").string(), "--force-k", "4", "--burn-in",
                   "2"}) == 0);
    CHECK(fs::exists(dir / "out" / "analysis" / "metrics.csv"));
    CHECK(fs::exists(dir / "out" / "analysis" / "cluster_model.json"));

    // Scorer overrides: uniform zeroes the pleasantness column.
    CHECK(run_cli({"analyze", "--run", (dir / "out").string(), "--out",
                   (dir / "an_uniform").string(), "--force-k", "4", "--burn-in", "2", "--scorer",
                   "uniform"}) == 0);
    for (const auto& row : metrics_from_csv(read_text_file(dir / "an_uniform" / "metrics.csv")))
        CHECK(row.pleasantness == 0.0);

    CHECK(run_cli({"report", "--metrics", (dir / "out" / "analysis" / "metrics.csv").string(),
                   "--out", (dir / "plots").string(), "--burn-in", "2"}) == 0);
    // 4 conditions x 3 charts.
    std::size_t svg_count = 0;
    for (const auto& entry : fs::directory_iterator(dir / "plots"))
        if (entry.path().extension() == ".svg") ++svg_count;
    CHECK(svg_count == 12);

    // Missing config file surfaces as a usage-class error.
    CHECK(run_cli({"run", "--config", (dir / "missing.json").string(), "--out",
                   (dir / "out2").string()}) != 0);

    // An empty CSV body errors out before any chart file is written.
    const fs::path empty_csv = dir / "empty.csv";
    write_text_file(empty_csv, "batch,condition,topology,iteration,entropy,neighbor_similarity,"
                               "pleasantness,prevalence_0\n");
    CHECK(run_cli({"report", "--metrics", empty_csv.string(), "--out",
                   (dir / "plots_empty").string()}) == 1);
    CHECK_FALSE(fs::exists(dir / "plots_empty"));

    // Corrupt log line reported with its line number.
    const fs::path log_file = dir / "out" / "logs" / "full_lattice_b0.jsonl";
    std::string log_text = read_text_file(log_file);
    write_text_file(log_file, "garbage\n" + log_text);
    try {
        analyze_run(dir / "out", dir / "out" / "analysis2", AnalyzeOptions{.force_k = 4, .burn_in = 2});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":1") != std::string::npos);
    }
}
