// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run via ctest (test name "acceptance") or directly from the build
// directory; work files go to ./acceptance_work.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "chorusnet/analysis.hpp"
#include "chorusnet/engine.hpp"
#include "chorusnet/graph.hpp"
#include "chorusnet/melody.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/study.hpp"
#include "oracles.hpp"

using namespace chorusnet;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void within(double value, double lo, double hi, const std::string& what) {
        if (!(value >= lo && value <= hi)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s: %.6g outside [%.6g, %.6g]", what.c_str(), value,
                          lo, hi);
            failures.push_back(buf);
        }
    }
};

const fs::path kWorkDir = "acceptance_work";

StudyConfig default_study() {
    StudyConfig config;
    config.study_id = "reference_study";
    config.conditions = {Condition::full, Condition::no_selection, Condition::no_reproduction,
                         Condition::linear};
    TopologySpec lattice;
    lattice.kind = "lattice";
    TopologySpec rr;
    rr.kind = "random_regular";
    rr.seed = 1;
    TopologySpec modular;
    modular.kind = "modular";
    config.topologies = {lattice, rr, modular};
    config.iterations = 10;
    config.batches = 3;
    config.base_seed = 20250101;
    return config;
}

// --- criterion 1 -----------------------------------------------------------

void topology_exactness(Check& c) {
    const Graph lattice = make_lattice(7, 7);
    c.require(avg_path_length(lattice) == 3.5, "lattice path length must equal 3.5 exactly");
    c.within(mean_betweenness(lattice), 2.5 / 47.0 - 1e-9, 2.5 / 47.0 + 1e-9,
             "lattice mean betweenness vs 2.5/47");

    const Graph modular = make_modular(7, 7, 0);
    c.require(modular.n == 49, "modular node count");
    for (int v = 0; v < modular.n; ++v)
        c.require(modular.degree(v) == 4, "modular degree at node " + std::to_string(v));
    int cross = 0;
    for (const auto& [u, v] : modular.edges)
        if (u / 7 != v / 7) ++cross;
    c.require(cross == 7, "modular inter-clique edge count");
    c.within(avg_path_length(modular), 5.4, 6.4, "modular path length");

    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        sum += avg_path_length(make_random_regular(49, 4, seed));
    c.within(sum / 100.0, 2.74, 2.94, "random regular mean path length over 100 seeds");
}

// --- criterion 2 -----------------------------------------------------------

void betweenness_identity(Check& c) {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_index(16));
        const Graph g = oracles::random_connected_graph(n, n / 2, rng);
        const double L = avg_path_length(g);
        const double identity_gap =
            n > 2 ? std::abs(mean_betweenness(g) - (L - 1.0) / (n - 2)) : 0.0;
        c.require(identity_gap < 1e-9, "betweenness identity on random graph " + std::to_string(trial));

        const auto fast = betweenness_centrality(g);
        const auto slow = oracles::betweenness(g);
        for (int v = 0; v < n; ++v)
            c.require(std::abs(fast[v] - slow[v]) < 1e-9,
                      "per-node betweenness vs oracle, graph " + std::to_string(trial));
    }

    for (const Graph& g : {make_lattice(7, 7), make_random_regular(49, 4, 1), make_modular(7, 7, 0)}) {
        const double gap = std::abs(mean_betweenness(g) - (avg_path_length(g) - 1.0) / (g.n - 2));
        c.require(gap < 1e-9, "betweenness identity on topology " + g.kind);
    }
}

// --- criterion 3 -----------------------------------------------------------

void matched_noise_fidelity(Check& c) {
    Eigen::Matrix4d sigma0;
    sigma0 << 1.0, 0.3, 0.1, 0.0,
              0.3, 0.8, 0.2, 0.1,
              0.1, 0.2, 0.6, 0.2,
              0.0, 0.1, 0.2, 0.9;
    const Eigen::Matrix4d L = Eigen::LLT<Eigen::Matrix4d>(sigma0).matrixL();

    Rng rng(4242);
    std::vector<std::pair<Melody, Melody>> pairs;
    for (int i = 0; i < 10000; ++i) {
        const Melody target = random_melody(rng, -15, 15);
        Eigen::Vector4d z;
        for (int k = 0; k < 4; ++k) z[k] = rng.normal();
        const Eigen::Vector4d delta = L * z;
        IntervalVector iv = intervals(target);
        for (int k = 0; k < 4; ++k) iv[k] += delta[k];
        pairs.emplace_back(target, rebuild(target[0], iv));
    }
    const DeviationModel model = estimate_deviation_covariance(pairs);
    c.within((model.sigma - sigma0).norm() / sigma0.norm(), 0.0, 0.05,
             "estimated sigma relative Frobenius error");

    const Melody base = {0, 1, -1, 2, 0};
    const auto base_iv = intervals(base);
    Eigen::MatrixX4d deltas(10000, 4);
    for (int i = 0; i < 10000; ++i) {
        const Melody out = apply_matched_noise(base, model, rng);
        const auto iv = intervals(out);
        for (int k = 0; k < 4; ++k) deltas(i, k) = iv[k] - base_iv[k];
    }
    const Eigen::RowVector4d mean = deltas.colwise().mean();
    const Eigen::MatrixX4d centered = deltas.rowwise() - mean;
    const Eigen::Matrix4d emp = centered.transpose() * centered / (deltas.rows() - 1.0);
    c.within((emp - sigma0).norm() / sigma0.norm(), 0.0, 0.10,
             "matched-noise empirical covariance vs sigma0");
}

// --- criterion 4 -----------------------------------------------------------

void clustering_oracle(Check& c) {
    Rng rng(808);
    std::vector<Point2> blobs;
    std::vector<int> truth;
    for (int b = 0; b < 8; ++b) {
        const double angle = 2.0 * M_PI * b / 8;
        for (int i = 0; i < 100; ++i) {
            blobs.push_back({10.0 * std::cos(angle) + 0.5 * rng.normal(),
                             10.0 * std::sin(angle) + 0.5 * rng.normal()});
            truth.push_back(b);
        }
    }
    c.require(select_k(blobs, 2, 12, 77) == 8, "select_k on 8 separated blobs");

    std::vector<Point2> mixed(blobs.begin(), blobs.begin() + 300);
    std::vector<int> mixed_labels(truth.begin(), truth.begin() + 300);
    c.require(std::abs(silhouette(mixed, mixed_labels) -
                       oracles::silhouette(mixed, mixed_labels)) < 1e-9,
              "silhouette vs brute-force oracle at n = 300");

    // Objective monotonicity over a spread of k and seeds, including noisy data.
    std::vector<Point2> noisy;
    for (int i = 0; i < 500; ++i) noisy.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    for (int k = 2; k <= 12; ++k) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            for (const auto* data : {&blobs, &noisy}) {
                const auto fit = kmeans(*data, k, seed);
                for (std::size_t i = 1; i < fit.objective_history.size(); ++i)
                    c.require(fit.objective_history[i] <=
                                  fit.objective_history[i - 1] * (1 + 1e-12) + 1e-9,
                              "k-means objective increased (k=" + std::to_string(k) + ")");
            }
        }
    }
}

// --- criterion 5 -----------------------------------------------------------

void ablation_equivalence(Check& c) {
    ExperimentConfig full;
    full.condition = Condition::full;
    full.topology.kind = "lattice";
    full.iterations = 10;
    full.base_seed = 91;
    full.agent.scorer.kind = ScorerKind::uniform; // equal scores -> softmax is uniform

    ExperimentConfig ablation = full;
    ablation.condition = Condition::no_selection;
    ablation.agent = AgentConfig{}; // defaults; selection is forced uniform anyway

    std::vector<long> full_counts(5, 0), ablation_counts(5, 0);
    std::size_t trials = 0;
    for (int batch = 0; batch < 3; ++batch) {
        full.batch = ablation.batch = batch;
        for (const auto& rec : run_synchronous(full, batch_seed_for(full.base_seed, batch))) {
            full_counts[static_cast<std::size_t>(rec.selected)] += 1;
            ++trials;
        }
        for (const auto& rec : run_synchronous(ablation, batch_seed_for(ablation.base_seed, batch)))
            ablation_counts[static_cast<std::size_t>(rec.selected)] += 1;
    }
    c.require(trials >= 1470, "at least 1470 trials per arm");
    const double p = chi_square_homogeneity_p({full_counts, ablation_counts});
    c.within(p, 0.001, 1.0, "chi-square homogeneity p-value");
}

// --- criteria 6 + 7 share the default study run -----------------------------

struct StudyArtifacts {
    fs::path run_dir;
    std::map<std::string, std::vector<TrialRecord>> by_condition;
    AnalyzeResult analysis;
};

StudyArtifacts g_artifacts;

void study_i_directional(Check& c) {
    g_artifacts.run_dir = kWorkDir / "run_a";
    fs::remove_all(g_artifacts.run_dir);
    const StudyConfig config = default_study();
    run_study(config, g_artifacts.run_dir);

    const json manifest = json::parse(read_text_file(g_artifacts.run_dir / "manifest.json"));
    for (const auto& entry : manifest.at("logs")) {
        const auto file = entry.at("file").get<std::string>();
        const auto records =
            trial_log_from_jsonl(read_text_file(g_artifacts.run_dir / file), file);
        auto& bucket = g_artifacts.by_condition[entry.at("condition").get<std::string>()];
        bucket.insert(bucket.end(), records.begin(), records.end());
    }

    const Scorer scorer; // smoothness defaults
    const int burn_in = 3;
    const auto full = population_pleasantness(g_artifacts.by_condition.at("full"), scorer, burn_in);
    const auto linear =
        population_pleasantness(g_artifacts.by_condition.at("linear"), scorer, burn_in);
    const auto no_repro =
        population_pleasantness(g_artifacts.by_condition.at("no_reproduction"), scorer, burn_in);

    const auto half = [](const BootstrapCI& ci) {
        return std::max(ci.mean - ci.ci_lo, ci.ci_hi - ci.mean);
    };
    c.require(full.mean - linear.mean > std::max(half(full), half(linear)),
              "full vs linear pleasantness gap exceeds the wider CI half-width");
    c.require(full.mean - no_repro.mean > std::max(half(full), half(no_repro)),
              "full vs no_reproduction pleasantness gap exceeds the wider CI half-width");
}

void study_ii_iii_directional(Check& c) {
    if (g_artifacts.by_condition.empty()) {
        c.require(false, "study run unavailable (criterion 6 failed to run)");
        return;
    }
    AnalyzeOptions options;
    options.force_k = 8; // reference cluster count
    options.burn_in = 3;
    g_artifacts.analysis =
        analyze_run(g_artifacts.run_dir, g_artifacts.run_dir / "analysis", options);

    const auto deviations = metric_deviations(g_artifacts.analysis.metrics, options.burn_in);
    const auto& full_sim = deviations.at("full").at("neighbor_similarity");
    const double modular_dev = full_sim.at("modular").mean;
    c.require(modular_dev > 0.0, "modular similarity deviation positive in full condition");
    c.require(modular_dev > full_sim.at("lattice").mean &&
                  modular_dev > full_sim.at("random_regular").mean,
              "modular similarity deviation is the largest in full condition");

    const auto spread = [](const std::map<std::string, DeviationSummary>& per_topo) {
        double lo = 1e18, hi = -1e18;
        for (const auto& [topo, dev] : per_topo) {
            lo = std::min(lo, dev.mean);
            hi = std::max(hi, dev.mean);
        }
        return hi - lo;
    };
    const double full_spread = spread(full_sim);
    const double no_sel_spread = spread(deviations.at("no_selection").at("neighbor_similarity"));
    const double no_rep_spread = spread(deviations.at("no_reproduction").at("neighbor_similarity"));
    char detail[128];
    std::snprintf(detail, sizeof(detail), "no_selection spread ratio %.2f exceeds 0.60 (%.3f vs full %.3f)",
                  no_sel_spread / full_spread, no_sel_spread, full_spread);
    c.require(no_sel_spread <= 0.6 * full_spread, detail);
    std::snprintf(detail, sizeof(detail), "no_reproduction spread ratio %.2f exceeds 0.60 (%.3f vs full %.3f)",
                  no_rep_spread / full_spread, no_rep_spread, full_spread);
    c.require(no_rep_spread <= 0.6 * full_spread, detail);
}

// --- criterion 8 -----------------------------------------------------------

void determinism(Check& c) {
    if (g_artifacts.by_condition.empty()) {
        c.require(false, "study run unavailable (criterion 6 failed to run)");
        return;
    }
    const StudyConfig config = default_study();
    const fs::path run_b = kWorkDir / "run_b";
    fs::remove_all(run_b);
    const RunResult b = run_study(config, run_b);

    const json manifest_a = json::parse(read_text_file(g_artifacts.run_dir / "manifest.json"));
    const json manifest_b = json::parse(read_text_file(run_b / "manifest.json"));
    c.require(manifest_a == manifest_b, "manifests identical across reruns");
    for (const auto& entry : manifest_a.at("logs")) {
        const auto file = entry.at("file").get<std::string>();
        c.require(read_text_file(g_artifacts.run_dir / file) == read_text_file(run_b / file),
                  "log bytes identical: " + file);
    }

    AnalyzeOptions options;
    options.force_k = 8;
    options.burn_in = 3;
    const AnalyzeResult analysis_b = analyze_run(run_b, run_b / "analysis", options);
    c.require(read_text_file(g_artifacts.analysis.metrics_csv) ==
                  read_text_file(analysis_b.metrics_csv),
              "metrics CSV bytes identical");
    c.require(read_text_file(g_artifacts.analysis.model_json) ==
                  read_text_file(analysis_b.model_json),
              "cluster model bytes identical");

    const auto svgs_a = write_report(g_artifacts.analysis.metrics, kWorkDir / "plots_a", 3);
    const auto svgs_b = write_report(analysis_b.metrics, kWorkDir / "plots_b", 3);
    c.require(svgs_a.size() == svgs_b.size() && svgs_a.size() == 12,
              "three charts per condition");
    for (std::size_t i = 0; i < svgs_a.size(); ++i)
        c.require(read_text_file(svgs_a[i]) == read_text_file(svgs_b[i]),
                  "SVG bytes identical: " + svgs_a[i].filename().string());
}

} // namespace

int main() {
    struct Criterion {
        std::string name;
        double budget_seconds;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"topology-exactness", 5.0, topology_exactness},
        {"betweenness-identity", 10.0, betweenness_identity},
        {"matched-noise-fidelity", 5.0, matched_noise_fidelity},
        {"clustering-oracle", 30.0, clustering_oracle},
        {"ablation-equivalence", 0.0, ablation_equivalence},
        {"study-i-directional", 60.0, study_i_directional},
        {"study-ii-iii-directional", 120.0, study_ii_iii_directional},
        {"determinism", 0.0, determinism},
    };

    fs::create_directories(kWorkDir);
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& criterion = criteria[i];
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds)
            check.failures.push_back("runtime " + std::to_string(seconds) + "s exceeds budget");

        std::printf("[%zu/%zu] %s %-26s (%.2fs)\n", i + 1, criteria.size(),
                    check.failures.empty() ? "PASS" : "FAIL", criterion.name.c_str(), seconds);
        for (const auto& f : check.failures) std::printf("        - %s\n", f.c_str());
        if (!check.failures.empty()) ++failed;
    }
    if (failed) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
