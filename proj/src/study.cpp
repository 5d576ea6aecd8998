#include "chorusnet/study.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include "chorusnet/errors.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/sha256.hpp"
#include "chorusnet/svg.hpp"

namespace chorusnet {

namespace {

namespace fs = std::filesystem;

bool is_networked(Condition c) { return c != Condition::linear; }

int expected_node_count(const TopologySpec& spec) {
    if (spec.kind == "lattice") return spec.rows * spec.cols;
    if (spec.kind == "random_regular") return spec.n;
    if (spec.kind == "modular") return spec.cliques * spec.clique_size;
    if (spec.kind == "disconnected") return spec.n;
    throw ParameterError("unknown topology kind '" + spec.kind + "'");
}

int worker_count(std::size_t jobs) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CHORUSNET_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || v < 1) throw ParameterError("CHORUSNET_THREADS must be a positive integer");
        n = static_cast<int>(v);
    }
    n = std::max(1, n);
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), jobs));
}

// Runs one job per cell on a small worker pool; results land in slot order,
// so downstream output is independent of scheduling.
std::vector<std::vector<TrialRecord>> run_cells(const StudyConfig& config,
                                                const std::vector<StudyCell>& cells,
                                                const std::optional<DeviationModel>& deviation) {
    std::vector<std::vector<TrialRecord>> results(cells.size());
    if (cells.empty()) return results;

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) break;
            try {
                const StudyCell& cell = cells[i];
                ExperimentConfig ec;
                ec.condition = cell.condition;
                ec.topology = cell.topology;
                ec.iterations = config.iterations;
                ec.batch = cell.batch;
                ec.base_seed = config.base_seed;
                ec.agent = config.agent;
                ec.mode = config.mode;
                ec.participants = config.participants;
                ec.trials_per_participant = config.trials_per_participant;
                if (cell.condition == Condition::no_reproduction) {
                    ec.agent.reproduction.kind = ReproductionKind::matched_noise;
                    ec.agent.reproduction.deviation = deviation;
                }
                results[i] = run_experiment(ec, batch_seed_for(config.base_seed, cell.batch));
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!failed.exchange(true)) {
                    try {
                        throw;
                    } catch (const std::exception& e) {
                        first_error = e.what();
                    }
                }
            }
        }
    };

    const int workers = worker_count(cells.size());
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failed.load()) throw Error("study cell failed: " + first_error);
    return results;
}

} // namespace

std::string StudyCell::log_name() const {
    return to_string(condition) + "_" + topology.kind + "_b" + std::to_string(batch) + ".jsonl";
}

std::vector<StudyCell> study_cells(const StudyConfig& config) {
    std::vector<StudyCell> cells;
    int linear_n = config.linear_nodes;
    if (!config.topologies.empty()) linear_n = expected_node_count(config.topologies.front());

    for (Condition c : config.conditions) {
        if (is_networked(c)) {
            for (const auto& topo : config.topologies)
                for (int b = 0; b < config.batches; ++b) cells.push_back({c, topo, b});
        } else {
            TopologySpec spec;
            spec.kind = "disconnected";
            spec.n = linear_n;
            for (int b = 0; b < config.batches; ++b) cells.push_back({c, spec, b});
        }
    }
    return cells;
}

void validate_study_config(const StudyConfig& config) {
    if (config.conditions.empty()) throw ParameterError("study config: 'conditions' is empty");
    if (config.iterations < 1) throw ParameterError("study config: 'iterations' must be >= 1");
    if (config.batches < 1) throw ParameterError("study config: 'batches' must be >= 1");
    if (config.participants < 1) throw ParameterError("study config: 'participants' must be >= 1");
    if (config.trials_per_participant < 1)
        throw ParameterError("study config: 'trials_per_participant' must be >= 1");

    const bool has_networked = std::any_of(config.conditions.begin(), config.conditions.end(),
                                           is_networked);
    if (has_networked && config.topologies.empty())
        throw ParameterError("study config: networked conditions need at least one topology");

    std::set<std::string> kinds;
    for (const auto& t : config.topologies) {
        if (!kinds.insert(t.kind).second)
            throw ParameterError("study config: duplicate topology kind '" + t.kind +
                                 "' (cells are keyed by kind)");
        if (t.kind == "disconnected")
            throw ParameterError("study config: 'disconnected' is reserved for the linear condition");
    }
    if (!config.topologies.empty()) {
        const int n0 = expected_node_count(config.topologies.front());
        for (const auto& t : config.topologies)
            if (expected_node_count(t) != n0)
                throw ParameterError("study config: topologies must have equal node counts");
    }

    const bool wants_no_repro = std::any_of(config.conditions.begin(), config.conditions.end(),
                                            [](Condition c) { return c == Condition::no_reproduction; });
    const bool has_full = std::any_of(config.conditions.begin(), config.conditions.end(),
                                      [](Condition c) { return c == Condition::full; });
    if (wants_no_repro && !has_full && !config.deviation_model_path &&
        config.agent.reproduction.kind != ReproductionKind::matched_noise)
        throw ParameterError("study config: no_reproduction needs a 'deviation_model' file or a "
                             "full condition to estimate one from");
}

DeviationModel deviation_model_from_records(const std::vector<TrialRecord>& records) {
    std::vector<std::pair<Melody, Melody>> pairs;
    pairs.reserve(records.size());
    for (const auto& rec : records)
        pairs.emplace_back(rec.candidates[static_cast<std::size_t>(rec.selected)].melody,
                           rec.produced);
    return estimate_deviation_covariance(pairs);
}

RunResult run_study(const StudyConfig& config, const fs::path& out_dir) {
    validate_study_config(config);
    fs::create_directories(out_dir / "logs");
    fs::create_directories(out_dir / "topologies");

    const auto cells = study_cells(config);

    // Realize every distinct topology once and persist it.
    std::map<std::string, Graph> graphs;
    for (const auto& cell : cells)
        if (!graphs.count(cell.topology.kind)) graphs.emplace(cell.topology.kind, make_topology(cell.topology));

    json manifest_topologies = json::object();
    for (const auto& [kind, graph] : graphs) {
        const fs::path rel = fs::path("topologies") / (kind + ".json");
        const std::string payload = graph_to_json(graph).dump(2) + "\n";
        write_text_file(out_dir / rel, payload);
        manifest_topologies[kind] = {{"file", rel.string()}, {"sha256", sha256_hex(payload)}};
    }

    // Phase 1: everything except no_reproduction, which may need a deviation
    // model estimated from the full-condition logs.
    std::vector<StudyCell> phase1, phase2;
    for (const auto& cell : cells)
        (cell.condition == Condition::no_reproduction ? phase2 : phase1).push_back(cell);

    auto phase1_results = run_cells(config, phase1, std::nullopt);

    std::optional<DeviationModel> deviation;
    json manifest_deviation;
    if (!phase2.empty() || config.deviation_model_path) {
        std::string source;
        if (config.deviation_model_path) {
            deviation = deviation_model_from_json(
                json::parse(read_text_file(*config.deviation_model_path)));
            source = "provided";
        } else if (config.agent.reproduction.kind == ReproductionKind::matched_noise &&
                   config.agent.reproduction.deviation) {
            deviation = config.agent.reproduction.deviation;
            source = "agent_config";
        } else {
            std::vector<TrialRecord> full_records;
            for (std::size_t i = 0; i < phase1.size(); ++i)
                if (phase1[i].condition == Condition::full)
                    full_records.insert(full_records.end(), phase1_results[i].begin(),
                                        phase1_results[i].end());
            if (full_records.empty())
                throw ParameterError("no full-condition records to estimate the deviation model from");
            deviation = deviation_model_from_records(full_records);
            source = "estimated";
        }
        const std::string payload = deviation_model_to_json(*deviation).dump(2) + "\n";
        write_text_file(out_dir / "deviation_model.json", payload);
        manifest_deviation = {{"file", "deviation_model.json"},
                              {"sha256", sha256_hex(payload)},
                              {"source", source}};
    }

    auto phase2_results = run_cells(config, phase2, deviation);

    // Logs are written in the cell order of the config, not completion order.
    RunResult result;
    json manifest_logs = json::array();
    std::size_t i1 = 0, i2 = 0;
    for (const auto& cell : cells) {
        const std::vector<TrialRecord>& records =
            cell.condition == Condition::no_reproduction ? phase2_results[i2++] : phase1_results[i1++];
        const fs::path rel = fs::path("logs") / cell.log_name();
        const std::string payload = trial_log_to_jsonl(records);
        write_text_file(out_dir / rel, payload);
        const std::string digest = sha256_hex(payload);
        result.log_hashes[cell.log_name()] = digest;
        manifest_logs.push_back({{"file", rel.string()},
                                 {"condition", to_string(cell.condition)},
                                 {"topology", cell.topology.kind},
                                 {"batch", cell.batch},
                                 {"records", records.size()},
                                 {"sha256", digest}});
    }

    json manifest = {{"study_id", config.study_id},
                     {"config", study_config_to_json(config)},
                     {"topologies", manifest_topologies},
                     {"logs", manifest_logs}};
    manifest["deviation_model"] = manifest_deviation.is_null() ? json() : manifest_deviation;
    const std::string payload = manifest.dump(2) + "\n";
    result.manifest_path = out_dir / "manifest.json";
    write_text_file(result.manifest_path, payload);
    return result;
}

AnalyzeResult analyze_run(const fs::path& run_dir, const fs::path& out_dir,
                          const AnalyzeOptions& options) {
    const json manifest = json::parse(read_text_file(run_dir / "manifest.json"));
    const StudyConfig config = study_config_from_json(manifest.at("config"), run_dir);
    if (options.burn_in < 0 || options.burn_in >= config.iterations)
        throw ParameterError("burn-in must be in [0, iterations)");

    std::map<std::string, Graph> graphs;
    for (const auto& [kind, entry] : manifest.at("topologies").items())
        graphs.emplace(kind, graph_from_json(json::parse(
                                 read_text_file(run_dir / entry.at("file").get<std::string>()))));

    struct CellLog {
        std::string condition;
        std::string topology;
        int batch;
        std::vector<TrialRecord> records;
    };
    std::vector<CellLog> cell_logs;
    for (const auto& entry : manifest.at("logs")) {
        CellLog cl;
        cl.condition = entry.at("condition").get<std::string>();
        cl.topology = entry.at("topology").get<std::string>();
        cl.batch = entry.at("batch").get<int>();
        const auto file = entry.at("file").get<std::string>();
        cl.records = trial_log_from_jsonl(read_text_file(run_dir / file), file);
        if (cl.records.empty()) throw DataError("log has no records: " + file);
        cell_logs.push_back(std::move(cl));
    }
    if (cell_logs.empty()) throw DataError("manifest lists no logs");

    // Pool every production across conditions, topologies and batches.
    std::vector<Melody> pooled;
    for (const auto& cl : cell_logs)
        for (const auto& rec : cl.records) pooled.push_back(rec.produced);

    const std::uint64_t fit_seed = seed_combine(config.base_seed, "analysis");
    AnalyzeResult result;
    result.model =
        fit_cluster_model(pooled, fit_seed, options.force_k, options.k_min, options.k_max);

    const Scorer scorer = options.scorer.value_or(config.agent.scorer);
    for (const auto& cl : cell_logs) {
        const auto rows = metrics_for_cell(cl.records, graphs.at(cl.topology), result.model, scorer);
        result.metrics.insert(result.metrics.end(), rows.begin(), rows.end());
    }

    fs::create_directories(out_dir);
    result.metrics_csv = out_dir / "metrics.csv";
    write_text_file(result.metrics_csv, metrics_to_csv(result.metrics));
    result.model_json = out_dir / "cluster_model.json";
    write_text_file(result.model_json, cluster_model_to_json(result.model).dump(2) + "\n");

    // Summary: per-condition pleasantness plus relative deviations.
    json summary = {{"burn_in", options.burn_in}, {"k", result.model.k}};
    json per_condition = json::object();
    std::set<std::string> conditions;
    for (const auto& cl : cell_logs) conditions.insert(cl.condition);
    for (const auto& cond : conditions) {
        std::vector<TrialRecord> cond_records;
        for (const auto& cl : cell_logs)
            if (cl.condition == cond)
                cond_records.insert(cond_records.end(), cl.records.begin(), cl.records.end());
        const auto ci = population_pleasantness(cond_records, scorer, options.burn_in);
        per_condition[cond] = {
            {"pleasantness", {{"mean", ci.mean}, {"ci_lo", ci.ci_lo}, {"ci_hi", ci.ci_hi}}}};
    }
    const auto deviations = metric_deviations(result.metrics, options.burn_in);
    for (const auto& [cond, by_metric] : deviations) {
        json metrics_json = json::object();
        for (const auto& [metric, per_topo] : by_metric) {
            json topo_json = json::object();
            for (const auto& [topo, dev] : per_topo)
                topo_json[topo] = {{"mean", dev.mean}, {"ci_lo", dev.ci_lo}, {"ci_hi", dev.ci_hi}};
            metrics_json[metric] = topo_json;
        }
        per_condition[cond]["deviations"] = metrics_json;
    }
    summary["conditions"] = per_condition;
    result.summary_json = out_dir / "summary.json";
    write_text_file(result.summary_json, summary.dump(2) + "\n");
    return result;
}

DeviationTable metric_deviations(const std::vector<MetricsRecord>& metrics, int burn_in) {
    DeviationTable table;
    std::set<std::string> conditions;
    for (const auto& r : metrics) conditions.insert(r.condition);

    for (const auto& cond : conditions) {
        std::vector<MetricCell> entropy_cells, similarity_cells;
        for (const auto& r : metrics) {
            if (r.condition != cond) continue;
            entropy_cells.push_back({r.batch, r.iteration, r.topology, r.entropy});
            if (r.neighbor_similarity)
                similarity_cells.push_back({r.batch, r.iteration, r.topology, *r.neighbor_similarity});
        }
        std::map<std::string, std::map<std::string, DeviationSummary>> by_metric;
        if (!entropy_cells.empty())
            by_metric["entropy"] = relative_deviation(entropy_cells, burn_in);
        if (!similarity_cells.empty())
            by_metric["neighbor_similarity"] = relative_deviation(similarity_cells, burn_in);
        table[cond] = std::move(by_metric);
    }
    return table;
}

std::vector<fs::path> write_report(const std::vector<MetricsRecord>& metrics,
                                   const fs::path& out_dir, int burn_in) {
    if (metrics.empty()) throw DataError("report of empty metrics table");
    fs::create_directories(out_dir);

    std::set<std::string> conditions;
    for (const auto& r : metrics) conditions.insert(r.condition);
    const auto deviations = metric_deviations(metrics, burn_in);

    std::vector<fs::path> written;
    for (const auto& cond : conditions) {
        // Prevalence averaged over batches and topologies per iteration.
        std::map<int, std::vector<double>> sums;
        std::map<int, int> counts;
        for (const auto& r : metrics) {
            if (r.condition != cond) continue;
            auto& row = sums[r.iteration];
            if (row.empty()) row.assign(r.prevalence.size(), 0.0);
            for (std::size_t c = 0; c < r.prevalence.size(); ++c) row[c] += r.prevalence[c];
            counts[r.iteration] += 1;
        }
        std::map<int, std::vector<double>> trajectory;
        for (auto& [iter, row] : sums) {
            for (double& v : row) v /= counts[iter];
            trajectory[iter] = row;
        }

        std::vector<ScatterSample> samples;
        for (const auto& r : metrics) {
            if (r.condition != cond || !r.neighbor_similarity) continue;
            samples.push_back({r.batch, r.iteration, r.topology, r.entropy, *r.neighbor_similarity});
        }

        const auto dev_it = deviations.find(cond);
        const std::map<std::string, std::map<std::string, DeviationSummary>> empty;
        const auto& by_metric = dev_it == deviations.end() ? empty : dev_it->second;

        const fs::path prevalence_path = out_dir / ("prevalence_" + cond + ".svg");
        write_text_file(prevalence_path,
                        prevalence_chart(trajectory, "Cluster prevalence: " + cond));
        const fs::path scatter_path = out_dir / ("similarity_entropy_" + cond + ".svg");
        write_text_file(scatter_path,
                        similarity_entropy_chart(samples, "Similarity vs entropy: " + cond));
        const fs::path dev_path = out_dir / ("deviations_" + cond + ".svg");
        write_text_file(dev_path, deviation_chart(by_metric, "Relative deviations: " + cond));
        written.push_back(prevalence_path);
        written.push_back(scatter_path);
        written.push_back(dev_path);
    }
    return written;
}

} // namespace chorusnet
