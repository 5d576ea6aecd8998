#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chorusnet/analysis.hpp"
#include "chorusnet/engine.hpp"

namespace chorusnet {

// A full study: the cross product of conditions, topologies and batches,
// sharing initial melodies per batch.
struct StudyConfig {
    std::string study_id = "study";
    std::vector<Condition> conditions;
    std::vector<TopologySpec> topologies;      // used by the networked conditions
    int iterations = 10;
    int batches = 3;
    std::uint64_t base_seed = 0;
    AgentConfig agent;
    RunMode mode = RunMode::synchronous;
    int participants = 8;
    int trials_per_participant = 3;
    int linear_nodes = 49;                     // node count if no topologies are listed
    std::optional<std::filesystem::path> deviation_model_path;
};

// All (condition, topology, batch) cells a config expands to. Linear cells
// carry a disconnected topology of matching size.
struct StudyCell {
    Condition condition;
    TopologySpec topology;
    int batch = 0;

    std::string log_name() const; // stable file name for this cell's log
};

std::vector<StudyCell> study_cells(const StudyConfig& config);

// Throws ParameterError with a field-level message if the config is invalid.
void validate_study_config(const StudyConfig& config);

struct RunResult {
    std::filesystem::path manifest_path;
    std::map<std::string, std::string> log_hashes; // log file name -> sha256
};

// Executes every cell (workers capped by CHORUSNET_THREADS), writes one JSONL
// log per cell plus topology files, an estimated-or-loaded deviation model
// when needed, and a manifest of content hashes. Fully deterministic.
RunResult run_study(const StudyConfig& config, const std::filesystem::path& out_dir);

// Σ_Δ estimated from the (selected, produced) pairs of full-condition records.
DeviationModel deviation_model_from_records(const std::vector<TrialRecord>& records);

struct AnalyzeOptions {
    std::optional<int> force_k;
    int k_min = 2;
    int k_max = 12;
    int burn_in = 3;
    std::optional<Scorer> scorer; // defaults to the study's scorer
};

struct AnalyzeResult {
    ClusterModel model;
    std::vector<MetricsRecord> metrics;
    std::filesystem::path metrics_csv;
    std::filesystem::path model_json;
    std::filesystem::path summary_json;
};

// Pools every produced melody across the run's logs, fits the cluster model,
// writes metrics.csv, cluster_model.json and a deviation/pleasantness
// summary.
AnalyzeResult analyze_run(const std::filesystem::path& run_dir,
                          const std::filesystem::path& out_dir, const AnalyzeOptions& options);

// Post-burn-in relative deviations per condition, computed from the metrics
// table: condition -> metric ("entropy" | "neighbor_similarity") ->
// topology -> summary. Metrics absent for a condition are omitted.
using DeviationTable =
    std::map<std::string, std::map<std::string, std::map<std::string, DeviationSummary>>>;

DeviationTable metric_deviations(const std::vector<MetricsRecord>& metrics, int burn_in);

// Renders the three SVG charts per condition found in the metrics table;
// returns the file paths written.
std::vector<std::filesystem::path> write_report(const std::vector<MetricsRecord>& metrics,
                                                const std::filesystem::path& out_dir, int burn_in);

} // namespace chorusnet
