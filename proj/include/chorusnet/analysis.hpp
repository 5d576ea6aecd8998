#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chorusnet/behavior.hpp"
#include "chorusnet/engine.hpp"
#include "chorusnet/graph.hpp"
#include "chorusnet/melody.hpp"

namespace chorusnet {

using Point2 = std::array<double, 2>;

// Principal components of the pooled contour data. Rows of `components` are
// unit-norm eigenvectors in descending eigenvalue order, sign-fixed so each
// row's largest-magnitude entry is positive.
struct PcaResult {
    Eigen::RowVectorXd mean;      // column means removed before the fit
    Eigen::MatrixXd components;   // 5x5, rows = principal axes
    Eigen::VectorXd eigenvalues;  // descending, floored at 0

    std::vector<double> variance_ratios() const;
    Point2 embed(const Melody& centered) const;
};

PcaResult fit_pca(const Eigen::MatrixXd& rows);

struct KMeansResult {
    std::vector<Point2> centroids;
    std::vector<int> labels;
    double objective = 0.0;                 // within-cluster sum of squares
    std::vector<double> objective_history;  // per Lloyd iteration
};

KMeansResult kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed);

// Mean silhouette over all points (Euclidean); singleton clusters score 0.
double silhouette(const std::vector<Point2>& points, const std::vector<int>& labels);

// Fits k-means over the range and returns the k with the best silhouette
// (ties toward smaller k). The per-k seed schedule is fixed.
int select_k(const std::vector<Point2>& points, int k_min, int k_max, std::uint64_t seed);

struct ClusterModel {
    Eigen::RowVectorXd feature_mean; // 1x5
    Eigen::MatrixXd components;      // 2x5
    std::array<double, 2> explained_variance_ratio{};
    std::vector<Point2> centroids;
    int k = 0;
    std::uint64_t fit_seed = 0;

    Point2 embed(const Melody& m) const; // centers the melody first
    int assign(const Melody& m) const;   // nearest centroid, ties to lowest label
};

// Pooled pipeline: per-melody mean centering, PCA to two components, k-means
// at a silhouette-selected k (or a forced k).
ClusterModel fit_cluster_model(const std::vector<Melody>& pooled, std::uint64_t seed,
                               std::optional<int> force_k = std::nullopt,
                               int k_min = 2, int k_max = 12);

// Shannon entropy (nats) of a prevalence vector; 0 log 0 := 0.
double cluster_entropy(const std::vector<double>& prevalence);

// Fraction of edges whose endpoints carry the same label. Throws
// ConnectivityError when the edge set is empty (reported as absent upstream).
double neighbor_similarity(const Graph& g, const std::vector<int>& labels);

// One metric value observed in a (batch, iteration, topology) cell.
struct MetricCell {
    int batch = 0;
    int iteration = 0;
    std::string topology;
    double value = 0.0;
};

struct DeviationSummary {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<double> per_cell; // per (batch, iteration) deviation
};

// Within every (batch, iteration) group, subtracts the cross-topology mean;
// deviations at iterations <= burn_in are dropped, the rest are averaged per
// topology with a seeded percentile bootstrap CI. Every group must contain
// every topology.
std::map<std::string, DeviationSummary> relative_deviation(const std::vector<MetricCell>& cells,
                                                           int burn_in);

struct BootstrapCI {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// Percentile bootstrap of the sample mean (10,000 resamples, fixed seed).
BootstrapCI bootstrap_mean(const std::vector<double>& values);

// Per-iteration cluster prevalence, averaged over batches; iteration 0 is
// reconstructed from the initial melodies embedded in the first-iteration
// records. Keyed by iteration, values sum to 1.
std::map<int, std::vector<double>> prevalence_trajectory(const std::vector<TrialRecord>& log,
                                                         const ClusterModel& model);

// Initial melody of every node, recovered from the self candidate of the
// iteration-1 records.
std::vector<Melody> initial_melodies_from_log(const std::vector<TrialRecord>& log);

// Mean proxy score over all produced melodies at iterations > burn_in, with
// a bootstrap CI.
BootstrapCI population_pleasantness(const std::vector<TrialRecord>& log, const Scorer& scorer,
                                    int burn_in);

// One row of the metrics table: population statistics of a single
// (batch, condition, topology, iteration) population.
struct MetricsRecord {
    int batch = 0;
    std::string condition;
    std::string topology;
    int iteration = 0;
    double entropy = 0.0;
    std::optional<double> neighbor_similarity; // absent without edges
    double pleasantness = 0.0;
    std::vector<double> prevalence;
};

// Per-iteration metrics for one (batch, condition, topology) cell; iteration
// 0 is computed from the initial melodies.
std::vector<MetricsRecord> metrics_for_cell(const std::vector<TrialRecord>& cell_log,
                                            const Graph& g, const ClusterModel& model,
                                            const Scorer& scorer);

// Survival function of the chi-square distribution for even degrees of
// freedom (closed form), used by the homogeneity checks.
double chi_square_survival_even_df(double statistic, int df);

// Pearson chi-square p-value that two samples of category counts come from
// the same distribution (rows = samples).
double chi_square_homogeneity_p(const std::vector<std::vector<long>>& counts);

} // namespace chorusnet
