#include "chorusnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "chorusnet/errors.hpp"

namespace chorusnet {

namespace {

constexpr std::uint64_t kBootstrapSeed = 0x626f6f74ULL;
constexpr int kBootstrapResamples = 10000;

double sq_dist(const Point2& a, const Point2& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

} // namespace

std::vector<double> PcaResult::variance_ratios() const {
    const double total = eigenvalues.sum();
    std::vector<double> out(static_cast<std::size_t>(eigenvalues.size()));
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        out[static_cast<std::size_t>(i)] = eigenvalues[i] / total;
    return out;
}

Point2 PcaResult::embed(const Melody& centered) const {
    Eigen::RowVectorXd x(kMelodyLength);
    for (int i = 0; i < kMelodyLength; ++i) x[i] = centered[static_cast<std::size_t>(i)];
    x -= mean;
    return {x.dot(components.row(0)), x.dot(components.row(1))};
}

PcaResult fit_pca(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 3) throw DataError("PCA needs at least 3 rows");
    if (rows.cols() != kMelodyLength) throw DataError("PCA expects 5 pitch columns");

    PcaResult res;
    res.mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - res.mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(rows.rows() - 1);

    if (cov.cwiseAbs().maxCoeff() < 1e-15)
        throw DataError("degenerate PCA input: all rows identical");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigen returns ascending order; flip to descending.
    const Eigen::Index d = cov.rows();
    res.components.resize(d, d);
    res.eigenvalues.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        res.eigenvalues[i] = std::max(0.0, eig.eigenvalues()[d - 1 - i]);
        Eigen::RowVectorXd v = eig.eigenvectors().col(d - 1 - i).transpose();
        Eigen::Index arg_max = 0;
        v.cwiseAbs().maxCoeff(&arg_max);
        if (v[arg_max] < 0.0) v = -v;
        res.components.row(i) = v;
    }
    return res;
}

KMeansResult kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed) {
    const auto n = points.size();
    if (k < 1) throw ParameterError("k must be >= 1");
    if (n < static_cast<std::size_t>(k)) throw ParameterError("k-means needs at least k points");

    Rng rng(seed_combine(seed, "kmeans++"));
    KMeansResult res;
    res.centroids.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding.
    res.centroids.push_back(points[rng.uniform_index(n)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& cent : res.centroids) best = std::min(best, sq_dist(points[i], cent));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (u < cum) { pick = i; break; }
                pick = i;
            }
        } else {
            pick = rng.uniform_index(n); // all points coincide with a centroid
        }
        res.centroids.push_back(points[pick]);
    }

    res.labels.assign(n, 0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);

    for (int iter = 0; iter < 300; ++iter) {
        // Assignment (ties toward the lowest label).
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], res.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], res.centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) { best = c; best_d = d; }
            }
            if (res.labels[i] != best) { res.labels[i] = best; changed = true; }
            counts[static_cast<std::size_t>(best)] += 1;
        }

        // Empty-cluster repair: the point farthest from its centroid becomes
        // the empty cluster's centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(res.labels[i])] <= 1) continue;
                const double d =
                    sq_dist(points[i], res.centroids[static_cast<std::size_t>(res.labels[i])]);
                if (d > far_d) { far = i; far_d = d; }
            }
            counts[static_cast<std::size_t>(res.labels[far])] -= 1;
            res.labels[far] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            res.centroids[static_cast<std::size_t>(c)] = points[far];
            changed = true;
        }

        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            obj += sq_dist(points[i], res.centroids[static_cast<std::size_t>(res.labels[i])]);
        res.objective_history.push_back(obj);
        res.objective = obj;

        if (!changed && iter > 0) break;

        // Update step.
        std::vector<Point2> sums(static_cast<std::size_t>(k), {0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i) {
            sums[static_cast<std::size_t>(res.labels[i])][0] += points[i][0];
            sums[static_cast<std::size_t>(res.labels[i])][1] += points[i][1];
        }
        for (int c = 0; c < k; ++c) {
            const auto cnt = counts[static_cast<std::size_t>(c)];
            if (cnt > 0)
                res.centroids[static_cast<std::size_t>(c)] = {sums[static_cast<std::size_t>(c)][0] / cnt,
                                                              sums[static_cast<std::size_t>(c)][1] / cnt};
        }
    }
    return res;
}

double silhouette(const std::vector<Point2>& points, const std::vector<int>& labels) {
    const auto n = points.size();
    if (labels.size() != n) throw ParameterError("silhouette: labels/points size mismatch");
    if (n < 2) throw DataError("silhouette needs at least 2 points");

    const int max_label = *std::max_element(labels.begin(), labels.end());
    const auto nc = static_cast<std::size_t>(max_label + 1);
    std::vector<std::size_t> sizes(nc, 0);
    for (int l : labels) {
        if (l < 0) throw ParameterError("silhouette: negative label");
        sizes[static_cast<std::size_t>(l)] += 1;
    }
    if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2)
        throw DataError("silhouette undefined for a single cluster");

    double total = 0.0;
    std::vector<double> sums(nc);
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<std::size_t>(labels[i]);
        if (sizes[li] == 1) continue; // singleton convention: term 0
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
        }
        const double a = sums[li] / static_cast<double>(sizes[li] - 1);
        double b = std::numeric_limits<double>::max();
        for (std::size_t c = 0; c < nc; ++c) {
            if (c == li || sizes[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

int select_k(const std::vector<Point2>& points, int k_min, int k_max, std::uint64_t seed) {
    if (k_min < 2) throw ParameterError("select_k needs k_min >= 2");
    if (k_max < k_min) throw ParameterError("select_k needs k_max >= k_min");
    if (points.size() < static_cast<std::size_t>(k_max) + 1)
        throw ParameterError("select_k needs more points than k_max");

    int best_k = k_min;
    double best_score = -std::numeric_limits<double>::max();
    for (int k = k_min; k <= k_max; ++k) {
        const auto fit = kmeans(points, k, seed_combine(seed, static_cast<std::uint64_t>(k)));
        const double s = silhouette(points, fit.labels);
        if (s > best_score) {
            best_score = s;
            best_k = k;
        }
    }
    return best_k;
}

Point2 ClusterModel::embed(const Melody& m) const {
    const Melody c = chorusnet::center(m);
    Eigen::RowVectorXd x(kMelodyLength);
    for (int i = 0; i < kMelodyLength; ++i) x[i] = c[static_cast<std::size_t>(i)];
    x -= feature_mean;
    return {x.dot(components.row(0)), x.dot(components.row(1))};
}

int ClusterModel::assign(const Melody& m) const {
    const Point2 y = embed(m);
    int best = 0;
    double best_d = sq_dist(y, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = sq_dist(y, centroids[c]);
        if (d < best_d) {
            best = static_cast<int>(c);
            best_d = d;
        }
    }
    return best;
}

ClusterModel fit_cluster_model(const std::vector<Melody>& pooled, std::uint64_t seed,
                               std::optional<int> force_k, int k_min, int k_max) {
    if (pooled.size() < 3) throw DataError("cluster model needs at least 3 melodies");

    Eigen::MatrixXd rows(static_cast<Eigen::Index>(pooled.size()), kMelodyLength);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        const Melody c = center(pooled[i]);
        for (int j = 0; j < kMelodyLength; ++j)
            rows(static_cast<Eigen::Index>(i), j) = c[static_cast<std::size_t>(j)];
    }
    const PcaResult pca = fit_pca(rows);

    std::vector<Point2> embedded(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        Melody c = center(pooled[i]);
        embedded[i] = pca.embed(c);
    }

    const int k = force_k ? *force_k : select_k(embedded, k_min, k_max, seed);
    if (k < 2) throw ParameterError("cluster model needs k >= 2");
    const auto fit = kmeans(embedded, k, seed_combine(seed, "final_fit"));

    ClusterModel model;
    model.feature_mean = pca.mean;
    model.components = pca.components.topRows(2);
    const auto ratios = pca.variance_ratios();
    model.explained_variance_ratio = {ratios[0], ratios[1]};
    model.centroids = fit.centroids;
    model.k = k;
    model.fit_seed = seed;
    return model;
}

double cluster_entropy(const std::vector<double>& prevalence) {
    if (prevalence.empty()) throw DataError("entropy of empty distribution");
    double sum = 0.0, h = 0.0;
    for (double p : prevalence) {
        if (p < -1e-12 || !std::isfinite(p)) throw DataError("malformed prevalence value");
        sum += p;
        if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("prevalence does not sum to 1");
    return h;
}

double neighbor_similarity(const Graph& g, const std::vector<int>& labels) {
    if (labels.size() != static_cast<std::size_t>(g.n))
        throw ParameterError("neighbor_similarity: labels must cover all nodes");
    if (g.edges.empty())
        throw ConnectivityError("neighbor similarity undefined without edges");
    std::size_t same = 0;
    for (const auto& [u, v] : g.edges)
        if (labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)]) ++same;
    return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

BootstrapCI bootstrap_mean(const std::vector<double>& values) {
    if (values.empty()) throw DataError("bootstrap of empty sample");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());

    Rng rng(kBootstrapSeed);
    std::vector<double> means(kBootstrapResamples);
    for (int b = 0; b < kBootstrapResamples; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            s += values[rng.uniform_index(values.size())];
        means[static_cast<std::size_t>(b)] = s / static_cast<double>(values.size());
    }
    std::sort(means.begin(), means.end());
    const auto lo_idx = static_cast<std::size_t>(std::llround(0.025 * (kBootstrapResamples - 1)));
    const auto hi_idx = static_cast<std::size_t>(std::llround(0.975 * (kBootstrapResamples - 1)));
    return {mean, means[lo_idx], means[hi_idx]};
}

std::map<std::string, DeviationSummary> relative_deviation(const std::vector<MetricCell>& cells,
                                                           int burn_in) {
    if (cells.empty()) throw DataError("relative deviation of empty metric table");

    std::set<std::string> topologies;
    for (const auto& c : cells) topologies.insert(c.topology);

    std::map<std::pair<int, int>, std::map<std::string, double>> groups;
    for (const auto& c : cells) {
        auto& group = groups[{c.batch, c.iteration}];
        if (!group.emplace(c.topology, c.value).second)
            throw DataError("duplicate metric cell for batch " + std::to_string(c.batch) +
                            ", iteration " + std::to_string(c.iteration) + ", " + c.topology);
    }

    std::map<std::string, DeviationSummary> out;
    for (const auto& t : topologies) out[t] = {};

    for (const auto& [key, group] : groups) {
        if (group.size() != topologies.size())
            throw DataError("missing topology in metric group (batch " + std::to_string(key.first) +
                            ", iteration " + std::to_string(key.second) + ")");
        if (key.second <= burn_in) continue;
        double mean = 0.0;
        for (const auto& [topo, value] : group) mean += value;
        mean /= static_cast<double>(group.size());
        for (const auto& [topo, value] : group) out[topo].per_cell.push_back(value - mean);
    }

    for (auto& [topo, summary] : out) {
        if (summary.per_cell.empty())
            throw DataError("no metric cells beyond burn-in " + std::to_string(burn_in));
        const auto ci = bootstrap_mean(summary.per_cell);
        summary.mean = ci.mean;
        summary.ci_lo = ci.ci_lo;
        summary.ci_hi = ci.ci_hi;
    }
    return out;
}

std::vector<Melody> initial_melodies_from_log(const std::vector<TrialRecord>& log) {
    int n = 0;
    for (const auto& rec : log) n = std::max(n, rec.node + 1);
    std::vector<Melody> init(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& rec : log) {
        if (rec.iteration != 1) continue;
        if (rec.candidates.empty() || rec.candidates[0].source != rec.node)
            throw DataError("trial record lacks the self candidate in first position");
        init[static_cast<std::size_t>(rec.node)] = rec.candidates[0].melody;
        seen[static_cast<std::size_t>(rec.node)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw DataError("log is missing iteration-1 records for some nodes");
    return init;
}

std::map<int, std::vector<double>> prevalence_trajectory(const std::vector<TrialRecord>& log,
                                                         const ClusterModel& model) {
    if (log.empty()) throw DataError("prevalence trajectory of empty log");
    const auto k = static_cast<std::size_t>(model.k);

    std::map<int, std::vector<long>> counts; // iteration -> per-cluster count
    std::map<int, long> totals;

    auto bump = [&](int iteration, const Melody& m) {
        auto& row = counts[iteration];
        if (row.empty()) row.assign(k, 0);
        row[static_cast<std::size_t>(model.assign(m))] += 1;
        totals[iteration] += 1;
    };

    // Iteration 0: initial melodies, one population per (batch, topology) cell.
    std::set<std::pair<int, std::string>> cells;
    for (const auto& rec : log) cells.insert({rec.batch, rec.topology});
    for (const auto& [batch, topo] : cells) {
        std::vector<TrialRecord> cell_log;
        for (const auto& rec : log)
            if (rec.batch == batch && rec.topology == topo) cell_log.push_back(rec);
        for (const auto& m : initial_melodies_from_log(cell_log)) bump(0, m);
    }

    for (const auto& rec : log) bump(rec.iteration, rec.produced);

    std::map<int, std::vector<double>> out;
    for (const auto& [iteration, row] : counts) {
        std::vector<double> p(k);
        for (std::size_t c = 0; c < k; ++c)
            p[c] = static_cast<double>(row[c]) / static_cast<double>(totals[iteration]);
        out[iteration] = p;
    }
    return out;
}

BootstrapCI population_pleasantness(const std::vector<TrialRecord>& log, const Scorer& scorer,
                                    int burn_in) {
    std::vector<double> scores;
    for (const auto& rec : log)
        if (rec.iteration > burn_in) scores.push_back(score(scorer, rec.produced));
    if (scores.empty())
        throw DataError("no trials beyond burn-in " + std::to_string(burn_in));
    return bootstrap_mean(scores);
}

std::vector<MetricsRecord> metrics_for_cell(const std::vector<TrialRecord>& cell_log,
                                            const Graph& g, const ClusterModel& model,
                                            const Scorer& scorer) {
    if (cell_log.empty()) throw DataError("metrics of empty cell log");
    const auto& first = cell_log.front();

    int max_iter = 0;
    for (const auto& rec : cell_log) max_iter = std::max(max_iter, rec.iteration);

    // Melody of every node at every iteration; iteration 0 from the log's
    // embedded initial melodies.
    std::vector<std::vector<Melody>> state(static_cast<std::size_t>(max_iter) + 1);
    state[0] = initial_melodies_from_log(cell_log);
    const auto n = state[0].size();
    if (n != static_cast<std::size_t>(g.n))
        throw DataError("cell log node count does not match the topology");
    if (cell_log.size() != static_cast<std::size_t>(max_iter) * n)
        throw DataError("cell log is missing records: expected " +
                        std::to_string(static_cast<std::size_t>(max_iter) * n) + ", found " +
                        std::to_string(cell_log.size()));
    for (int t = 1; t <= max_iter; ++t) state[static_cast<std::size_t>(t)].resize(n);
    for (const auto& rec : cell_log)
        state[static_cast<std::size_t>(rec.iteration)][static_cast<std::size_t>(rec.node)] =
            rec.produced;

    std::vector<MetricsRecord> out;
    out.reserve(state.size());
    for (int t = 0; t <= max_iter; ++t) {
        const auto& melodies = state[static_cast<std::size_t>(t)];
        MetricsRecord row;
        row.batch = first.batch;
        row.condition = to_string(first.condition);
        row.topology = first.topology;
        row.iteration = t;

        std::vector<int> labels(n);
        std::vector<double> prevalence(static_cast<std::size_t>(model.k), 0.0);
        double score_sum = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            labels[v] = model.assign(melodies[v]);
            prevalence[static_cast<std::size_t>(labels[v])] += 1.0 / static_cast<double>(n);
            score_sum += score(scorer, melodies[v]);
        }
        row.entropy = cluster_entropy(prevalence);
        row.prevalence = std::move(prevalence);
        row.pleasantness = score_sum / static_cast<double>(n);
        if (!g.edges.empty()) row.neighbor_similarity = neighbor_similarity(g, labels);
        out.push_back(std::move(row));
    }
    return out;
}

double chi_square_survival_even_df(double statistic, int df) {
    if (df < 2 || df % 2 != 0) throw ParameterError("closed-form survival needs even df >= 2");
    if (statistic < 0.0) throw ParameterError("chi-square statistic must be >= 0");
    // For df = 2k: P(X > x) = exp(-x/2) * sum_{j<k} (x/2)^j / j!
    const double half = statistic / 2.0;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < df / 2; ++j) {
        term *= half / j;
        sum += term;
    }
    return std::exp(-half) * sum;
}

double chi_square_homogeneity_p(const std::vector<std::vector<long>>& counts) {
    if (counts.size() < 2) throw ParameterError("homogeneity test needs >= 2 samples");
    const std::size_t cols = counts[0].size();
    for (const auto& row : counts)
        if (row.size() != cols) throw ParameterError("ragged contingency table");

    std::vector<double> row_tot(counts.size(), 0.0), col_tot(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < counts.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            row_tot[r] += static_cast<double>(counts[r][c]);
            col_tot[c] += static_cast<double>(counts[r][c]);
            total += static_cast<double>(counts[r][c]);
        }
    if (total <= 0.0) throw DataError("empty contingency table");

    double stat = 0.0;
    std::size_t used_cols = 0;
    for (std::size_t c = 0; c < cols; ++c) {
        if (col_tot[c] <= 0.0) continue; // empty category carries no information
        ++used_cols;
        for (std::size_t r = 0; r < counts.size(); ++r) {
            const double expected = row_tot[r] * col_tot[c] / total;
            const double diff = static_cast<double>(counts[r][c]) - expected;
            stat += diff * diff / expected;
        }
    }
    const int df = static_cast<int>((counts.size() - 1) * (used_cols - 1));
    if (df < 1) throw DataError("degenerate contingency table");
    if (df % 2 != 0) throw ParameterError("this helper supports even df only");
    return chi_square_survival_even_df(stat, df);
}

} // namespace chorusnet
