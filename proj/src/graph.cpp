#include "chorusnet/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <stack>

#include "chorusnet/errors.hpp"
#include "chorusnet/rng.hpp"

namespace chorusnet {

namespace {

std::vector<std::vector<int>> build_adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

} // namespace

bool Graph::has_edge(int u, int v) const {
    if (u < 0 || v < 0 || u >= n || v >= n) return false;
    const auto& nb = adjacency[u];
    return std::binary_search(nb.begin(), nb.end(), v);
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edge_list) {
    if (n < 1) throw ParameterError("graph needs at least one node");
    std::set<std::pair<int, int>> seen;
    for (auto& [u, v] : edge_list) {
        if (u == v) throw ParameterError("self-loop on node " + std::to_string(u));
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw ParameterError("edge endpoint out of range");
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second)
            throw ParameterError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    std::sort(edge_list.begin(), edge_list.end());
    Graph g;
    g.n = n;
    g.edges = std::move(edge_list);
    g.adjacency = build_adjacency(n, g.edges);
    return g;
}

Graph make_lattice(int rows, int cols) {
    if (rows < 3 || cols < 3)
        throw ParameterError("lattice dimensions must be >= 3; periodic wrap degenerates below that");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(2 * rows * cols));
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            edges.emplace_back(id(r, c), id((r + 1) % rows, c));
            edges.emplace_back(id(r, c), id(r, (c + 1) % cols));
        }
    }
    Graph g = make_graph(rows * cols, std::move(edges));
    g.kind = "lattice";
    return g;
}

Graph make_random_regular(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw ParameterError("random regular graph needs n >= 1 and d >= 1");
    if (d >= n) throw ParameterError("degree must be smaller than node count");
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw ParameterError("n * d must be even for a d-regular graph");

    constexpr int kRetryBudget = 10000;
    Rng rng(seed_combine(seed, "random_regular"));

    std::vector<int> stubs(static_cast<std::size_t>(n) * d);
    for (int v = 0; v < n; ++v)
        std::fill_n(stubs.begin() + static_cast<std::size_t>(v) * d, d, v);

    for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
        // Fisher-Yates over the stub list, then pair consecutive stubs.
        for (std::size_t i = stubs.size() - 1; i > 0; --i) {
            std::size_t j = rng.uniform_index(i + 1);
            std::swap(stubs[i], stubs[j]);
        }
        std::set<std::pair<int, int>> edge_set;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            int u = stubs[i], v = stubs[i + 1];
            if (u == v) { ok = false; break; }
            if (u > v) std::swap(u, v);
            if (!edge_set.insert({u, v}).second) { ok = false; break; }
        }
        if (!ok) continue;
        Graph g = make_graph(n, {edge_set.begin(), edge_set.end()});
        if (!is_connected(g)) continue;
        g.kind = "random_regular";
        g.seed = seed;
        return g;
    }
    throw GenerationError("random regular generation failed after 10000 attempts");
}

Graph make_modular(int num_cliques, int clique_size, std::uint64_t seed) {
    if (clique_size < 5)
        throw ParameterError("clique size must be >= 5 for a well-defined 4-ring");
    if (num_cliques < 3) throw ParameterError("need at least 3 cliques on the macro-ring");

    std::vector<std::pair<int, int>> edges;
    auto id = [clique_size](int clique, int pos) { return clique * clique_size + pos; };
    for (int c = 0; c < num_cliques; ++c) {
        for (int p = 0; p < clique_size; ++p) {
            for (int step : {1, 2}) {
                int q = (p + step) % clique_size;
                int a = id(c, p), b = id(c, q);
                if (a == id(c, 0) && b == id(c, 2)) continue; // cut chord 0-2
                edges.emplace_back(a, b);
            }
        }
        edges.emplace_back(id(c, 2), id((c + 1) % num_cliques, 0));
    }
    Graph g = make_graph(num_cliques * clique_size, std::move(edges));
    g.kind = "modular";
    g.seed = seed;
    return g;
}

Graph make_disconnected(int n) {
    Graph g = make_graph(n, {});
    g.kind = "disconnected";
    return g;
}

namespace {

// Single-source BFS distances; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, int source) {
    std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
    std::queue<int> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : g.adjacency[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

} // namespace

bool is_connected(const Graph& g) {
    if (g.n == 0) return false;
    if (g.n == 1) return true;
    const auto dist = bfs_distances(g, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

double avg_path_length(const Graph& g) {
    if (g.n < 2) throw ParameterError("average path length needs at least 2 nodes");
    long long total = 0;
    for (int s = 0; s < g.n; ++s) {
        const auto dist = bfs_distances(g, s);
        for (int t = s + 1; t < g.n; ++t) {
            if (dist[t] < 0) throw ConnectivityError("graph is disconnected; path length undefined");
            total += dist[t];
        }
    }
    const double pairs = 0.5 * g.n * (g.n - 1);
    return static_cast<double>(total) / pairs;
}

std::vector<double> betweenness_centrality(const Graph& g) {
    if (!is_connected(g)) throw ConnectivityError("betweenness requires a connected graph");
    const int n = g.n;
    std::vector<double> accum(static_cast<std::size_t>(n), 0.0);
    if (n < 3) return accum;

    // Brandes (2001): one BFS per source with dependency back-propagation.
    std::vector<int> dist(n), order;
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    order.reserve(n);

    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            order.push_back(u);
            for (int v : g.adjacency[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
                if (dist[v] == dist[u] + 1) {
                    sigma[v] += sigma[u];
                    preds[v].push_back(u);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int w = *it;
            for (int p : preds[w]) delta[p] += sigma[p] / sigma[w] * (1.0 + delta[w]);
            if (w != s) accum[w] += delta[w];
        }
    }

    // Each unordered pair was visited from both endpoints; normalize by the
    // number of pairs excluding the node itself.
    const double norm = static_cast<double>(n - 1) * (n - 2);
    for (double& b : accum) b /= norm;
    return accum;
}

double mean_betweenness(const Graph& g) {
    const auto b = betweenness_centrality(g);
    return std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(g.n);
}

TopologyMetrics topology_metrics(const Graph& g) {
    return {avg_path_length(g), mean_betweenness(g)};
}

Graph make_topology(const TopologySpec& spec) {
    if (spec.kind == "lattice") return make_lattice(spec.rows, spec.cols);
    if (spec.kind == "random_regular") return make_random_regular(spec.n, spec.degree, spec.seed);
    if (spec.kind == "modular") return make_modular(spec.cliques, spec.clique_size, spec.seed);
    if (spec.kind == "disconnected") return make_disconnected(spec.n);
    throw ParameterError("unknown topology kind '" + spec.kind + "'");
}

} // namespace chorusnet
