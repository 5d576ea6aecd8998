#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace chorusnet {

// Undirected simple graph with nodes 0..n-1. Edges are stored as a sorted
// list of (u, v) pairs with u < v; the adjacency lists are derived from it.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;

    std::string kind;       // construction that produced this graph
    std::uint64_t seed = 0; // seed used, if any

    int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
    std::size_t edge_count() const { return edges.size(); }
    bool has_edge(int u, int v) const;
};

struct TopologyMetrics {
    double avg_path_length = 0.0; // mean shortest-path hops over unordered pairs
    double mean_betweenness = 0.0;
};

// Builds a graph from an edge list. Rejects self-loops, duplicate edges and
// out-of-range endpoints; normalizes edge order.
Graph make_graph(int n, std::vector<std::pair<int, int>> edge_list);

// rows x cols torus: node (r,c) connects to its four grid neighbors with
// periodic boundaries. Requires rows, cols >= 3 so wrapping stays simple.
Graph make_lattice(int rows, int cols);

// Connected d-regular graph on n nodes, sampled with the pairing
// (configuration) model; self-loops, multi-edges and disconnected outcomes
// are rejected wholesale. Deterministic for a given seed.
Graph make_random_regular(int n, int d, std::uint64_t seed);

// num_cliques rings of clique_size nodes (each node linked to its 4 nearest
// ring neighbors) arranged on a macro-ring. In every clique the chord between
// ring positions 0 and 2 is removed; position 2 then links to the next
// clique's position 0, so degree 4 is preserved everywhere. The construction
// is canonical; the seed is recorded for provenance only.
Graph make_modular(int num_cliques, int clique_size, std::uint64_t seed);

// n isolated nodes (the linear transmission-chain baseline).
Graph make_disconnected(int n);

bool is_connected(const Graph& g);

// Mean BFS distance over unordered distinct node pairs. Throws
// ConnectivityError on disconnected input.
double avg_path_length(const Graph& g);

// Per-node betweenness centrality via Brandes accumulation, endpoints
// excluded, normalized by (n-1)(n-2)/2 unordered pairs.
std::vector<double> betweenness_centrality(const Graph& g);

// Node mean of betweenness_centrality. For any connected graph this equals
// (avg_path_length - 1) / (n - 2).
double mean_betweenness(const Graph& g);

TopologyMetrics topology_metrics(const Graph& g);

// Topology request as found in study configs and topology files.
struct TopologySpec {
    std::string kind; // lattice | random_regular | modular | disconnected
    int rows = 7;
    int cols = 7;
    int n = 49;
    int degree = 4;
    int cliques = 7;
    int clique_size = 7;
    std::uint64_t seed = 0;
};

Graph make_topology(const TopologySpec& spec);

} // namespace chorusnet
