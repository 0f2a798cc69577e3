#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "graphkd/matrix.hpp"

namespace graphkd {

struct GraphEdge {
    std::size_t target;
    double p;  // row-normalized weight, sums to 1 over a node's neighbors
    double w;  // raw Gaussian weight exp(-d^2/sigma^2), kept for symmetrization
};

// Directed weighted kNN graph in biomarker space. Bipartite form links query
// rows to reference rows (cross-cohort retrieval).
struct KnnGraph {
    std::size_t n_nodes = 0;    // source side
    std::size_t n_targets = 0;  // equals n_nodes unless bipartite
    std::size_t k = 0;
    double sigma = 1.0;
    bool bipartite = false;
    std::vector<std::vector<GraphEdge>> neighbors;
};

struct SymEdge {
    std::size_t u, v;  // u < v
    double weight;
};

struct SymmetricGraph {
    std::size_t n_nodes = 0;
    std::size_t k = 0;  // k of the directed graph it came from
    double sigma = 1.0;
    std::vector<SymEdge> edges;
};

// 1 - cos(a,b), in [0,2]. A zero vector is treated as orthogonal to
// everything (distance 1); that fallback is logged once per run.
double cosine_distance(std::span<const double> a, std::span<const double> b);

// exp(-d^2 / sigma^2)
double gaussian_weight(double d, double sigma);

// Each node links to its min(k, n-1) nearest neighbors by cosine distance,
// ties broken by lower index. Requires n >= 2 and 1 <= k <= n-1.
KnnGraph build_knn_graph(const Matrix& points, std::size_t k, double sigma);

// Bipartite query->reference retrieval with the same weighting. Requires
// 1 <= k <= refs.rows.
KnnGraph build_cross_knn(const Matrix& queries, const Matrix& refs, std::size_t k, double sigma);

// Undirected edge set = union of directed edges; weight is the max of the
// available directed weights, raw Gaussian w by default (normalized p when
// raw_weights is false). Rejects bipartite input.
SymmetricGraph symmetrize(const KnnGraph& g, bool raw_weights = true);

// Text export: header line "n,k,sigma,directed" then one "src,dst,weight"
// line per edge, 9 significant digits.
void write_graph(const std::string& path, const KnnGraph& g);
void write_graph(const std::string& path, const SymmetricGraph& g);

}  // namespace graphkd
