#include "graphkd/graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

namespace graphkd {

namespace {

std::atomic<bool> g_zero_vector_logged{false};

void log_zero_vector_once() {
    if (!g_zero_vector_logged.exchange(true))
        std::fprintf(stderr, "[graph] zero-norm vector in cosine distance; using distance 1\n");
}

// Neighbor selection used by both square and bipartite builders: k smallest
// distances, ties by lower target index, then Gaussian weights normalized
// over the selected set.
std::vector<GraphEdge> select_neighbors(std::span<const double> query, const Matrix& refs,
                                        std::size_t k, double sigma, long self_index) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(refs.rows);
    for (std::size_t j = 0; j < refs.rows; ++j) {
        if (static_cast<long>(j) == self_index) continue;
        dist.emplace_back(cosine_distance(query, refs.row(j)), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

    std::vector<GraphEdge> edges;
    edges.reserve(k);
    double wsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double w = gaussian_weight(dist[i].first, sigma);
        edges.push_back({dist[i].second, 0.0, w});
        wsum += w;
    }
    for (auto& e : edges) e.p = e.w / wsum;  // wsum > 0 since w >= exp(-4/sigma^2)
    return edges;
}

}  // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_distance: length mismatch");
    double na = norm2(a);
    double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) {
        log_zero_vector_once();
        return 1.0;
    }
    return 1.0 - dot(a, b) / (na * nb);
}

double gaussian_weight(double d, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_weight: sigma must be > 0");
    return std::exp(-(d * d) / (sigma * sigma));
}

KnnGraph build_knn_graph(const Matrix& points, std::size_t k, double sigma) {
    if (points.rows < 2) throw std::invalid_argument("build_knn_graph: need at least 2 points");
    if (k == 0) throw std::invalid_argument("build_knn_graph: k must be >= 1");
    if (k >= points.rows)
        throw std::invalid_argument("build_knn_graph: k must be <= n-1 (k=" + std::to_string(k) +
                                    ", n=" + std::to_string(points.rows) + ")");
    if (sigma <= 0.0) throw std::invalid_argument("build_knn_graph: sigma must be > 0");

    KnnGraph g;
    g.n_nodes = points.rows;
    g.n_targets = points.rows;
    g.k = k;
    g.sigma = sigma;
    g.neighbors.resize(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i)
        g.neighbors[i] = select_neighbors(points.row(i), points, k, sigma, static_cast<long>(i));
    return g;
}

KnnGraph build_cross_knn(const Matrix& queries, const Matrix& refs, std::size_t k, double sigma) {
    if (k == 0) throw std::invalid_argument("build_cross_knn: k must be >= 1");
    if (k > refs.rows)
        throw std::invalid_argument("build_cross_knn: k=" + std::to_string(k) + " exceeds " +
                                    std::to_string(refs.rows) + " reference rows");
    if (queries.cols != refs.cols)
        throw std::invalid_argument("build_cross_knn: dimension mismatch");
    if (sigma <= 0.0) throw std::invalid_argument("build_cross_knn: sigma must be > 0");

    KnnGraph g;
    g.n_nodes = queries.rows;
    g.n_targets = refs.rows;
    g.k = k;
    g.sigma = sigma;
    g.bipartite = true;
    g.neighbors.resize(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i)
        g.neighbors[i] = select_neighbors(queries.row(i), refs, k, sigma, -1);
    return g;
}

SymmetricGraph symmetrize(const KnnGraph& g, bool raw_weights) {
    if (g.bipartite) throw std::invalid_argument("symmetrize: bipartite graph");
    std::map<std::pair<std::size_t, std::size_t>, double> best;
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
        for (const auto& e : g.neighbors[i]) {
            auto key = std::minmax(i, e.target);
            double w = raw_weights ? e.w : e.p;
            auto [it, inserted] = best.emplace(key, w);
            if (!inserted && w > it->second) it->second = w;
        }
    }
    SymmetricGraph s;
    s.n_nodes = g.n_nodes;
    s.k = g.k;
    s.sigma = g.sigma;
    s.edges.reserve(best.size());
    for (const auto& [key, w] : best) s.edges.push_back({key.first, key.second, w});
    return s;
}

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

void write_graph(const std::string& path, const KnnGraph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << g.n_nodes << "," << g.k << "," << fmt9(g.sigma) << ",1\n";
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        for (const auto& e : g.neighbors[i])
            out << i << "," << e.target << "," << fmt9(e.p) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_graph(const std::string& path, const SymmetricGraph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << g.n_nodes << "," << g.k << "," << fmt9(g.sigma) << ",0\n";
    for (const auto& e : g.edges) out << e.u << "," << e.v << "," << fmt9(e.weight) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace graphkd
