#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "graphkd/graph.hpp"
#include "graphkd/rng.hpp"
#include "oracles.hpp"

using namespace graphkd;
namespace fs = std::filesystem;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) m.set_row(r, rows[r]);
    return m;
}

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("cosine distance endpoints") {
    std::vector<double> a{1.0, 0.0};
    std::vector<double> a_scaled{5.0, 0.0};
    std::vector<double> b{0.0, 2.0};
    std::vector<double> neg{-3.0, 0.0};
    CHECK(cosine_distance(a, a_scaled) == doctest::Approx(0.0));
    CHECK(cosine_distance(a, b) == doctest::Approx(1.0));
    CHECK(cosine_distance(a, neg) == doctest::Approx(2.0));
    std::vector<double> zero{0.0, 0.0};
    CHECK(cosine_distance(zero, a) == 1.0);
    CHECK_THROWS(cosine_distance(a, std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("gaussian weight") {
    CHECK(gaussian_weight(1.0, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(gaussian_weight(0.0, 0.7) == 1.0);
    CHECK(gaussian_weight(0.5, 2.0) == doctest::Approx(std::exp(-0.0625)));
    CHECK_THROWS(gaussian_weight(1.0, 0.0));
    CHECK_THROWS(gaussian_weight(1.0, -1.0));
}

TEST_CASE("three identical points, k=1: each links to the lowest-index other") {
    Matrix pts = from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    KnnGraph g = build_knn_graph(pts, 1, 1.0);
    REQUIRE(g.neighbors.size() == 3);
    CHECK(g.neighbors[0][0].target == 1);  // self excluded
    CHECK(g.neighbors[1][0].target == 0);
    CHECK(g.neighbors[2][0].target == 0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g.neighbors[i][0].w == doctest::Approx(1.0));
        CHECK(g.neighbors[i][0].p == doctest::Approx(1.0));
    }
}

TEST_CASE("nearest neighbor by cosine: (1,0),(0.9,0.1),(0,1) with k=1") {
    Matrix pts = from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}});
    KnnGraph g = build_knn_graph(pts, 1, 1.0);
    CHECK(g.neighbors[0][0].target == 1);
    CHECK(g.neighbors[1][0].target == 0);
    CHECK(g.neighbors[2][0].target == 1);
}

TEST_CASE("cross retrieval weights at distances 0.1 and 0.3") {
    Matrix queries = from_rows({{1.0, 0.0}});
    Matrix refs = from_rows({{0.9, std::sqrt(1.0 - 0.81)},    // cos = 0.9 -> d = 0.1
                             {0.7, std::sqrt(1.0 - 0.49)}});  // cos = 0.7 -> d = 0.3
    KnnGraph g = build_cross_knn(queries, refs, 2, 1.0);
    REQUIRE(g.bipartite);
    REQUIRE(g.neighbors[0].size() == 2);
    double w0 = std::exp(-0.01), w1 = std::exp(-0.09);
    CHECK(g.neighbors[0][0].target == 0);
    CHECK(g.neighbors[0][0].w == doctest::Approx(w0).epsilon(1e-12));
    CHECK(g.neighbors[0][1].w == doctest::Approx(w1).epsilon(1e-12));
    CHECK(g.neighbors[0][0].p == doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
    CHECK(g.neighbors[0][1].p == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
}

TEST_CASE("cross retrieval: exact match gets raw weight 1; k may reach all refs") {
    Matrix refs = from_rows({{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}});
    Matrix queries = from_rows({{2.0, 0.0}});  // same direction as ref 0
    KnnGraph g1 = build_cross_knn(queries, refs, 1, 1.0);
    CHECK(g1.neighbors[0][0].target == 0);
    CHECK(g1.neighbors[0][0].w == doctest::Approx(1.0));
    CHECK(g1.neighbors[0][0].p == doctest::Approx(1.0));

    KnnGraph g3 = build_cross_knn(queries, refs, 3, 1.0);  // k == refs.rows saturates
    CHECK(g3.neighbors[0].size() == 3);
    double psum = 0;
    for (const auto& e : g3.neighbors[0]) psum += e.p;
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equal distances break ties toward the lower reference index") {
    double y = std::sqrt(1.0 - 0.81);
    Matrix refs = from_rows({{0.9, y}, {0.9, -y}, {0.0, 1.0}});  // refs 0,1 both at d=0.1
    Matrix queries = from_rows({{1.0, 0.0}});
    KnnGraph g = build_cross_knn(queries, refs, 1, 1.0);
    CHECK(g.neighbors[0][0].target == 0);
}

TEST_CASE("rows are probability distributions") {
    Matrix pts = random_points(23, 6, 11);
    KnnGraph g = build_knn_graph(pts, 5, 0.8);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
        REQUIRE(g.neighbors[i].size() == 5);
        double psum = 0;
        for (const auto& e : g.neighbors[i]) {
            CHECK(e.p > 0.0);
            CHECK(e.target != i);
            psum += e.p;
        }
        CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("matches the exhaustive oracle on random data") {
    Matrix pts = random_points(40, 5, 29);
    for (std::size_t k : {1ul, 3ul, 7ul}) {
        KnnGraph g = build_knn_graph(pts, k, 1.3);
        for (std::size_t i = 0; i < pts.rows; ++i) {
            auto expect = oracle::knn_row(pts.row(i), pts, k, 1.3, static_cast<long>(i));
            REQUIRE(g.neighbors[i].size() == expect.size());
            for (std::size_t j = 0; j < expect.size(); ++j) {
                CHECK(g.neighbors[i][j].target == expect[j].idx);
                CHECK(g.neighbors[i][j].w == doctest::Approx(expect[j].w).epsilon(1e-12));
                CHECK(g.neighbors[i][j].p == doctest::Approx(expect[j].p).epsilon(1e-12));
            }
        }
    }

    Matrix queries = random_points(9, 5, 31);
    KnnGraph cg = build_cross_knn(queries, pts, 4, 0.9);
    for (std::size_t i = 0; i < queries.rows; ++i) {
        auto expect = oracle::knn_row(queries.row(i), pts, 4, 0.9);
        for (std::size_t j = 0; j < expect.size(); ++j) {
            CHECK(cg.neighbors[i][j].target == expect[j].idx);
            CHECK(cg.neighbors[i][j].p == doctest::Approx(expect[j].p).epsilon(1e-12));
        }
    }
}

TEST_CASE("parameter validation") {
    Matrix pts = random_points(5, 3, 1);
    CHECK_THROWS(build_knn_graph(Matrix(1, 3, 1.0), 1, 1.0));  // n < 2
    CHECK_THROWS(build_knn_graph(pts, 0, 1.0));
    CHECK_THROWS(build_knn_graph(pts, 5, 1.0));  // k must be <= n-1
    CHECK_NOTHROW(build_knn_graph(pts, 4, 1.0));
    CHECK_THROWS(build_knn_graph(pts, 2, 0.0));
    CHECK_THROWS(build_cross_knn(pts, pts, 6, 1.0));       // k > refs
    CHECK_NOTHROW(build_cross_knn(pts, pts, 5, 1.0));      // k == refs is fine
    CHECK_THROWS(build_cross_knn(pts, Matrix(4, 2, 1.0), 2, 1.0));  // dim mismatch
}

TEST_CASE("symmetrize takes the union with max weight") {
    // A and B pick each other; C picks B but B does not pick C.
    Matrix pts = from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.5, 0.5}});
    KnnGraph g = build_knn_graph(pts, 1, 1.0);
    REQUIRE(g.neighbors[2][0].target == 1);
    SymmetricGraph s = symmetrize(g);
    REQUIRE(s.edges.size() == 2);
    CHECK(s.edges[0].u == 0);
    CHECK(s.edges[0].v == 1);
    CHECK(s.edges[1].u == 1);
    CHECK(s.edges[1].v == 2);
    double d_bc = cosine_distance(pts.row(1), pts.row(2));
    CHECK(s.edges[1].weight == doctest::Approx(gaussian_weight(d_bc, 1.0)).epsilon(1e-12));
    CHECK(s.n_nodes == 3);
    CHECK(s.k == 1);
}

TEST_CASE("symmetrize weight choice agrees with a direct union-max recount") {
    Matrix pts = random_points(15, 4, 77);
    KnnGraph g = build_knn_graph(pts, 3, 1.0);
    for (bool raw : {true, false}) {
        SymmetricGraph s = symmetrize(g, raw);
        for (const auto& e : s.edges) {
            double expect = -1.0;
            bool found = false;
            for (auto [a, b] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
                for (const auto& d : g.neighbors[a])
                    if (d.target == b) {
                        expect = std::max(expect, raw ? d.w : d.p);
                        found = true;
                    }
            }
            REQUIRE(found);
            CHECK(e.weight == doctest::Approx(expect).epsilon(1e-12));
            CHECK(e.u < e.v);
        }
        // Every directed edge must appear in the undirected set.
        std::size_t covered = 0;
        for (std::size_t i = 0; i < g.n_nodes; ++i)
            for (const auto& d : g.neighbors[i]) {
                auto [lo, hi] = std::minmax(i, d.target);
                for (const auto& e : s.edges)
                    if (e.u == lo && e.v == hi) {
                        ++covered;
                        break;
                    }
            }
        CHECK(covered == g.n_nodes * g.k);
    }
    CHECK_THROWS(symmetrize(build_cross_knn(pts, pts, 2, 1.0)));
}

TEST_CASE("text export format") {
    Matrix pts = from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}});
    KnnGraph g = build_knn_graph(pts, 2, 0.5);
    fs::path dir = fs::temp_directory_path() / "graphkd_graph_tests";
    fs::create_directories(dir);
    fs::path p = dir / "g.csv";
    write_graph(p.string(), g);

    std::ifstream in(p);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "3,2,0.5,1");
    std::size_t edge_lines = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++edge_lines;
        std::size_t commas = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
        CHECK(commas == 2);
    }
    CHECK(edge_lines == 6);  // n * k

    fs::path ps = dir / "s.csv";
    write_graph(ps.string(), symmetrize(g));
    std::ifstream ins(ps);
    REQUIRE(std::getline(ins, header));
    CHECK(header == "3,2,0.5,0");
}

}  // TEST_SUITE
