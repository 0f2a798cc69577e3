#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "graphkd/graph.hpp"
#include "graphkd/prior.hpp"
#include "graphkd/rng.hpp"
#include "oracles.hpp"

using namespace graphkd;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) m.set_row(r, rows[r]);
    return m;
}

Matrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        double nrm = 0;
        for (std::size_t c = 0; c < d; ++c) {
            m.at(r, c) = rng.gaussian();
            nrm += m.at(r, c) * m.at(r, c);
        }
        nrm = std::sqrt(nrm);
        for (std::size_t c = 0; c < d; ++c) m.at(r, c) /= nrm;
    }
    return m;
}

std::vector<int> alternating_labels(std::size_t n) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
    return y;
}

}  // namespace

TEST_SUITE("prior") {

TEST_CASE("scan averaging") {
    CHECK(average_scan_embeddings({{1.0, 0.0}}) == std::vector<double>{1.0, 0.0});
    auto two = average_scan_embeddings({{1.0, 0.0}, {0.0, 1.0}});
    CHECK(two[0] == doctest::Approx(0.5));
    CHECK(two[1] == doctest::Approx(0.5));
    auto cancel = average_scan_embeddings({{2.0, 2.0}, {-2.0, -2.0}});
    CHECK(cancel[0] == doctest::Approx(0.0));
    CHECK(cancel[1] == doctest::Approx(0.0));
    CHECK_THROWS(average_scan_embeddings({}));
    CHECK_THROWS(average_scan_embeddings({{1.0}, {1.0, 2.0}}));
}

TEST_CASE("smoothing with alpha=1 is bit-identical to the input") {
    Matrix z = random_unit_rows(12, 4, 3);
    KnnGraph g = build_knn_graph(z, 3, 1.0);
    Matrix out = smooth_embeddings(z, g, 1.0);
    for (std::size_t i = 0; i < z.data.size(); ++i) CHECK(out.data[i] == z.data[i]);
}

TEST_CASE("smoothing with alpha=0 equals the dense row-stochastic product") {
    Matrix z = random_unit_rows(15, 6, 5);
    KnnGraph g = build_knn_graph(z, 4, 0.9);
    Matrix out = smooth_embeddings(z, g, 0.0);
    // Dense P assembled independently from the edge lists.
    Matrix P(z.rows, z.rows);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (const auto& e : g.neighbors[i]) P.at(i, e.target) = e.p;
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t c = 0; c < z.cols; ++c) {
            double want = 0;
            for (std::size_t j = 0; j < z.rows; ++j) want += P.at(i, j) * z.at(j, c);
            CHECK(out.at(i, c) == doctest::Approx(want).epsilon(1e-9));
        }
}

TEST_CASE("one-step smoothing example: 0.9*(1,0) + 0.1*(0,1)") {
    // Orthogonal pair with k=1: each node's only neighbor is the other.
    Matrix z = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    KnnGraph g = build_knn_graph(z, 1, 1.0);
    Matrix out = smooth_embeddings(z, g, 0.9);
    CHECK(out.at(0, 0) == doctest::Approx(0.9));
    CHECK(out.at(0, 1) == doctest::Approx(0.1));
    CHECK(out.at(1, 0) == doctest::Approx(0.1));
    CHECK(out.at(1, 1) == doctest::Approx(0.9));
    // No output re-normalization: the row norm drifts below 1.
    CHECK(norm2(out.row(0)) == doctest::Approx(std::sqrt(0.82)));
}

TEST_CASE("smoothing is linear in the embeddings") {
    Matrix base = random_unit_rows(10, 3, 7);
    KnnGraph g = build_knn_graph(base, 2, 1.0);
    Matrix z1 = random_unit_rows(10, 5, 8);
    Matrix z2 = random_unit_rows(10, 5, 9);
    Matrix combo(10, 5);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = 2.0 * z1.data[i] - 0.5 * z2.data[i];
    Matrix a = smooth_embeddings(z1, g, 0.6);
    Matrix b = smooth_embeddings(z2, g, 0.6);
    Matrix c = smooth_embeddings(combo, g, 0.6);
    for (std::size_t i = 0; i < c.data.size(); ++i)
        CHECK(c.data[i] == doctest::Approx(2.0 * a.data[i] - 0.5 * b.data[i]).epsilon(1e-9));
}

TEST_CASE("smoothed coordinates stay in the convex hull of the involved rows") {
    Matrix z = random_unit_rows(14, 4, 13);
    KnnGraph g = build_knn_graph(z, 3, 1.0);
    Matrix out = smooth_embeddings(z, g, 0.9);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t c = 0; c < z.cols; ++c) {
            double lo = z.at(i, c), hi = z.at(i, c);
            for (const auto& e : g.neighbors[i]) {
                lo = std::min(lo, z.at(e.target, c));
                hi = std::max(hi, z.at(e.target, c));
            }
            CHECK(out.at(i, c) >= lo - 1e-12);
            CHECK(out.at(i, c) <= hi + 1e-12);
        }
}

TEST_CASE("smoothing validates its inputs") {
    Matrix z = random_unit_rows(6, 3, 1);
    KnnGraph g = build_knn_graph(z, 2, 1.0);
    CHECK_THROWS(smooth_embeddings(random_unit_rows(5, 3, 2), g, 0.5));  // row mismatch
    CHECK_THROWS(smooth_embeddings(z, g, 1.5));
    CHECK_THROWS(smooth_embeddings(z, g, -0.1));
    CHECK_THROWS(smooth_embeddings(z, build_cross_knn(z, z, 2, 1.0), 0.5));
}

TEST_CASE("k=1 prior collapses to the single neighbor's embedding, normalized") {
    Matrix ref_bio = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    Matrix ref_emb = from_rows({{0.6, 0.0, 0.0}, {0.0, 0.3, 0.4}});
    Matrix query = from_rows({{0.9, 0.1}});
    PriorSet ps = ungated_knn_prior(query, ref_bio, ref_emb, 1, 1.0);
    CHECK(ps.priors.at(0, 0) == doctest::Approx(1.0));  // (0.6,0,0) normalized
    CHECK(ps.priors.at(0, 1) == doctest::Approx(0.0));
    CHECK(ps.neighbor_ids[0] == std::vector<std::size_t>{0});
    CHECK(ps.gated[0] == 0);  // ungated path never sets the flag
}

TEST_CASE("gating is a no-op when every retrieved neighbor shares the label") {
    Matrix ref_bio = random_unit_rows(8, 3, 21);
    Matrix ref_emb = random_unit_rows(8, 5, 22);
    Matrix query = random_unit_rows(3, 3, 23);
    std::vector<int> all_ones(8, 1);
    std::vector<int> q_ones(3, 1);
    PriorSet gated = impute_priors(query, ref_bio, ref_emb, q_ones, all_ones, 4, 1.0);
    PriorSet ungated = ungated_knn_prior(query, ref_bio, ref_emb, 4, 1.0);
    for (std::size_t i = 0; i < gated.priors.data.size(); ++i)
        CHECK(gated.priors.data[i] == ungated.priors.data[i]);
    for (auto f : gated.gated) CHECK(f == 1);
    CHECK(gated.fallback_rate() == 0.0);
}

TEST_CASE("empty same-label neighborhood falls back to the ungated set") {
    // All reference labels oppose the query label, so gating must fall back.
    Matrix ref_bio = random_unit_rows(6, 3, 31);
    Matrix ref_emb = random_unit_rows(6, 4, 32);
    Matrix query = random_unit_rows(2, 3, 33);
    std::vector<int> ref_labels(6, 0);
    std::vector<int> query_labels(2, 1);
    PriorSet ps = impute_priors(query, ref_bio, ref_emb, query_labels, ref_labels, 3, 1.0);
    PriorSet ungated = ungated_knn_prior(query, ref_bio, ref_emb, 3, 1.0);
    for (std::size_t i = 0; i < ps.priors.data.size(); ++i)
        CHECK(ps.priors.data[i] == ungated.priors.data[i]);
    for (auto f : ps.gated) CHECK(f == 0);
    CHECK(ps.fallback_rate() == 1.0);
}

TEST_CASE("matches the exhaustive imputation oracle (q=3, n=6, k=3)") {
    Matrix ref_bio = random_unit_rows(6, 4, 41);
    Matrix ref_emb = random_unit_rows(6, 5, 42);
    Matrix query = random_unit_rows(3, 4, 43);
    std::vector<int> ref_labels = alternating_labels(6);
    std::vector<int> query_labels{1, 0, 1};
    PriorSet ps = impute_priors(query, ref_bio, ref_emb, query_labels, ref_labels, 3, 0.8);
    for (std::size_t u = 0; u < 3; ++u) {
        auto [want, gated] =
            oracle::impute_row(query.row(u), query_labels[u], ref_bio, ref_labels, ref_emb, 3, 0.8);
        CHECK(ps.gated[u] == (gated ? 1 : 0));
        for (std::size_t c = 0; c < 5; ++c)
            CHECK(ps.priors.at(u, c) == doctest::Approx(want[c]).epsilon(1e-12));
    }
}

TEST_CASE("matches the oracle on a larger random instance") {
    Matrix ref_bio = random_unit_rows(30, 6, 51);
    Matrix ref_emb = random_unit_rows(30, 8, 52);
    Matrix query = random_unit_rows(10, 6, 53);
    std::vector<int> ref_labels = alternating_labels(30);
    std::vector<int> query_labels = alternating_labels(10);
    PriorSet ps = impute_priors(query, ref_bio, ref_emb, query_labels, ref_labels, 5, 1.2);
    for (std::size_t u = 0; u < 10; ++u) {
        auto [want, gated] =
            oracle::impute_row(query.row(u), query_labels[u], ref_bio, ref_labels, ref_emb, 5, 1.2);
        CHECK(ps.gated[u] == (gated ? 1 : 0));
        for (std::size_t c = 0; c < 8; ++c)
            CHECK(ps.priors.at(u, c) == doctest::Approx(want[c]).epsilon(1e-12));
    }
}

TEST_CASE("priors come back unit norm") {
    Matrix ref_bio = random_unit_rows(20, 5, 61);
    Matrix ref_emb = random_unit_rows(20, 7, 62);
    Matrix query = random_unit_rows(6, 5, 63);
    PriorSet ps = ungated_knn_prior(query, ref_bio, ref_emb, 6, 1.0);
    for (std::size_t u = 0; u < ps.priors.rows; ++u)
        CHECK(norm2(ps.priors.row(u)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perturbing opposite-label reference embeddings leaves gated priors bit-identical") {
    Matrix ref_bio = random_unit_rows(12, 4, 71);
    Matrix ref_emb = random_unit_rows(12, 6, 72);
    Matrix query = random_unit_rows(4, 4, 73);
    // Query labels all 1; half the references are label 1 so every query
    // retrieves at least one same-label neighbor with k = 12.
    std::vector<int> ref_labels = alternating_labels(12);
    std::vector<int> query_labels(4, 1);
    PriorSet before = impute_priors(query, ref_bio, ref_emb, query_labels, ref_labels, 12, 1.0);
    for (auto f : before.gated) REQUIRE(f == 1);

    Matrix tampered = ref_emb;
    Rng rng(74);
    for (std::size_t r = 0; r < tampered.rows; ++r)
        if (ref_labels[r] == 0)
            for (std::size_t c = 0; c < tampered.cols; ++c) tampered.at(r, c) += rng.gaussian();
    PriorSet after = impute_priors(query, ref_bio, tampered, query_labels, ref_labels, 12, 1.0);
    for (std::size_t i = 0; i < before.priors.data.size(); ++i)
        CHECK(before.priors.data[i] == after.priors.data[i]);
}

TEST_CASE("global mean prior: rows (1,0),(0,1) normalize to (0.7071,0.7071)") {
    Matrix emb = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<double> mean = global_mean_prior(emb);
    CHECK(mean[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(mean[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK_THROWS(global_mean_prior(Matrix()));
}

TEST_CASE("class mean prior splits by label and rejects single-class cohorts") {
    Matrix emb = from_rows({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
    std::vector<int> labels{0, 1, 0};
    auto [neg, pos] = global_class_mean_prior(emb, labels);
    CHECK(neg[0] == doctest::Approx(1.0));
    CHECK(neg[1] == doctest::Approx(0.0));
    CHECK(pos[0] == doctest::Approx(0.0));
    CHECK(pos[1] == doctest::Approx(1.0));
    CHECK_THROWS(global_class_mean_prior(emb, std::vector<int>{1, 1, 1}));
    CHECK_THROWS(global_class_mean_prior(emb, std::vector<int>{0, 1}));  // count mismatch
}

TEST_CASE("prior set export writes the gated flag and neighbor ids") {
    Matrix ref_bio = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    Matrix ref_emb = from_rows({{1.0, 0.0}, {0.0, 1.0}});
    Matrix query = from_rows({{1.0, 0.1}});
    PriorSet ps = impute_priors(query, ref_bio, ref_emb, {1}, {1, 0}, 2, 1.0);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "graphkd_prior_tests";
    fs::create_directories(dir);
    write_prior_set((dir / "p.bin").string(), (dir / "p.ids").string(),
                    (dir / "p_manifest.csv").string(), ps, {"F0001"}, {"M0001", "M0002"});
    Matrix back = read_matrix_f32((dir / "p.bin").string());
    CHECK(back.rows == 1);
    CHECK(back.cols == 2);
    std::ifstream in(dir / "p_manifest.csv");
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "F0001,1,M0001");  // gated to the single same-label neighbor
    CHECK(read_id_list((dir / "p.ids").string()) == std::vector<std::string>{"F0001"});
}

TEST_CASE("imputation validates sizes") {
    Matrix ref_bio = random_unit_rows(4, 3, 81);
    Matrix ref_emb = random_unit_rows(4, 5, 82);
    Matrix query = random_unit_rows(2, 3, 83);
    CHECK_THROWS(impute_priors(query, ref_bio, ref_emb, {1}, alternating_labels(4), 2, 1.0));
    CHECK_THROWS(impute_priors(query, ref_bio, random_unit_rows(3, 5, 84),
                               alternating_labels(2), alternating_labels(4), 2, 1.0));
    CHECK_THROWS(ungated_knn_prior(query, ref_bio, ref_emb, 5, 1.0));  // k > refs
}

}  // TEST_SUITE
