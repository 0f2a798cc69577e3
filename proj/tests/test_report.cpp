#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "graphkd/report.hpp"

using namespace graphkd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "graphkd_report_tests";
    fs::create_directories(dir);
    return dir;
}

FoldResult demo_fold() {
    FoldResult f;
    f.report.auc = 0.8512345678;
    f.report.auprc = 0.79;
    f.report.sensitivity = 0.75;
    f.report.specificity = 0.7;
    f.report.f1 = 0.72;
    f.report.threshold = 0.4375;
    f.report.n_pos = 11;
    f.report.n_neg = 12;
    f.gated_fallback_rate = 0.125;
    f.fit.loss_curve = {1.0, 0.5, 0.25};
    return f;
}

double value_of(const std::vector<std::pair<std::string, double>>& rows, const std::string& key) {
    for (const auto& [k, v] : rows)
        if (k == key) return v;
    throw std::runtime_error("missing key " + key);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("fold report round-trips all metrics") {
    fs::path p = temp_dir() / "fold.csv";
    write_fold_report(p.string(), demo_fold());
    auto rows = read_kv_report(p.string());
    CHECK(rows.size() == 10);
    CHECK(rows[0].first == "auc");
    CHECK(value_of(rows, "auc") == doctest::Approx(0.8512345678).epsilon(1e-9));
    CHECK(value_of(rows, "threshold") == doctest::Approx(0.4375));
    CHECK(value_of(rows, "n_pos") == 11.0);
    CHECK(value_of(rows, "n_neg") == 12.0);
    CHECK(value_of(rows, "gated_fallback_rate") == doctest::Approx(0.125));
    CHECK(value_of(rows, "final_train_loss") == doctest::Approx(0.25));
}

TEST_CASE("fold report omits the loss line when no training happened") {
    FoldResult f = demo_fold();
    f.fit.loss_curve.clear();
    fs::path p = temp_dir() / "fold_noloss.csv";
    write_fold_report(p.string(), f);
    auto rows = read_kv_report(p.string());
    CHECK(rows.size() == 9);
    CHECK_THROWS(value_of(rows, "final_train_loss"));
}

TEST_CASE("kv reader rejects malformed lines") {
    fs::path p = temp_dir() / "bad.csv";
    std::ofstream(p) << "auc,0.5\nbroken line\n";
    CHECK_THROWS(read_kv_report(p.string()));
    CHECK_THROWS(read_kv_report((temp_dir() / "missing.csv").string()));
}

TEST_CASE("aggregate report writes mean and std per metric") {
    CvResult cv;
    cv.folds.resize(2);
    cv.folds[0].gated_fallback_rate = 0.1;
    cv.folds[1].gated_fallback_rate = 0.3;
    cv.auc = {0.85, 0.01};
    cv.auprc = {0.8, 0.02};
    cv.sensitivity = {0.75, 0.03};
    cv.specificity = {0.7, 0.04};
    cv.f1 = {0.72, 0.05};
    fs::path p = temp_dir() / "aggregate.csv";
    write_aggregate_report(p.string(), cv);
    auto rows = read_aggregate_report(p.string());
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].metric == "auc");
    CHECK(rows[0].stats.mean == doctest::Approx(0.85));
    CHECK(rows[0].stats.stddev == doctest::Approx(0.01));
    CHECK(rows[5].metric == "gated_fallback_rate");
    CHECK(rows[5].stats.mean == doctest::Approx(0.2));
    CHECK(rows[5].stats.stddev == doctest::Approx(0.1));
}

TEST_CASE("ablation table renders aligned columns with mean±std cells") {
    std::vector<AblationRow> rows(2);
    rows[0].method = "supervised";
    rows[0].auc = {0.781, 0.012};
    rows[0].auprc = {0.75, 0.02};
    rows[0].sensitivity = {0.7, 0.03};
    rows[0].specificity = {0.72, 0.01};
    rows[0].f1 = {0.71, 0.02};
    rows[1].method = "full";
    rows[1].auc = {0.8551234, 0.0149876};
    rows[1].auprc = {0.82, 0.02};
    rows[1].sensitivity = {0.78, 0.02};
    rows[1].specificity = {0.8, 0.01};
    rows[1].f1 = {0.79, 0.015};

    std::string table = emit_ablation_table(rows);
    std::istringstream in(table);
    std::string header, line1, line2;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, line1));
    REQUIRE(std::getline(in, line2));
    CHECK(header.find("Method") == 0);
    CHECK(header.find("AUC") != std::string::npos);
    CHECK(header.find("F1") != std::string::npos);
    CHECK(line1.find("supervised") == 0);
    CHECK(line1.find("0.781±0.012") != std::string::npos);
    CHECK(line2.find("0.855±0.015") != std::string::npos);  // three decimals, rounded

    // columns align: the AUC cells start at the same offset in display chars
    auto display_prefix = [](const std::string& s, const std::string& needle) {
        std::size_t byte = s.find(needle);
        std::size_t w = 0;
        for (std::size_t i = 0; i < byte; ++i)
            if ((static_cast<unsigned char>(s[i]) & 0xc0) != 0x80) ++w;
        return w;
    };
    CHECK(display_prefix(line1, "0.781") == display_prefix(line2, "0.855"));
    CHECK(display_prefix(header, "AUC") == display_prefix(line1, "0.781"));
}

TEST_CASE("ablation table parses back to the emitted values") {
    std::vector<AblationRow> rows(3);
    const char* names[3] = {"supervised", "distill", "full"};
    for (int i = 0; i < 3; ++i) {
        rows[i].method = names[i];
        double base = 0.7 + 0.05 * i;
        rows[i].auc = {base, 0.01};
        rows[i].auprc = {base - 0.02, 0.02};
        rows[i].sensitivity = {base - 0.04, 0.03};
        rows[i].specificity = {base - 0.01, 0.01};
        rows[i].f1 = {base - 0.03, 0.02};
    }
    auto parsed = parse_ablation_table(emit_ablation_table(rows));
    REQUIRE(parsed.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(parsed[i].method == names[i]);
        CHECK(parsed[i].auc.mean == doctest::Approx(rows[i].auc.mean).epsilon(1e-3));
        CHECK(parsed[i].auc.stddev == doctest::Approx(rows[i].auc.stddev).epsilon(1e-3));
        CHECK(parsed[i].f1.mean == doctest::Approx(rows[i].f1.mean).epsilon(1e-3));
    }
}

TEST_CASE("a single-row table still parses") {
    std::vector<AblationRow> rows(1);
    rows[0].method = "full";
    rows[0].auc = {0.855, 0.014};
    rows[0].auprc = {0.02, 0.0};
    rows[0].sensitivity = {0.5, 0.1};
    rows[0].specificity = {0.5, 0.1};
    rows[0].f1 = {0.5, 0.1};
    auto parsed = parse_ablation_table(emit_ablation_table(rows));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].method == "full");
    CHECK(parsed[0].auc.mean == doctest::Approx(0.855));
}

TEST_CASE("table parser rejects garbage") {
    CHECK_THROWS(parse_ablation_table(""));
    CHECK_THROWS(parse_ablation_table("NotAHeader row row row row row\n"));
    CHECK_THROWS(parse_ablation_table("Method AUC AUPRC Sens Spec F1\nfull 0.8 0.7 0.6 0.5\n"));
    CHECK_THROWS(
        parse_ablation_table("Method AUC AUPRC Sens Spec F1\nfull 0.8 0.7 0.6 0.5 0.4\n"));
}

}  // TEST_SUITE
