#include "graphkd/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphkd {

namespace {

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

constexpr const char* kPlusMinus = "±";

}  // namespace

void write_fold_report(const std::string& path, const FoldResult& fold) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path);
    out << "auc," << fmt9(fold.report.auc) << "\n";
    out << "auprc," << fmt9(fold.report.auprc) << "\n";
    out << "sensitivity," << fmt9(fold.report.sensitivity) << "\n";
    out << "specificity," << fmt9(fold.report.specificity) << "\n";
    out << "f1," << fmt9(fold.report.f1) << "\n";
    out << "threshold," << fmt9(fold.report.threshold) << "\n";
    out << "n_pos," << fold.report.n_pos << "\n";
    out << "n_neg," << fold.report.n_neg << "\n";
    out << "gated_fallback_rate," << fmt9(fold.gated_fallback_rate) << "\n";
    if (!fold.fit.loss_curve.empty())
        out << "final_train_loss," << fmt9(fold.fit.loss_curve.back()) << "\n";
    if (!out) throw std::runtime_error("failed writing report " + path);
}

std::vector<std::pair<std::string, double>> read_kv_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path);
    std::vector<std::pair<std::string, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (parts.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected metric,value");
        rows.emplace_back(parts[0], std::stod(parts[1]));
    }
    return rows;
}

void write_aggregate_report(const std::string& path, const CvResult& cv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path);
    auto line = [&](const char* name, const MetricStats& s) {
        out << name << "," << fmt9(s.mean) << "," << fmt9(s.stddev) << "\n";
    };
    line("auc", cv.auc);
    line("auprc", cv.auprc);
    line("sensitivity", cv.sensitivity);
    line("specificity", cv.specificity);
    line("f1", cv.f1);
    std::vector<double> fallbacks;
    for (const auto& f : cv.folds) fallbacks.push_back(f.gated_fallback_rate);
    line("gated_fallback_rate", stats_of(fallbacks));
    if (!out) throw std::runtime_error("failed writing report " + path);
}

std::vector<AggregateRow> read_aggregate_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path);
    std::vector<AggregateRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (parts.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected metric,mean,std");
        rows.push_back({parts[0], {std::stod(parts[1]), std::stod(parts[2])}});
    }
    return rows;
}

std::string emit_ablation_table(const std::vector<AblationRow>& rows) {
    const char* headers[6] = {"Method", "AUC", "AUPRC", "Sens", "Spec", "F1"};
    std::vector<std::array<std::string, 6>> cells;
    for (const auto& r : rows) {
        auto cell = [&](const MetricStats& s) { return fmt3(s.mean) + kPlusMinus + fmt3(s.stddev); };
        cells.push_back({r.method, cell(r.auc), cell(r.auprc), cell(r.sensitivity),
                         cell(r.specificity), cell(r.f1)});
    }
    // column widths in display characters; the ± sign is two bytes but one column
    auto display_width = [](const std::string& s) {
        std::size_t w = 0;
        for (char c : s)
            if ((static_cast<unsigned char>(c) & 0xc0) != 0x80) ++w;
        return w;
    };
    std::size_t width[6];
    for (int c = 0; c < 6; ++c) {
        width[c] = display_width(headers[c]);
        for (const auto& row : cells) width[c] = std::max(width[c], display_width(row[c]));
    }
    std::ostringstream out;
    auto emit_row = [&](const std::array<std::string, 6>& row) {
        for (int c = 0; c < 6; ++c) {
            out << row[c];
            if (c < 5) out << std::string(width[c] - display_width(row[c]) + 2, ' ');
        }
        out << "\n";
    };
    emit_row({headers[0], headers[1], headers[2], headers[3], headers[4], headers[5]});
    for (const auto& row : cells) emit_row(row);
    return out.str();
}

std::vector<AblationRow> parse_ablation_table(const std::string& table) {
    std::istringstream in(table);
    std::string line;
    std::vector<AblationRow> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (!header_seen) {
            if (toks.size() != 6 || toks[0] != "Method")
                throw std::runtime_error("ablation table: bad header line");
            header_seen = true;
            continue;
        }
        if (toks.size() != 6) throw std::runtime_error("ablation table: bad row '" + line + "'");
        auto cell = [&](const std::string& s) {
            std::size_t p = s.find(kPlusMinus);
            if (p == std::string::npos)
                throw std::runtime_error("ablation table: bad cell '" + s + "'");
            MetricStats ms;
            ms.mean = std::stod(s.substr(0, p));
            ms.stddev = std::stod(s.substr(p + std::string(kPlusMinus).size()));
            return ms;
        };
        AblationRow r;
        r.method = toks[0];
        r.auc = cell(toks[1]);
        r.auprc = cell(toks[2]);
        r.sensitivity = cell(toks[3]);
        r.specificity = cell(toks[4]);
        r.f1 = cell(toks[5]);
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw std::runtime_error("ablation table: empty input");
    return rows;
}

}  // namespace graphkd
