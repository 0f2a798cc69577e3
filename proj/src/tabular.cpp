#include "graphkd/tabular.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace graphkd {

namespace {

constexpr double kStdFloor = 1e-6;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

bool is_missing_token(const std::string& cell) {
    if (cell.empty()) return true;
    std::string low;
    for (char c : cell) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return low == "nan" || low == "na";
}

double parse_numeric_cell(const std::string& cell, std::size_t line_no, const std::string& col) {
    const std::string t = trim(cell);
    if (is_missing_token(t)) return std::numeric_limits<double>::quiet_NaN();
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": column '" + col + "' has non-numeric value '" + t + "'");
    }
    if (pos != t.size())
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": column '" + col + "' has non-numeric value '" + t + "'");
    return v;
}

std::string format_numeric_cell(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ColumnRole parse_column_role(const std::string& s) {
    if (s == "id") return ColumnRole::Id;
    if (s == "label") return ColumnRole::Label;
    if (s == "numeric") return ColumnRole::Numeric;
    if (s == "categorical") return ColumnRole::Categorical;
    if (s == "embedding") return ColumnRole::Embedding;
    if (s == "feature") return ColumnRole::Feature;
    throw std::runtime_error("schema error: unknown column role '" + s + "'");
}

std::string column_role_name(ColumnRole r) {
    switch (r) {
        case ColumnRole::Id: return "id";
        case ColumnRole::Label: return "label";
        case ColumnRole::Numeric: return "numeric";
        case ColumnRole::Categorical: return "categorical";
        case ColumnRole::Embedding: return "embedding";
        case ColumnRole::Feature: return "feature";
    }
    return "?";
}

const ColumnRole* Schema::role_of(const std::string& name) const {
    for (const auto& [n, r] : columns)
        if (n == name) return &r;
    return nullptr;
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema: " + path);
    Schema schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t comma = t.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("schema error at line " + std::to_string(line_no) +
                                     ": expected 'name,role'");
        std::string name = trim(t.substr(0, comma));
        std::string role = trim(t.substr(comma + 1));
        if (schema.role_of(name))
            throw std::runtime_error("schema error: column '" + name + "' listed twice");
        schema.columns.emplace_back(name, parse_column_role(role));
    }
    return schema;
}

void write_schema(const std::string& path, const Schema& schema) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    for (const auto& [name, role] : schema.columns)
        out << name << "," << column_role_name(role) << "\n";
}

RawCohortFile load_cohort(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cohort file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty cohort file: " + path);
    std::vector<std::string> header_cells = split_csv_line(header);
    for (auto& c : header_cells) c = trim(c);

    // Both directions must agree: every file column has a role, every schema
    // column exists in the file.
    std::vector<ColumnRole> roles(header_cells.size());
    for (std::size_t c = 0; c < header_cells.size(); ++c) {
        const ColumnRole* r = schema.role_of(header_cells[c]);
        if (!r) throw std::runtime_error("schema error: file column '" + header_cells[c] +
                                         "' has no role in schema");
        roles[c] = *r;
    }
    for (const auto& [name, role] : schema.columns) {
        (void)role;
        if (std::find(header_cells.begin(), header_cells.end(), name) == header_cells.end())
            throw std::runtime_error("schema error: schema column '" + name +
                                     "' not present in file " + path);
    }

    int id_col = -1, label_col = -1;
    std::vector<std::size_t> numeric_cols, categorical_cols, embedding_cols, feature_cols;
    for (std::size_t c = 0; c < roles.size(); ++c) {
        switch (roles[c]) {
            case ColumnRole::Id:
                if (id_col >= 0) throw std::runtime_error("schema error: two id columns");
                id_col = static_cast<int>(c);
                break;
            case ColumnRole::Label:
                if (label_col >= 0) throw std::runtime_error("schema error: two label columns");
                label_col = static_cast<int>(c);
                break;
            case ColumnRole::Numeric: numeric_cols.push_back(c); break;
            case ColumnRole::Categorical: categorical_cols.push_back(c); break;
            case ColumnRole::Embedding: embedding_cols.push_back(c); break;
            case ColumnRole::Feature: feature_cols.push_back(c); break;
        }
    }
    if (id_col < 0) throw std::runtime_error("schema error: no id column");
    if (label_col < 0) throw std::runtime_error("schema error: no label column");

    RawCohortFile raw;
    for (std::size_t c : numeric_cols) raw.numeric_names.push_back(header_cells[c]);
    for (std::size_t c : categorical_cols) raw.categorical_names.push_back(header_cells[c]);

    std::vector<double> numeric_values;
    std::vector<double> embedding_values;
    std::vector<double> feature_values;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header_cells.size())
            throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header_cells.size()) + " cells, got " +
                                     std::to_string(cells.size()));

        std::string id = trim(cells[static_cast<std::size_t>(id_col)]);
        if (id.empty())
            throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": empty patient id");
        if (!seen_ids.insert(id).second)
            throw std::runtime_error("duplicate patient id '" + id + "' at line " + std::to_string(line_no));
        raw.ids.push_back(id);

        std::string lab = trim(cells[static_cast<std::size_t>(label_col)]);
        if (lab != "0" && lab != "1")
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": label must be 0 or 1, got '" + lab + "'");
        raw.labels.push_back(lab == "1" ? 1 : 0);

        for (std::size_t c : numeric_cols)
            numeric_values.push_back(parse_numeric_cell(cells[c], line_no, header_cells[c]));
        std::vector<std::string> cats;
        for (std::size_t c : categorical_cols) cats.push_back(trim(cells[c]));
        raw.categorical.push_back(std::move(cats));
        for (std::size_t c : embedding_cols) {
            double v = parse_numeric_cell(cells[c], line_no, header_cells[c]);
            if (std::isnan(v))
                throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                         ": embedding column '" + header_cells[c] + "' missing");
            embedding_values.push_back(v);
        }
        for (std::size_t c : feature_cols) {
            double v = parse_numeric_cell(cells[c], line_no, header_cells[c]);
            if (std::isnan(v))
                throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                         ": feature column '" + header_cells[c] + "' missing");
            feature_values.push_back(v);
        }
    }

    const std::size_t n = raw.ids.size();
    raw.numeric = Matrix(n, numeric_cols.size());
    raw.numeric.data = std::move(numeric_values);
    if (!embedding_cols.empty()) {
        raw.embeddings = Matrix(n, embedding_cols.size());
        raw.embeddings.data = std::move(embedding_values);
    }
    if (!feature_cols.empty()) {
        raw.features = Matrix(n, feature_cols.size());
        raw.features.data = std::move(feature_values);
    }
    return raw;
}

void write_cohort_csv(const std::string& path, const RawCohortFile& raw) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "patient_id,label";
    for (const auto& n : raw.numeric_names) out << "," << n;
    for (const auto& n : raw.categorical_names) out << "," << n;
    out << "\n";
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        out << raw.ids[r] << "," << raw.labels[r];
        for (std::size_t c = 0; c < raw.numeric.cols; ++c)
            out << "," << format_numeric_cell(raw.numeric.at(r, c));
        for (std::size_t c = 0; c < raw.categorical_names.size(); ++c)
            out << "," << raw.categorical[r][c];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

RawCohortFile subset_rows(const RawCohortFile& raw, std::span<const std::size_t> idx) {
    RawCohortFile out;
    out.numeric_names = raw.numeric_names;
    out.categorical_names = raw.categorical_names;
    out.numeric = Matrix(idx.size(), raw.numeric.cols);
    if (!raw.embeddings.empty()) out.embeddings = Matrix(idx.size(), raw.embeddings.cols);
    if (!raw.features.empty()) out.features = Matrix(idx.size(), raw.features.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::size_t r = idx[i];
        if (r >= raw.n_rows()) throw std::out_of_range("subset_rows: index out of range");
        out.ids.push_back(raw.ids[r]);
        out.labels.push_back(raw.labels[r]);
        out.categorical.push_back(raw.categorical[r]);
        out.numeric.set_row(i, raw.numeric.row(r));
        if (!raw.embeddings.empty()) out.embeddings.set_row(i, raw.embeddings.row(r));
        if (!raw.features.empty()) out.features.set_row(i, raw.features.row(r));
    }
    return out;
}

RawCohortFile concat_rows(const RawCohortFile& a, const RawCohortFile& b) {
    if (a.numeric_names != b.numeric_names || a.categorical_names != b.categorical_names)
        throw std::runtime_error("concat_rows: cohorts have different biomarker columns");
    RawCohortFile out;
    out.numeric_names = a.numeric_names;
    out.categorical_names = a.categorical_names;
    out.ids = a.ids;
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.categorical = a.categorical;
    out.categorical.insert(out.categorical.end(), b.categorical.begin(), b.categorical.end());
    out.numeric = Matrix(a.n_rows() + b.n_rows(), a.numeric.cols);
    for (std::size_t r = 0; r < a.n_rows(); ++r) out.numeric.set_row(r, a.numeric.row(r));
    for (std::size_t r = 0; r < b.n_rows(); ++r) out.numeric.set_row(a.n_rows() + r, b.numeric.row(r));
    // Embeddings/features are cohort-specific and intentionally dropped here;
    // concatenation is only used to fit a shared biomarker scaler.
    return out;
}

namespace {

void attach_matrix(RawCohortFile& raw, const std::vector<std::string>& sidecar_ids,
                   const Matrix& m, Matrix& target, const char* what) {
    if (sidecar_ids.size() != m.rows)
        throw std::runtime_error(std::string(what) + ": id list has " + std::to_string(sidecar_ids.size()) +
                                 " entries but matrix has " + std::to_string(m.rows) + " rows");
    std::unordered_map<std::string, std::size_t> cohort_pos;
    for (std::size_t i = 0; i < raw.ids.size(); ++i) cohort_pos[raw.ids[i]] = i;

    std::vector<std::vector<std::vector<double>>> scans(raw.ids.size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        auto it = cohort_pos.find(sidecar_ids[r]);
        if (it == cohort_pos.end())
            throw std::runtime_error(std::string(what) + ": sidecar id '" + sidecar_ids[r] +
                                     "' not in cohort");
        auto row = m.row(r);
        scans[it->second].emplace_back(row.begin(), row.end());
    }

    target = Matrix(raw.ids.size(), m.cols);
    for (std::size_t i = 0; i < raw.ids.size(); ++i) {
        if (scans[i].empty())
            throw std::runtime_error(std::string(what) + ": no sidecar row for patient '" + raw.ids[i] + "'");
        // Multiple rows per patient are per-scan vectors; average them.
        std::vector<double> avg(m.cols, 0.0);
        for (const auto& s : scans[i])
            for (std::size_t c = 0; c < m.cols; ++c) avg[c] += s[c];
        for (std::size_t c = 0; c < m.cols; ++c) avg[c] /= static_cast<double>(scans[i].size());
        target.set_row(i, avg);
    }
}

}  // namespace

void attach_embeddings(RawCohortFile& raw, const std::vector<std::string>& sidecar_ids, const Matrix& m) {
    attach_matrix(raw, sidecar_ids, m, raw.embeddings, "attach_embeddings");
}

void attach_features(RawCohortFile& raw, const std::vector<std::string>& sidecar_ids, const Matrix& m) {
    attach_matrix(raw, sidecar_ids, m, raw.features, "attach_features");
}

std::size_t Scaler::output_dim() const {
    std::size_t d = mean.size();
    for (const auto& v : vocab) d += v.size();
    return d;
}

Scaler fit_preprocessor(const RawCohortFile& raw, bool standardize) {
    if (raw.n_rows() < 2) throw std::runtime_error("fit_preprocessor: need at least 2 rows");
    Scaler s;
    s.standardize = standardize;
    const std::size_t ncols = raw.numeric.cols;
    s.mean.resize(ncols, 0.0);
    s.stddev.resize(ncols, 1.0);
    for (std::size_t c = 0; c < ncols; ++c) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t seen = 0;
        for (std::size_t r = 0; r < raw.n_rows(); ++r) {
            double v = raw.numeric.at(r, c);
            if (std::isnan(v)) continue;
            sum += v;
            sumsq += v * v;
            ++seen;
        }
        if (seen == 0)
            throw std::runtime_error("fit_preprocessor: numeric column '" + raw.numeric_names[c] +
                                     "' has no observed values");
        double mean = sum / static_cast<double>(seen);
        double var = std::max(0.0, sumsq / static_cast<double>(seen) - mean * mean);
        double sd = std::sqrt(var);  // population convention
        if (sd < kStdFloor) sd = 1.0;
        s.mean[c] = mean;
        s.stddev[c] = sd;
    }
    for (std::size_t c = 0; c < raw.categorical_names.size(); ++c) {
        std::vector<std::string> vocab;
        for (std::size_t r = 0; r < raw.n_rows(); ++r) {
            const std::string& v = raw.categorical[r][c];
            if (std::find(vocab.begin(), vocab.end(), v) == vocab.end()) vocab.push_back(v);
        }
        s.vocab.push_back(std::move(vocab));
    }
    return s;
}

CohortTable apply_preprocessor(const RawCohortFile& raw, const Scaler& scaler) {
    if (raw.numeric.cols != scaler.mean.size())
        throw std::runtime_error("apply_preprocessor: numeric arity mismatch");
    if (raw.categorical_names.size() != scaler.vocab.size())
        throw std::runtime_error("apply_preprocessor: categorical arity mismatch");

    CohortTable out;
    out.ids = raw.ids;
    out.labels = raw.labels;
    out.embeddings = raw.embeddings;
    out.features = raw.features;
    out.scaler = scaler;

    const std::size_t n = raw.n_rows();
    out.biomarkers = Matrix(n, scaler.output_dim());
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t o = 0;
        for (std::size_t c = 0; c < raw.numeric.cols; ++c) {
            double v = raw.numeric.at(r, c);
            if (std::isnan(v)) v = scaler.mean[c];  // train-fold mean imputation
            out.biomarkers.at(r, o++) =
                scaler.standardize ? (v - scaler.mean[c]) / scaler.stddev[c] : v;
        }
        for (std::size_t c = 0; c < scaler.vocab.size(); ++c) {
            const auto& vocab = scaler.vocab[c];
            const std::string& v = raw.categorical[r][c];
            auto it = std::find(vocab.begin(), vocab.end(), v);
            for (std::size_t j = 0; j < vocab.size(); ++j)
                out.biomarkers.at(r, o + j) = 0.0;
            if (it != vocab.end())  // unseen category stays an all-zero block
                out.biomarkers.at(r, o + static_cast<std::size_t>(it - vocab.begin())) = 1.0;
            o += vocab.size();
        }
    }
    return out;
}

void assert_disjoint_ids(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::unordered_set<std::string> set_a(a.begin(), a.end());
    std::set<std::string> shared;
    for (const auto& id : b)
        if (set_a.count(id)) shared.insert(id);
    if (!shared.empty()) {
        std::string msg = "cohorts are not disjoint; shared patient ids:";
        for (const auto& id : shared) msg += " " + id;
        throw std::runtime_error(msg);
    }
}

void assert_disjoint(const CohortTable& a, const CohortTable& b) {
    assert_disjoint_ids(a.ids, b.ids);
}

}  // namespace graphkd
