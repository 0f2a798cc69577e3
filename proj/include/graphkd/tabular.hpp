#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphkd/matrix.hpp"

namespace graphkd {

enum class ColumnRole { Id, Label, Numeric, Categorical, Embedding, Feature };

ColumnRole parse_column_role(const std::string& s);
std::string column_role_name(ColumnRole r);

// Maps column names to roles. File form: one "name,role" pair per line,
// '#' comments and blank lines allowed.
struct Schema {
    std::vector<std::pair<std::string, ColumnRole>> columns;

    const ColumnRole* role_of(const std::string& name) const;
};

Schema load_schema(const std::string& path);
void write_schema(const std::string& path, const Schema& schema);

// One cohort as loaded, before preprocessing. Missing numeric cells are NaN.
struct RawCohortFile {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<std::string> numeric_names;
    std::vector<std::string> categorical_names;
    Matrix numeric;                                     // NaN marks a missing cell
    std::vector<std::vector<std::string>> categorical;  // [row][categorical column]
    Matrix embeddings;                                  // empty unless provided
    Matrix features;                                    // empty unless provided

    std::size_t n_rows() const { return ids.size(); }
};

RawCohortFile load_cohort(const std::string& path, const Schema& schema);
void write_cohort_csv(const std::string& path, const RawCohortFile& raw);

RawCohortFile subset_rows(const RawCohortFile& raw, std::span<const std::size_t> idx);
RawCohortFile concat_rows(const RawCohortFile& a, const RawCohortFile& b);

// Attaches a sidecar matrix by patient id. Repeated ids in the sidecar are
// scan-level rows and get averaged into one row per patient.
void attach_embeddings(RawCohortFile& raw, const std::vector<std::string>& sidecar_ids, const Matrix& m);
void attach_features(RawCohortFile& raw, const std::vector<std::string>& sidecar_ids, const Matrix& m);

// Per-column standardization statistics plus categorical vocabularies,
// fitted on training rows only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;                      // 1.0 for (near-)constant columns
    std::vector<std::vector<std::string>> vocab;     // first-appearance order
    bool standardize = true;

    std::size_t output_dim() const;
};

Scaler fit_preprocessor(const RawCohortFile& raw, bool standardize = true);

// Preprocessed cohort: biomarkers are numeric columns (standardized, missing
// imputed with the stored column mean) followed by one-hot blocks.
struct CohortTable {
    std::vector<std::string> ids;
    std::vector<int> labels;
    Matrix biomarkers;
    Matrix embeddings;
    Matrix features;
    Scaler scaler;
};

CohortTable apply_preprocessor(const RawCohortFile& raw, const Scaler& scaler);

// Fails iff the id sets intersect; the error message lists the shared ids.
void assert_disjoint(const CohortTable& a, const CohortTable& b);
void assert_disjoint_ids(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace graphkd
