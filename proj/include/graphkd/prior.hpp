#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphkd/graph.hpp"
#include "graphkd/matrix.hpp"

namespace graphkd {

// Per-patient imputed teacher priors. Rows are unit L2 norm. gated[i] is
// false only when the same-label neighborhood was empty and the ungated
// fallback was used (and for prior constructors that never gate).
struct PriorSet {
    Matrix priors;
    std::vector<std::uint8_t> gated;
    std::vector<std::vector<std::size_t>> neighbor_ids;  // reference rows actually used

    double fallback_rate() const;
};

// Mean of per-scan embeddings for one patient.
std::vector<double> average_scan_embeddings(const std::vector<std::vector<double>>& scans);

// One-step residual propagation: out_i = alpha*z_i + (1-alpha)*sum_j p_ij z_j.
Matrix smooth_embeddings(const Matrix& z0, const KnnGraph& g, double alpha);

// Label-gated cross-cohort imputation: retrieve top-k reference neighbors by
// biomarker cosine distance, keep same-label ones (fall back to the full
// neighborhood when none share the label), renormalize the Gaussian weights
// over the kept set, average the smoothed embeddings, L2-normalize.
PriorSet impute_priors(const Matrix& query_bio, const Matrix& ref_bio, const Matrix& ref_smoothed,
                       const std::vector<int>& query_labels, const std::vector<int>& ref_labels,
                       std::size_t k, double sigma);

// Same retrieval and weighting with the gating step skipped.
PriorSet ungated_knn_prior(const Matrix& query_bio, const Matrix& ref_bio, const Matrix& ref_smoothed,
                           std::size_t k, double sigma);

// Cohort-level baselines: every patient receives the unit-normalized cohort
// mean, or the mean of its own class.
std::vector<double> global_mean_prior(const Matrix& ref_smoothed);
std::pair<std::vector<double>, std::vector<double>> global_class_mean_prior(
    const Matrix& ref_smoothed, const std::vector<int>& ref_labels);

// Sidecar matrix plus a "patient_id,gated,neighbor_ids..." text manifest.
void write_prior_set(const std::string& matrix_path, const std::string& ids_path,
                     const std::string& manifest_path, const PriorSet& priors,
                     const std::vector<std::string>& patient_ids,
                     const std::vector<std::string>& ref_ids);

}  // namespace graphkd
