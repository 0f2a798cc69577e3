#include "graphkd/prior.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace graphkd {

double PriorSet::fallback_rate() const {
    if (gated.empty()) return 0.0;
    std::size_t fallbacks = 0;
    for (auto g : gated)
        if (!g) ++fallbacks;
    return static_cast<double>(fallbacks) / static_cast<double>(gated.size());
}

std::vector<double> average_scan_embeddings(const std::vector<std::vector<double>>& scans) {
    if (scans.empty()) throw std::invalid_argument("average_scan_embeddings: empty scan list");
    const std::size_t d = scans[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& s : scans) {
        if (s.size() != d) throw std::invalid_argument("average_scan_embeddings: dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) mean[i] += s[i];
    }
    for (double& v : mean) v /= static_cast<double>(scans.size());
    return mean;
}

Matrix smooth_embeddings(const Matrix& z0, const KnnGraph& g, double alpha) {
    if (g.n_nodes != z0.rows)
        throw std::invalid_argument("smooth_embeddings: graph has " + std::to_string(g.n_nodes) +
                                    " nodes, embeddings have " + std::to_string(z0.rows) + " rows");
    if (g.bipartite) throw std::invalid_argument("smooth_embeddings: bipartite graph");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("smooth_embeddings: alpha must be in [0,1]");

    Matrix out(z0.rows, z0.cols);
    for (std::size_t i = 0; i < z0.rows; ++i) {
        for (std::size_t c = 0; c < z0.cols; ++c) out.at(i, c) = alpha * z0.at(i, c);
        for (const auto& e : g.neighbors[i]) {
            double scale = (1.0 - alpha) * e.p;
            for (std::size_t c = 0; c < z0.cols; ++c) out.at(i, c) += scale * z0.at(e.target, c);
        }
    }
    return out;
}

namespace {

PriorSet impute_impl(const Matrix& query_bio, const Matrix& ref_bio, const Matrix& ref_smoothed,
                     const std::vector<int>* query_labels, const std::vector<int>* ref_labels,
                     std::size_t k, double sigma) {
    if (ref_bio.rows != ref_smoothed.rows)
        throw std::invalid_argument("impute_priors: reference biomarkers and embeddings disagree");
    if (k > ref_bio.rows)
        throw std::invalid_argument("impute_priors: k=" + std::to_string(k) + " exceeds reference cohort size " +
                                    std::to_string(ref_bio.rows));

    KnnGraph retrieval = build_cross_knn(query_bio, ref_bio, k, sigma);
    const std::size_t d = ref_smoothed.cols;

    PriorSet out;
    out.priors = Matrix(query_bio.rows, d);
    out.gated.resize(query_bio.rows, 0);
    out.neighbor_ids.resize(query_bio.rows);

    for (std::size_t u = 0; u < query_bio.rows; ++u) {
        const auto& retrieved = retrieval.neighbors[u];

        std::vector<const GraphEdge*> used;
        bool gated = false;
        if (query_labels) {
            int label = (*query_labels)[u];
            for (const auto& e : retrieved)
                if ((*ref_labels)[e.target] == label) used.push_back(&e);
            gated = !used.empty();
        }
        if (used.empty())  // ungated retrieval, or gated set empty
            for (const auto& e : retrieved) used.push_back(&e);

        double wsum = 0.0;
        for (const auto* e : used) wsum += e->w;

        std::vector<double> prior(d, 0.0);
        for (const auto* e : used) {
            double p = e->w / wsum;
            for (std::size_t c = 0; c < d; ++c) prior[c] += p * ref_smoothed.at(e->target, c);
            out.neighbor_ids[u].push_back(e->target);
        }

        double n = norm2(prior);
        if (n == 0.0)
            throw std::runtime_error("impute_priors: imputed prior for patient index " +
                                     std::to_string(u) + " has zero norm, cannot normalize");
        for (double& v : prior) v /= n;
        out.priors.set_row(u, prior);
        out.gated[u] = gated ? 1 : 0;
    }
    return out;
}

std::vector<double> normalized_mean(const Matrix& rows, const std::vector<std::size_t>& idx,
                                    const char* what) {
    if (idx.empty()) throw std::invalid_argument(std::string(what) + ": empty set");
    std::vector<double> mean(rows.cols, 0.0);
    for (std::size_t r : idx)
        for (std::size_t c = 0; c < rows.cols; ++c) mean[c] += rows.at(r, c);
    for (double& v : mean) v /= static_cast<double>(idx.size());
    double n = norm2(mean);
    if (n == 0.0) throw std::runtime_error(std::string(what) + ": mean embedding has zero norm");
    for (double& v : mean) v /= n;
    return mean;
}

}  // namespace

PriorSet impute_priors(const Matrix& query_bio, const Matrix& ref_bio, const Matrix& ref_smoothed,
                       const std::vector<int>& query_labels, const std::vector<int>& ref_labels,
                       std::size_t k, double sigma) {
    if (query_labels.size() != query_bio.rows || ref_labels.size() != ref_bio.rows)
        throw std::invalid_argument("impute_priors: label count mismatch");
    return impute_impl(query_bio, ref_bio, ref_smoothed, &query_labels, &ref_labels, k, sigma);
}

PriorSet ungated_knn_prior(const Matrix& query_bio, const Matrix& ref_bio, const Matrix& ref_smoothed,
                           std::size_t k, double sigma) {
    return impute_impl(query_bio, ref_bio, ref_smoothed, nullptr, nullptr, k, sigma);
}

std::vector<double> global_mean_prior(const Matrix& ref_smoothed) {
    if (ref_smoothed.rows == 0) throw std::invalid_argument("global_mean_prior: empty cohort");
    std::vector<std::size_t> all(ref_smoothed.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return normalized_mean(ref_smoothed, all, "global_mean_prior");
}

std::pair<std::vector<double>, std::vector<double>> global_class_mean_prior(
    const Matrix& ref_smoothed, const std::vector<int>& ref_labels) {
    if (ref_labels.size() != ref_smoothed.rows)
        throw std::invalid_argument("global_class_mean_prior: label count mismatch");
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < ref_labels.size(); ++i)
        (ref_labels[i] == 1 ? pos : neg).push_back(i);
    if (neg.empty() || pos.empty())
        throw std::invalid_argument("global_class_mean_prior: a class is absent from the cohort");
    return {normalized_mean(ref_smoothed, neg, "global_class_mean_prior"),
            normalized_mean(ref_smoothed, pos, "global_class_mean_prior")};
}

void write_prior_set(const std::string& matrix_path, const std::string& ids_path,
                     const std::string& manifest_path, const PriorSet& priors,
                     const std::vector<std::string>& patient_ids,
                     const std::vector<std::string>& ref_ids) {
    write_matrix_f32(matrix_path, priors.priors);
    write_id_list(ids_path, patient_ids);
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("cannot open for write: " + manifest_path);
    for (std::size_t u = 0; u < patient_ids.size(); ++u) {
        out << patient_ids[u] << "," << (priors.gated[u] ? 1 : 0);
        for (std::size_t j : priors.neighbor_ids[u]) out << "," << ref_ids[j];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + manifest_path);
}

}  // namespace graphkd
