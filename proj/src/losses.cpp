#include "graphkd/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "graphkd/student.hpp"

namespace graphkd {

namespace {

constexpr double kRelNormFloor = 1e-12;
constexpr double kUnitNormTol = 1e-6;

void check_unit_rows(const Matrix& m, const char* what) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double n = norm2(m.row(r));
        if (std::abs(n - 1.0) > kUnitNormTol)
            throw std::invalid_argument(std::string(what) + ": row " + std::to_string(r) +
                                        " has norm " + std::to_string(n) + ", expected 1");
    }
}

}  // namespace

std::pair<double, std::vector<double>> cls_loss(std::span<const double> logits,
                                                std::span<const int> labels) {
    if (logits.empty()) throw std::invalid_argument("cls_loss: empty batch");
    if (logits.size() != labels.size()) throw std::invalid_argument("cls_loss: size mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    double loss = 0.0;
    std::vector<double> grad(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        double l = logits[i];
        double y = static_cast<double>(labels[i]);
        loss += std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::abs(l)));
        grad[i] = (sigmoid(l) - y) * inv_n;
    }
    return {loss * inv_n, std::move(grad)};
}

std::pair<double, Matrix> prior_loss(const Matrix& z, const Matrix& priors) {
    if (z.rows != priors.rows || z.cols != priors.cols)
        throw std::invalid_argument("prior_loss: shape mismatch");
    if (z.rows == 0) throw std::invalid_argument("prior_loss: empty batch");
    check_unit_rows(z, "prior_loss: embeddings");
    check_unit_rows(priors, "prior_loss: priors");

    const double inv_n = 1.0 / static_cast<double>(z.rows);
    double loss = 0.0;
    Matrix grad(z.rows, z.cols);
    for (std::size_t r = 0; r < z.rows; ++r) {
        loss += 1.0 - dot(z.row(r), priors.row(r));
        for (std::size_t c = 0; c < z.cols; ++c) grad.at(r, c) = -priors.at(r, c) * inv_n;
    }
    return {loss * inv_n, std::move(grad)};
}

std::pair<double, Matrix> rel_loss(const Matrix& z, const Matrix& priors,
                                   const std::vector<BatchEdge>& edges) {
    Matrix grad(z.rows, z.cols);
    if (edges.empty()) return {0.0, std::move(grad)};
    if (z.rows != priors.rows || z.cols != priors.cols)
        throw std::invalid_argument("rel_loss: shape mismatch");
    check_unit_rows(z, "rel_loss: embeddings");
    check_unit_rows(priors, "rel_loss: priors");

    double wsum = 0.0;
    for (const auto& e : edges) {
        if (e.u >= z.rows || e.v >= z.rows) throw std::out_of_range("rel_loss: edge index out of batch");
        wsum += e.weight;
    }
    double norm = std::max(wsum, kRelNormFloor);

    double loss = 0.0;
    for (const auto& e : edges) {
        auto zu = z.row(e.u), zv = z.row(e.v);
        double cos_z = dot(zu, zv);  // rows are unit norm
        double cos_t = dot(priors.row(e.u), priors.row(e.v));
        double resid = cos_z - cos_t;
        loss += e.weight * resid * resid;

        // d cos(z_u,z_v)/dz_u at unit norm: z_v - (z_u.z_v) z_u
        double scale = 2.0 * e.weight * resid / norm;
        for (std::size_t c = 0; c < z.cols; ++c) {
            grad.at(e.u, c) += scale * (zv[c] - cos_z * zu[c]);
            grad.at(e.v, c) += scale * (zu[c] - cos_z * zv[c]);
        }
    }
    return {loss / norm, std::move(grad)};
}

double total_loss(double cls, double prior, double rel, const LossWeights& w) {
    return w.cls * cls + w.prior * prior + w.rel * rel;
}

std::vector<BatchEdge> collect_batch_edges(std::span<const std::size_t> batch_nodes,
                                           std::span<const int> labels,
                                           const SymmetricGraph& g) {
    std::unordered_map<std::size_t, std::size_t> pos;
    for (std::size_t i = 0; i < batch_nodes.size(); ++i) {
        if (batch_nodes[i] >= g.n_nodes)
            throw std::out_of_range("collect_batch_edges: node index out of range");
        pos[batch_nodes[i]] = i;
    }
    std::vector<BatchEdge> out;
    for (const auto& e : g.edges) {
        auto iu = pos.find(e.u);
        auto iv = pos.find(e.v);
        if (iu == pos.end() || iv == pos.end()) continue;
        if (labels[e.u] != labels[e.v]) continue;  // same-label gating
        out.push_back({iu->second, iv->second, e.weight});
    }
    return out;
}

}  // namespace graphkd
