#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "graphkd/graph.hpp"
#include "graphkd/matrix.hpp"

namespace graphkd {

struct LossWeights {
    double cls = 1.0;
    double prior = 1.0;
    double rel = 1.0;
};

// Graph edges restricted to a minibatch, endpoints as batch positions.
struct BatchEdge {
    std::size_t u, v;
    double weight;
};

// Mean binary cross-entropy computed directly from logits (log-sum-exp
// form, safe for large magnitudes). Gradient per logit: (sigmoid(l)-y)/|B|.
std::pair<double, std::vector<double>> cls_loss(std::span<const double> logits,
                                                std::span<const int> labels);

// Mean cosine distance to the fixed priors: mean(1 - z_u . zhat_u). Both
// sides must arrive unit-norm (checked to 1e-6). Gradient per row:
// -zhat_u/|B|; the model's normalization Jacobian handles the projection.
std::pair<double, Matrix> prior_loss(const Matrix& z, const Matrix& priors);

// Weighted mean over edges of pi*(cos(z_u,z_v) - cos(zhat_u,zhat_v))^2,
// normalized by sum(pi) (floored at 1e-12). Empty edge set gives loss 0 and
// zero gradients.
std::pair<double, Matrix> rel_loss(const Matrix& z, const Matrix& priors,
                                   const std::vector<BatchEdge>& edges);

double total_loss(double cls, double prior, double rel, const LossWeights& w);

// Graph edges whose endpoints both sit in the batch and share a label.
// batch_nodes maps batch position -> graph node; labels are per graph node.
std::vector<BatchEdge> collect_batch_edges(std::span<const std::size_t> batch_nodes,
                                           std::span<const int> labels,
                                           const SymmetricGraph& g);

}  // namespace graphkd
