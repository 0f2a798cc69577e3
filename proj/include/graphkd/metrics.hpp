#pragma once

#include <cstddef>
#include <span>

namespace graphkd {

struct Confusion {
    double sensitivity;
    double specificity;
    double f1;
};

struct EvalReport {
    double auc = 0.0;
    double auprc = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Mann-Whitney AUC: P(score+ > score-) + 0.5*P(tie), exact via average ranks.
double auc(std::span<const double> scores, std::span<const int> labels);

// Average precision, descending-score sweep with tied scores grouped.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Predict positive iff score > threshold (strict). F1 is 0 when its
// denominator is 0.
Confusion confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                            double threshold);

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold);

}  // namespace graphkd
