#include "graphkd/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace graphkd {

namespace {

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
    std::size_t pos = 0, neg = 0;
    for (int y : labels) (y == 1 ? pos : neg)++;
    return {pos, neg};
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
    auto [pos, neg] = class_counts(labels);
    if (pos == 0 || neg == 0) throw std::invalid_argument("auc: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tied groups, then the rank-sum statistic
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auprc: size mismatch");
    auto [pos, neg] = class_counts(labels);
    (void)neg;
    if (pos == 0) throw std::invalid_argument("auprc: at least one positive required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t tp_inc = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++tp_inc;
            ++j;
        }
        // all tied items enter the ranking together
        tp += tp_inc;
        seen = j;
        if (tp_inc > 0) {
            double precision = static_cast<double>(tp) / static_cast<double>(seen);
            double recall_inc = static_cast<double>(tp_inc) / static_cast<double>(pos);
            ap += precision * recall_inc;
        }
        i = j;
    }
    return ap;
}

Confusion confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                            double threshold) {
    if (scores.size() != labels.size()) throw std::invalid_argument("confusion_metrics: size mismatch");
    auto [pos, neg] = class_counts(labels);
    if (pos == 0 || neg == 0) throw std::invalid_argument("confusion_metrics: both classes required");

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] > threshold;
        if (labels[i] == 1)
            (pred ? tp : fn)++;
        else
            (pred ? fp : tn)++;
    }
    Confusion c{};
    c.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    c.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    std::size_t f1_den = 2 * tp + fp + fn;
    c.f1 = f1_den == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(f1_den);
    return c;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
    EvalReport r;
    r.auc = auc(scores, labels);
    r.auprc = auprc(scores, labels);
    Confusion c = confusion_metrics(scores, labels, threshold);
    r.sensitivity = c.sensitivity;
    r.specificity = c.specificity;
    r.f1 = c.f1;
    r.threshold = threshold;
    auto [pos, neg] = class_counts(labels);
    r.n_pos = pos;
    r.n_neg = neg;
    return r;
}

}  // namespace graphkd
