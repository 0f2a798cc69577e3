#pragma once

#include <string>
#include <utility>
#include <vector>

#include "graphkd/trainer.hpp"

namespace graphkd {

// Per-fold report: one "metric,value" line per metric, 9 significant digits.
void write_fold_report(const std::string& path, const FoldResult& fold);
std::vector<std::pair<std::string, double>> read_kv_report(const std::string& path);

// Aggregate over folds: "metric,mean,std" lines.
void write_aggregate_report(const std::string& path, const CvResult& cv);

struct AggregateRow {
    std::string metric;
    MetricStats stats;
};
std::vector<AggregateRow> read_aggregate_report(const std::string& path);

// One ablation configuration's cross-validation outcome.
struct AblationRow {
    std::string method;
    MetricStats auc, auprc, sensitivity, specificity, f1;
};

// Aligned text table, columns Method/AUC/AUPRC/Sens/Spec/F1, cells
// "mean±std" with three decimals.
std::string emit_ablation_table(const std::vector<AblationRow>& rows);
std::vector<AblationRow> parse_ablation_table(const std::string& table);

}  // namespace graphkd
