#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphkd/graph.hpp"
#include "graphkd/losses.hpp"
#include "graphkd/matrix.hpp"
#include "graphkd/metrics.hpp"
#include "graphkd/prior.hpp"
#include "graphkd/student.hpp"
#include "graphkd/tabular.hpp"

namespace graphkd {

enum class PriorMode { GatedKnn, UngatedKnn, ClassMean, GlobalMean };
enum class Optimizer { Sgd, Adam };

PriorMode parse_prior_mode(const std::string& s);
std::string prior_mode_name(PriorMode m);
Optimizer parse_optimizer(const std::string& s);
std::string optimizer_name(Optimizer o);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double learning_rate = 1e-4;
    double lambda_cls = 1.0;
    double lambda_prior = 1.0;
    double lambda_rel = 1.0;
    int k_mri = 20;
    int k_fundus = 5;
    double sigma = 1.0;
    double alpha = 0.9;       // residual weight on the node's own embedding
    std::uint64_t seed = 0;
    bool distill = true;      // prior-alignment loss
    bool rel = true;          // relational loss
    bool smooth = true;       // smooth teacher embeddings before imputation
    PriorMode prior_mode = PriorMode::GatedKnn;
    int n_folds = 5;
    Optimizer optimizer = Optimizer::Sgd;
    int embed_dim = 64;       // must match the teacher embedding width when distilling
    int bio_embed_dim = 16;
    bool standardize = true;
    bool shared_scaler = true;   // fit the scaler on reference + training rows
    bool sym_raw_weights = true; // symmetrized edges carry raw Gaussian weights
    int jobs = 1;
};

void validate_config(const TrainConfig& cfg);

// Applies one "key=value" assignment; unknown keys or malformed values throw.
void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value);
TrainConfig load_train_config(const std::string& path);
void write_train_config(const std::string& path, const TrainConfig& cfg);

struct FoldSplit {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
};

// Per-class shuffle (seeded) followed by round-robin assignment, so every
// fold's class mix tracks the cohort's. Each class needs >= n_folds members.
std::vector<FoldSplit> stratified_kfold(std::span<const int> labels, std::size_t n_folds,
                                        std::uint64_t seed);

// Threshold maximizing sensitivity + specificity - 1 over midpoints of
// adjacent distinct scores plus below-min/above-max guards; ties resolve to
// the lowest threshold.
double youden_threshold(std::span<const double> scores, std::span<const int> labels);

// Everything derived from the reference cohort and the training rows only.
struct FoldArtifacts {
    CohortTable mri;             // preprocessed reference cohort
    CohortTable train;           // preprocessed training rows
    KnnGraph mri_graph;          // k_mri graph over reference biomarkers
    Matrix smoothed;             // teacher embeddings after optional smoothing
    PriorSet priors;             // one prior per training row (empty if unused)
    SymmetricGraph train_graph;  // k_fundus graph over training biomarkers
};

FoldArtifacts prepare_fold(const RawCohortFile& mri, const RawCohortFile& fundus,
                           std::span<const std::size_t> train_idx, const TrainConfig& cfg);

struct FitResult {
    StudentParams params;
    double threshold = 0.5;          // Youden threshold on training scores
    std::vector<double> loss_curve;  // mean batch loss per epoch
};

FitResult fit_student(const CohortTable& train, const PriorSet& priors,
                      const SymmetricGraph& train_graph, const TrainConfig& cfg);

// sigmoid(logit) per row
std::vector<double> predict_scores(const StudentParams& p, const CohortTable& t);

struct FoldResult {
    FoldSplit split;
    FoldArtifacts artifacts;
    FitResult fit;
    EvalReport report;
    double gated_fallback_rate = 0.0;
};

FoldResult run_fold(const RawCohortFile& mri, const RawCohortFile& fundus, const FoldSplit& split,
                    const TrainConfig& cfg);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

MetricStats stats_of(std::span<const double> xs);

struct CvResult {
    std::vector<FoldResult> folds;
    MetricStats auc, auprc, sensitivity, specificity, f1;
    double mean_fallback_rate = 0.0;
};

CvResult run_cv(const RawCohortFile& mri, const RawCohortFile& fundus, const TrainConfig& cfg);

}  // namespace graphkd
