#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "graphkd/graph.hpp"
#include "graphkd/matrix.hpp"
#include "graphkd/prior.hpp"
#include "graphkd/report.hpp"
#include "graphkd/student.hpp"
#include "graphkd/synth.hpp"
#include "graphkd/tabular.hpp"
#include "graphkd/trainer.hpp"

namespace fs = std::filesystem;
using namespace graphkd;

namespace {

void log_line(const std::string& msg) { std::cerr << "[graphkd] " << msg << std::endl; }

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct DataOptions {
    std::string dir = ".";
    std::string schema, mri, fundus, mri_embeddings, fundus_features;

    std::string resolve(const std::string& explicit_path, const char* name) const {
        return explicit_path.empty() ? (fs::path(dir) / name).string() : explicit_path;
    }
};

std::string ids_path_for(const std::string& bin_path) {
    fs::path p(bin_path);
    p.replace_extension(".ids");
    return p.string();
}

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.dir, "Directory holding the cohort files (layout written by `gen`)");
    cmd->add_option("--schema", d.schema, "Schema CSV (default <data>/schema.csv)");
    cmd->add_option("--mri", d.mri, "Reference cohort CSV (default <data>/mri.csv)");
    cmd->add_option("--fundus", d.fundus, "Image cohort CSV (default <data>/fundus.csv)");
    cmd->add_option("--mri_embeddings", d.mri_embeddings,
                    "Teacher embedding sidecar .bin; row ids read from the matching .ids file "
                    "(default <data>/mri_embeddings.bin)");
    cmd->add_option("--fundus_features", d.fundus_features,
                    "Image feature sidecar .bin (default <data>/fundus_features.bin)");
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value config file; explicit flags override it");
    cmd->add_option("--epochs", cfg.epochs, "Training epochs");
    cmd->add_option("--batch_size", cfg.batch_size, "Minibatch size");
    cmd->add_option("--learning_rate", cfg.learning_rate, "Gradient step size");
    cmd->add_option("--lambda_cls", cfg.lambda_cls, "Classification loss weight");
    cmd->add_option("--lambda_prior", cfg.lambda_prior, "Prior-alignment loss weight");
    cmd->add_option("--lambda_rel", cfg.lambda_rel, "Relational loss weight");
    cmd->add_option("--k_mri", cfg.k_mri, "Neighbors in the reference-cohort graph and retrieval");
    cmd->add_option("--k_fundus", cfg.k_fundus, "Neighbors in the image-cohort graph");
    cmd->add_option("--sigma", cfg.sigma, "Gaussian kernel bandwidth");
    cmd->add_option("--alpha", cfg.alpha, "Smoothing residual weight");
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--distill", cfg.distill, "Enable the prior-alignment loss (true/false)");
    cmd->add_option("--rel", cfg.rel, "Enable the relational loss (true/false)");
    cmd->add_option("--smooth", cfg.smooth, "Smooth teacher embeddings before imputation");
    cmd->add_option("--prior_mode", cfg.prior_mode, "Prior construction")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, PriorMode>{{"gated_knn", PriorMode::GatedKnn},
                                             {"ungated_knn", PriorMode::UngatedKnn},
                                             {"global_class_mean", PriorMode::ClassMean},
                                             {"global_mean", PriorMode::GlobalMean}}));
    cmd->add_option("--n_folds", cfg.n_folds, "Cross-validation folds");
    cmd->add_option("--optimizer", cfg.optimizer, "Parameter update rule")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Optimizer>{
            {"sgd", Optimizer::Sgd}, {"adam", Optimizer::Adam}}));
    cmd->add_option("--embed_dim", cfg.embed_dim, "Student embedding width");
    cmd->add_option("--bio_embed_dim", cfg.bio_embed_dim, "Biomarker branch width");
    cmd->add_option("--standardize", cfg.standardize, "Standardize numeric biomarkers");
    cmd->add_option("--shared_scaler", cfg.shared_scaler,
                    "Fit the scaler on reference + training rows (false: training rows only)");
    cmd->add_option("--sym_raw_weights", cfg.sym_raw_weights,
                    "Symmetrized edges carry raw Gaussian weights (false: normalized)");
    cmd->add_option("--jobs", cfg.jobs, "Folds trained in parallel");
}

struct Cohorts {
    RawCohortFile mri, fundus;
};

Cohorts load_cohorts(const DataOptions& d) {
    Schema schema = load_schema(d.resolve(d.schema, "schema.csv"));
    Cohorts c;
    c.mri = load_cohort(d.resolve(d.mri, "mri.csv"), schema);
    c.fundus = load_cohort(d.resolve(d.fundus, "fundus.csv"), schema);

    std::string emb = d.resolve(d.mri_embeddings, "mri_embeddings.bin");
    attach_embeddings(c.mri, read_id_list(ids_path_for(emb)), read_matrix_f32(emb));
    std::string feat = d.resolve(d.fundus_features, "fundus_features.bin");
    attach_features(c.fundus, read_id_list(ids_path_for(feat)), read_matrix_f32(feat));

    assert_disjoint_ids(c.mri.ids, c.fundus.ids);
    return c;
}

std::string fold_file(const std::string& out, std::size_t fold, const char* suffix) {
    return (fs::path(out) / ("fold" + std::to_string(fold) + "_" + suffix)).string();
}

FoldSplit pick_fold(const Cohorts& c, const TrainConfig& cfg, int fold) {
    auto splits = stratified_kfold(c.fundus.labels, static_cast<std::size_t>(cfg.n_folds), cfg.seed);
    if (fold < 0 || static_cast<std::size_t>(fold) >= splits.size())
        throw std::runtime_error("fold " + std::to_string(fold) + " out of range (n_folds=" +
                                 std::to_string(splits.size()) + ")");
    return splits[static_cast<std::size_t>(fold)];
}

void write_fold_artifacts(const std::string& out, std::size_t fold, const Cohorts& c,
                          const FoldResult& res, const TrainConfig& cfg) {
    write_graph(fold_file(out, fold, "mri_graph.csv"), res.artifacts.mri_graph);
    write_graph(fold_file(out, fold, "fundus_graph.csv"), res.artifacts.train_graph);
    write_matrix_f32(fold_file(out, fold, "smoothed.bin"), res.artifacts.smoothed);
    write_id_list(fold_file(out, fold, "smoothed.ids"), c.mri.ids);
    if (cfg.distill || cfg.rel)
        write_prior_set(fold_file(out, fold, "priors.bin"), fold_file(out, fold, "priors.ids"),
                        fold_file(out, fold, "priors_manifest.csv"), res.artifacts.priors,
                        res.artifacts.train.ids, c.mri.ids);
    save_params(fold_file(out, fold, "student.bin"), fold_file(out, fold, "student_manifest.csv"),
                res.fit.params);
    write_fold_report(fold_file(out, fold, "report.csv"), res);
}

int cmd_gen(const SynthConfig& syn, const std::string& out) {
    validate_synth_config(syn);
    fs::create_directories(out);
    SynthCohorts sc = generate_cohorts(syn);
    fs::path dir(out);
    write_schema((dir / "schema.csv").string(), synth_schema(syn));
    write_cohort_csv((dir / "mri.csv").string(), sc.mri);
    write_cohort_csv((dir / "fundus.csv").string(), sc.fundus);
    write_matrix_f32((dir / "mri_embeddings.bin").string(), sc.mri.embeddings);
    write_id_list((dir / "mri_embeddings.ids").string(), sc.mri.ids);
    write_matrix_f32((dir / "fundus_features.bin").string(), sc.fundus.features);
    write_id_list((dir / "fundus_features.ids").string(), sc.fundus.ids);

    auto prevalence = [](const std::vector<int>& ls) {
        double p = 0;
        for (int y : ls) p += y;
        return p / static_cast<double>(ls.size());
    };
    log_line("gen: n_mri=" + std::to_string(sc.mri.n_rows()) +
             " n_fundus=" + std::to_string(sc.fundus.n_rows()) +
             " mri_prevalence=" + fmt(prevalence(sc.mri.labels)) +
             " fundus_prevalence=" + fmt(prevalence(sc.fundus.labels)) +
             " oracle_auc=" + fmt(oracle_auc(sc)) + " out=" + out);
    return 0;
}

int cmd_graph(const DataOptions& d, const TrainConfig& cfg, int fold, const std::string& out) {
    Cohorts c = load_cohorts(d);
    FoldSplit split = pick_fold(c, cfg, fold);
    FoldArtifacts art = prepare_fold(c.mri, c.fundus, split.train_idx, cfg);
    fs::create_directories(out);
    std::size_t f = static_cast<std::size_t>(fold);
    write_graph(fold_file(out, f, "mri_graph.csv"), art.mri_graph);
    write_graph(fold_file(out, f, "fundus_graph.csv"), art.train_graph);
    std::size_t mri_edges = 0;
    for (const auto& nb : art.mri_graph.neighbors) mri_edges += nb.size();
    log_line("graph: fold=" + std::to_string(fold) + " mri_nodes=" +
             std::to_string(art.mri_graph.n_nodes) + " mri_edges=" + std::to_string(mri_edges) +
             " fundus_nodes=" + std::to_string(art.train_graph.n_nodes) + " fundus_edges=" +
             std::to_string(art.train_graph.edges.size()) + " out=" + out);
    return 0;
}

int cmd_smooth(const DataOptions& d, const TrainConfig& cfg, int fold, const std::string& out) {
    Cohorts c = load_cohorts(d);
    FoldSplit split = pick_fold(c, cfg, fold);
    FoldArtifacts art = prepare_fold(c.mri, c.fundus, split.train_idx, cfg);
    fs::create_directories(out);
    std::size_t f = static_cast<std::size_t>(fold);
    write_matrix_f32(fold_file(out, f, "smoothed.bin"), art.smoothed);
    write_id_list(fold_file(out, f, "smoothed.ids"), c.mri.ids);
    log_line("smooth: fold=" + std::to_string(fold) + " alpha=" + fmt(cfg.alpha) + " enabled=" +
             (cfg.smooth ? "true" : "false") + " rows=" + std::to_string(art.smoothed.rows) +
             " out=" + out);
    return 0;
}

int cmd_impute(const DataOptions& d, const TrainConfig& cfg, int fold, const std::string& out) {
    if (!cfg.distill && !cfg.rel)
        throw std::runtime_error("impute: priors are unused when distill=false and rel=false");
    Cohorts c = load_cohorts(d);
    FoldSplit split = pick_fold(c, cfg, fold);
    FoldArtifacts art = prepare_fold(c.mri, c.fundus, split.train_idx, cfg);
    fs::create_directories(out);
    std::size_t f = static_cast<std::size_t>(fold);
    write_prior_set(fold_file(out, f, "priors.bin"), fold_file(out, f, "priors.ids"),
                    fold_file(out, f, "priors_manifest.csv"), art.priors, art.train.ids,
                    c.mri.ids);
    log_line("impute: fold=" + std::to_string(fold) + " prior_mode=" +
             prior_mode_name(cfg.prior_mode) + " patients=" + std::to_string(art.priors.priors.rows) +
             " gated_fallback_rate=" + fmt(art.priors.fallback_rate()) + " out=" + out);
    return 0;
}

int cmd_train(const DataOptions& d, const TrainConfig& cfg, int fold, const std::string& out) {
    Cohorts c = load_cohorts(d);
    FoldSplit split = pick_fold(c, cfg, fold);
    FoldResult res = run_fold(c.mri, c.fundus, split, cfg);
    fs::create_directories(out);
    std::size_t f = static_cast<std::size_t>(fold);
    save_params(fold_file(out, f, "student.bin"), fold_file(out, f, "student_manifest.csv"),
                res.fit.params);
    write_fold_report(fold_file(out, f, "report.csv"), res);
    log_line("train: fold=" + std::to_string(fold) + " epochs=" + std::to_string(cfg.epochs) +
             " final_loss=" + fmt(res.fit.loss_curve.back()) + " threshold=" +
             fmt(res.fit.threshold) + " val_auc=" + fmt(res.report.auc) +
             " gated_fallback_rate=" + fmt(res.gated_fallback_rate) + " out=" + out);
    return 0;
}

int cmd_cv(const DataOptions& d, const TrainConfig& cfg, const std::string& out) {
    Cohorts c = load_cohorts(d);
    CvResult cv = run_cv(c.mri, c.fundus, cfg);
    fs::create_directories(out);
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        write_fold_artifacts(out, f, c, cv.folds[f], cfg);
        log_line("cv: fold=" + std::to_string(f) + " val_auc=" + fmt(cv.folds[f].report.auc) +
                 " threshold=" + fmt(cv.folds[f].fit.threshold) + " gated_fallback_rate=" +
                 fmt(cv.folds[f].gated_fallback_rate));
    }
    write_aggregate_report((fs::path(out) / "aggregate.csv").string(), cv);
    log_line("cv: folds=" + std::to_string(cv.folds.size()) + " auc=" + fmt(cv.auc.mean) + "+-" +
             fmt(cv.auc.stddev) + " auprc=" + fmt(cv.auprc.mean) + "+-" + fmt(cv.auprc.stddev) +
             " mean_gated_fallback_rate=" + fmt(cv.mean_fallback_rate) + " out=" + out);
    return 0;
}

int cmd_ablate(const DataOptions& d, const TrainConfig& base, const std::string& out) {
    Cohorts c = load_cohorts(d);
    fs::create_directories(out);

    auto variant = [&](bool distill, bool smooth, bool rel, PriorMode mode) {
        TrainConfig v = base;
        v.distill = distill;
        v.smooth = smooth;
        v.rel = rel;
        v.prior_mode = mode;
        return v;
    };
    std::vector<std::pair<std::string, TrainConfig>> grid = {
        {"supervised", variant(false, false, false, PriorMode::GatedKnn)},
        {"distill", variant(true, false, false, PriorMode::GatedKnn)},
        {"distill_smooth", variant(true, true, false, PriorMode::GatedKnn)},
        {"distill_rel", variant(true, false, true, PriorMode::GatedKnn)},
        {"full", variant(true, true, true, PriorMode::GatedKnn)},
        {"full_ungated_knn", variant(true, true, true, PriorMode::UngatedKnn)},
        {"full_global_class_mean", variant(true, true, true, PriorMode::ClassMean)},
        {"full_global_mean", variant(true, true, true, PriorMode::GlobalMean)},
    };

    std::vector<AblationRow> rows;
    for (const auto& [method, cfg] : grid) {
        CvResult cv = run_cv(c.mri, c.fundus, cfg);
        write_aggregate_report((fs::path(out) / ("ablate_" + method + ".csv")).string(), cv);
        rows.push_back({method, cv.auc, cv.auprc, cv.sensitivity, cv.specificity, cv.f1});
        log_line("ablate: method=" + method + " auc=" + fmt(cv.auc.mean) + "+-" +
                 fmt(cv.auc.stddev));
    }

    std::string table = emit_ablation_table(rows);
    std::ofstream tf((fs::path(out) / "ablation.txt").string());
    if (!tf) throw std::runtime_error("cannot write ablation table");
    tf << table;
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    // Flags must override --config, so the file is loaded before the real
    // parse binds flag targets.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    TrainConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = load_train_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << one_line(e.what()) << std::endl;
            return 1;
        }
    }

    CLI::App app{"Clinical-graph-mediated distillation pipeline"};
    app.require_subcommand(1);

    SynthConfig syn;
    DataOptions data;
    std::string out = "out";
    std::string config_opt;  // accepted here, consumed by the pre-scan above
    int fold = 0;

    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic cohort pair");
    gen->add_option("--out", out, "Output directory");
    gen->add_option("--n_mri", syn.n_mri, "Reference cohort size");
    gen->add_option("--n_fundus", syn.n_fundus, "Image cohort size");
    gen->add_option("--latent_dim", syn.latent_dim, "Shared latent width");
    gen->add_option("--biomarker_dim", syn.biomarker_dim, "Biomarker count");
    gen->add_option("--teacher_dim", syn.teacher_dim, "Teacher embedding width");
    gen->add_option("--feature_dim", syn.feature_dim, "Image feature width");
    gen->add_option("--biomarker_noise", syn.biomarker_noise, "Biomarker noise level");
    gen->add_option("--teacher_noise", syn.teacher_noise, "Teacher embedding noise level");
    gen->add_option("--feature_noise", syn.feature_noise, "Image feature noise level");
    gen->add_option("--bio_label_strength", syn.bio_label_strength,
                    "Label-coordinate scale in biomarkers");
    gen->add_option("--fundus_signal_strength", syn.fundus_signal_strength,
                    "Label-coordinate scale in image features");
    gen->add_option("--label_sharpness", syn.label_sharpness, "Label logit slope");
    gen->add_option("--prevalence", syn.prevalence, "Target positive fraction");
    gen->add_option("--seed", syn.seed, "Random seed");

    auto add_pipeline_cmd = [&](const char* name, const char* help, bool with_fold) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_data_options(cmd, data);
        add_train_options(cmd, cfg, config_opt);
        cmd->add_option("--out", out, "Output directory");
        if (with_fold) cmd->add_option("--fold", fold, "Cross-validation fold to run");
        return cmd;
    };
    CLI::App* graph_cmd = add_pipeline_cmd("graph", "Build the fold's similarity graphs", true);
    CLI::App* smooth_cmd =
        add_pipeline_cmd("smooth", "Propagate teacher embeddings over the reference graph", true);
    CLI::App* impute_cmd =
        add_pipeline_cmd("impute", "Impute cross-cohort teacher priors for training rows", true);
    CLI::App* train_cmd = add_pipeline_cmd("train", "Train and evaluate one fold", true);
    CLI::App* cv_cmd = add_pipeline_cmd("cv", "Run full stratified cross-validation", false);
    CLI::App* ablate_cmd =
        add_pipeline_cmd("ablate", "Run the ablation grid and emit a comparison table", false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(gen)) return cmd_gen(syn, out);
        if (app.got_subcommand(graph_cmd)) return cmd_graph(data, cfg, fold, out);
        if (app.got_subcommand(smooth_cmd)) return cmd_smooth(data, cfg, fold, out);
        if (app.got_subcommand(impute_cmd)) return cmd_impute(data, cfg, fold, out);
        if (app.got_subcommand(train_cmd)) return cmd_train(data, cfg, fold, out);
        if (app.got_subcommand(cv_cmd)) return cmd_cv(data, cfg, out);
        if (app.got_subcommand(ablate_cmd)) return cmd_ablate(data, cfg, out);
        std::cerr << "error: no subcommand" << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << one_line(e.what()) << std::endl;
        return 1;
    }
}
