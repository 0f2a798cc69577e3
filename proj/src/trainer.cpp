#include "graphkd/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "graphkd/rng.hpp"

namespace graphkd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " expects an integer, got '" + value + "'");
    }
    if (used != value.size())
        throw std::invalid_argument("config: " + key + " expects an integer, got '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " expects a number, got '" + value + "'");
    }
    if (used != value.size())
        throw std::invalid_argument("config: " + key + " expects a number, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: " + key + " expects true/false, got '" + value + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PriorMode parse_prior_mode(const std::string& s) {
    if (s == "gated_knn") return PriorMode::GatedKnn;
    if (s == "ungated_knn") return PriorMode::UngatedKnn;
    if (s == "global_class_mean") return PriorMode::ClassMean;
    if (s == "global_mean") return PriorMode::GlobalMean;
    throw std::invalid_argument(
        "unknown prior mode '" + s +
        "' (expected gated_knn, ungated_knn, global_class_mean, global_mean)");
}

std::string prior_mode_name(PriorMode m) {
    switch (m) {
        case PriorMode::GatedKnn: return "gated_knn";
        case PriorMode::UngatedKnn: return "ungated_knn";
        case PriorMode::ClassMean: return "global_class_mean";
        case PriorMode::GlobalMean: return "global_mean";
    }
    throw std::logic_error("prior_mode_name: bad enum");
}

Optimizer parse_optimizer(const std::string& s) {
    if (s == "sgd") return Optimizer::Sgd;
    if (s == "adam") return Optimizer::Adam;
    throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd or adam)");
}

std::string optimizer_name(Optimizer o) {
    return o == Optimizer::Sgd ? "sgd" : "adam";
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (!(cfg.learning_rate >= 0.0))
        throw std::invalid_argument("config: learning_rate must be >= 0");
    if (cfg.lambda_cls < 0.0 || cfg.lambda_prior < 0.0 || cfg.lambda_rel < 0.0)
        throw std::invalid_argument("config: loss weights must be >= 0");
    if (cfg.k_mri < 1) throw std::invalid_argument("config: k_mri must be >= 1");
    if (cfg.k_fundus < 1) throw std::invalid_argument("config: k_fundus must be >= 1");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("config: sigma must be > 0");
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("config: alpha must be in [0,1]");
    if (cfg.n_folds < 2) throw std::invalid_argument("config: n_folds must be >= 2");
    if (cfg.embed_dim < 1) throw std::invalid_argument("config: embed_dim must be >= 1");
    if (cfg.bio_embed_dim < 1) throw std::invalid_argument("config: bio_embed_dim must be >= 1");
    if (cfg.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
}

void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
    else if (key == "lambda_cls") cfg.lambda_cls = parse_double(key, value);
    else if (key == "lambda_prior") cfg.lambda_prior = parse_double(key, value);
    else if (key == "lambda_rel") cfg.lambda_rel = parse_double(key, value);
    else if (key == "k_mri") cfg.k_mri = static_cast<int>(parse_int(key, value));
    else if (key == "k_fundus") cfg.k_fundus = static_cast<int>(parse_int(key, value));
    else if (key == "sigma") cfg.sigma = parse_double(key, value);
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "distill") cfg.distill = parse_bool(key, value);
    else if (key == "rel") cfg.rel = parse_bool(key, value);
    else if (key == "smooth") cfg.smooth = parse_bool(key, value);
    else if (key == "prior_mode") cfg.prior_mode = parse_prior_mode(value);
    else if (key == "n_folds") cfg.n_folds = static_cast<int>(parse_int(key, value));
    else if (key == "optimizer") cfg.optimizer = parse_optimizer(value);
    else if (key == "embed_dim") cfg.embed_dim = static_cast<int>(parse_int(key, value));
    else if (key == "bio_embed_dim") cfg.bio_embed_dim = static_cast<int>(parse_int(key, value));
    else if (key == "standardize") cfg.standardize = parse_bool(key, value);
    else if (key == "shared_scaler") cfg.shared_scaler = parse_bool(key, value);
    else if (key == "sym_raw_weights") cfg.sym_raw_weights = parse_bool(key, value);
    else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(key, value));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    TrainConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        try {
            set_config_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

void write_train_config(const std::string& path, const TrainConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file " + path);
    out << "epochs=" << cfg.epochs << "\n";
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "learning_rate=" << fmt_double(cfg.learning_rate) << "\n";
    out << "lambda_cls=" << fmt_double(cfg.lambda_cls) << "\n";
    out << "lambda_prior=" << fmt_double(cfg.lambda_prior) << "\n";
    out << "lambda_rel=" << fmt_double(cfg.lambda_rel) << "\n";
    out << "k_mri=" << cfg.k_mri << "\n";
    out << "k_fundus=" << cfg.k_fundus << "\n";
    out << "sigma=" << fmt_double(cfg.sigma) << "\n";
    out << "alpha=" << fmt_double(cfg.alpha) << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "distill=" << (cfg.distill ? "true" : "false") << "\n";
    out << "rel=" << (cfg.rel ? "true" : "false") << "\n";
    out << "smooth=" << (cfg.smooth ? "true" : "false") << "\n";
    out << "prior_mode=" << prior_mode_name(cfg.prior_mode) << "\n";
    out << "n_folds=" << cfg.n_folds << "\n";
    out << "optimizer=" << optimizer_name(cfg.optimizer) << "\n";
    out << "embed_dim=" << cfg.embed_dim << "\n";
    out << "bio_embed_dim=" << cfg.bio_embed_dim << "\n";
    out << "standardize=" << (cfg.standardize ? "true" : "false") << "\n";
    out << "shared_scaler=" << (cfg.shared_scaler ? "true" : "false") << "\n";
    out << "sym_raw_weights=" << (cfg.sym_raw_weights ? "true" : "false") << "\n";
    out << "jobs=" << cfg.jobs << "\n";
    if (!out) throw std::runtime_error("failed writing config file " + path);
}

std::vector<FoldSplit> stratified_kfold(std::span<const int> labels, std::size_t n_folds,
                                        std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("stratified_kfold: need at least 2 folds");
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (neg.size() < n_folds || pos.size() < n_folds)
        throw std::invalid_argument("stratified_kfold: each class needs at least " +
                                    std::to_string(n_folds) + " members (have " +
                                    std::to_string(neg.size()) + " negative, " +
                                    std::to_string(pos.size()) + " positive)");
    Rng rng(seed);
    rng.shuffle(neg);
    rng.shuffle(pos);

    std::vector<std::vector<std::size_t>> members(n_folds);
    for (std::size_t i = 0; i < neg.size(); ++i) members[i % n_folds].push_back(neg[i]);
    for (std::size_t i = 0; i < pos.size(); ++i) members[i % n_folds].push_back(pos[i]);

    std::vector<FoldSplit> splits(n_folds);
    for (std::size_t f = 0; f < n_folds; ++f) {
        splits[f].val_idx = members[f];
        std::sort(splits[f].val_idx.begin(), splits[f].val_idx.end());
        for (std::size_t g = 0; g < n_folds; ++g) {
            if (g == f) continue;
            splits[f].train_idx.insert(splits[f].train_idx.end(), members[g].begin(),
                                       members[g].end());
        }
        std::sort(splits[f].train_idx.begin(), splits[f].train_idx.end());
    }
    return splits;
}

double youden_threshold(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("youden_threshold: size mismatch");
    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.reserve(distinct.size() + 1);
    candidates.push_back(distinct.front() - 1.0);
    for (std::size_t i = 1; i < distinct.size(); ++i)
        candidates.push_back(0.5 * (distinct[i - 1] + distinct[i]));
    candidates.push_back(distinct.back() + 1.0);

    double best_j = -2.0;
    double best_t = candidates.front();
    for (double t : candidates) {
        Confusion c = confusion_metrics(scores, labels, t);
        double j = c.sensitivity + c.specificity - 1.0;
        if (j > best_j) {  // candidates ascend, so ties keep the lowest threshold
            best_j = j;
            best_t = t;
        }
    }
    return best_t;
}

FoldArtifacts prepare_fold(const RawCohortFile& mri, const RawCohortFile& fundus,
                           std::span<const std::size_t> train_idx, const TrainConfig& cfg) {
    validate_config(cfg);
    if (mri.embeddings.empty())
        throw std::invalid_argument("prepare_fold: reference cohort has no teacher embeddings");
    if (fundus.features.empty())
        throw std::invalid_argument("prepare_fold: training cohort has no image features");

    RawCohortFile train_raw = subset_rows(fundus, train_idx);
    Scaler scaler = cfg.shared_scaler
                        ? fit_preprocessor(concat_rows(mri, train_raw), cfg.standardize)
                        : fit_preprocessor(train_raw, cfg.standardize);

    FoldArtifacts art;
    art.mri = apply_preprocessor(mri, scaler);
    art.train = apply_preprocessor(train_raw, scaler);
    assert_disjoint(art.mri, art.train);

    art.mri_graph = build_knn_graph(art.mri.biomarkers, static_cast<std::size_t>(cfg.k_mri),
                                    cfg.sigma);
    art.smoothed = cfg.smooth ? smooth_embeddings(art.mri.embeddings, art.mri_graph, cfg.alpha)
                              : art.mri.embeddings;

    if (cfg.distill || cfg.rel) {
        std::size_t k = static_cast<std::size_t>(cfg.k_mri);
        switch (cfg.prior_mode) {
            case PriorMode::GatedKnn:
                art.priors = impute_priors(art.train.biomarkers, art.mri.biomarkers, art.smoothed,
                                           art.train.labels, art.mri.labels, k, cfg.sigma);
                break;
            case PriorMode::UngatedKnn:
                art.priors = ungated_knn_prior(art.train.biomarkers, art.mri.biomarkers,
                                               art.smoothed, k, cfg.sigma);
                break;
            case PriorMode::ClassMean: {
                auto [neg_mean, pos_mean] = global_class_mean_prior(art.smoothed, art.mri.labels);
                std::size_t n = art.train.ids.size();
                art.priors.priors = Matrix(n, art.smoothed.cols);
                art.priors.gated.assign(n, 0);
                art.priors.neighbor_ids.assign(n, {});
                for (std::size_t i = 0; i < n; ++i)
                    art.priors.priors.set_row(i, art.train.labels[i] == 1 ? pos_mean : neg_mean);
                break;
            }
            case PriorMode::GlobalMean: {
                std::vector<double> mean = global_mean_prior(art.smoothed);
                std::size_t n = art.train.ids.size();
                art.priors.priors = Matrix(n, art.smoothed.cols);
                art.priors.gated.assign(n, 0);
                art.priors.neighbor_ids.assign(n, {});
                for (std::size_t i = 0; i < n; ++i) art.priors.priors.set_row(i, mean);
                break;
            }
        }
    }

    art.train_graph = symmetrize(
        build_knn_graph(art.train.biomarkers, static_cast<std::size_t>(cfg.k_fundus), cfg.sigma),
        cfg.sym_raw_weights);
    return art;
}

namespace {

// All trainable scalars as contiguous blocks, in a fixed order shared with
// the gradient accumulator.
std::vector<std::span<double>> param_spans(StudentParams& p) {
    return {
        {p.enc_w1.data.data(), p.enc_w1.data.size()},
        {p.enc_b1.data(), p.enc_b1.size()},
        {p.enc_w2.data.data(), p.enc_w2.data.size()},
        {p.enc_b2.data(), p.enc_b2.size()},
        {p.bio_w.data.data(), p.bio_w.data.size()},
        {p.bio_b.data(), p.bio_b.size()},
        {p.head_w.data(), p.head_w.size()},
        {&p.head_b, 1},
    };
}

struct AdamState {
    StudentGrads m, v;
    std::uint64_t t = 0;
};

void adam_step(StudentParams& p, StudentGrads& g, AdamState& st, double lr) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++st.t;
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
    auto ps = param_spans(p), gs = param_spans(g), ms = param_spans(st.m), vs = param_spans(st.v);
    for (std::size_t b = 0; b < ps.size(); ++b) {
        for (std::size_t i = 0; i < ps[b].size(); ++i) {
            double grad = gs[b][i];
            ms[b][i] = kBeta1 * ms[b][i] + (1.0 - kBeta1) * grad;
            vs[b][i] = kBeta2 * vs[b][i] + (1.0 - kBeta2) * grad * grad;
            ps[b][i] -= lr * (ms[b][i] / bc1) / (std::sqrt(vs[b][i] / bc2) + kEps);
        }
    }
}

}  // namespace

FitResult fit_student(const CohortTable& train, const PriorSet& priors,
                      const SymmetricGraph& train_graph, const TrainConfig& cfg) {
    validate_config(cfg);
    std::size_t n = train.ids.size();
    if (n == 0) throw std::invalid_argument("fit_student: empty training set");
    if (train.features.empty()) throw std::invalid_argument("fit_student: no image features");
    if (train.biomarkers.rows != n || train.features.rows != n)
        throw std::invalid_argument("fit_student: table row counts disagree");

    bool use_prior = cfg.distill;
    bool use_rel = cfg.rel;
    StudentDims dims{train.features.cols, static_cast<std::size_t>(cfg.embed_dim),
                     train.biomarkers.cols, static_cast<std::size_t>(cfg.bio_embed_dim)};
    if (use_prior || use_rel) {
        if (priors.priors.rows != n)
            throw std::invalid_argument("fit_student: need one prior per training row");
        if (priors.priors.cols != dims.d)
            throw std::invalid_argument(
                "fit_student: embed_dim " + std::to_string(dims.d) +
                " does not match prior width " + std::to_string(priors.priors.cols));
    }
    if (use_rel && train_graph.n_nodes != n)
        throw std::invalid_argument("fit_student: relational graph node count disagrees");

    LossWeights weights;
    weights.cls = cfg.lambda_cls;
    weights.prior = use_prior ? cfg.lambda_prior : 0.0;
    weights.rel = use_rel ? cfg.lambda_rel : 0.0;

    StudentParams params = init_student(dims, cfg.seed);
    AdamState adam;
    if (cfg.optimizer == Optimizer::Adam) {
        adam.m = zero_grads(dims);
        adam.v = zero_grads(dims);
    }

    FitResult result;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(epoch));
        rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n; start += bs) {
            std::size_t end = std::min(start + bs, n);
            std::span<const std::size_t> batch(order.data() + start, end - start);
            std::size_t b = batch.size();

            std::vector<ForwardTrace> traces(b);
            std::vector<double> logits(b);
            std::vector<int> ys(b);
            Matrix z(b, dims.d);
            Matrix batch_priors(use_prior || use_rel ? b : 0, dims.d);
            for (std::size_t i = 0; i < b; ++i) {
                std::size_t r = batch[i];
                traces[i] = forward(params, train.features.row(r), train.biomarkers.row(r));
                logits[i] = traces[i].logit;
                ys[i] = train.labels[r];
                z.set_row(i, traces[i].embedding);
                if (use_prior || use_rel) batch_priors.set_row(i, priors.priors.row(r));
            }

            auto [l_cls, d_logits] = cls_loss(logits, ys);
            double l_prior = 0.0, l_rel = 0.0;
            Matrix dz(b, dims.d);
            if (use_prior) {
                auto [lp, gp] = prior_loss(z, batch_priors);
                l_prior = lp;
                for (std::size_t i = 0; i < gp.data.size(); ++i)
                    dz.data[i] += cfg.lambda_prior * gp.data[i];
            }
            if (use_rel) {
                auto edges = collect_batch_edges(batch, train.labels, train_graph);
                auto [lr, gr] = rel_loss(z, batch_priors, edges);
                l_rel = lr;
                for (std::size_t i = 0; i < gr.data.size(); ++i)
                    dz.data[i] += cfg.lambda_rel * gr.data[i];
            }

            double batch_loss = total_loss(l_cls, l_prior, l_rel, weights);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("fit_student: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(n_batches));

            StudentGrads grads = zero_grads(dims);
            for (std::size_t i = 0; i < b; ++i)
                backward(params, traces[i], dz.row(i), cfg.lambda_cls * d_logits[i], grads);

            if (cfg.optimizer == Optimizer::Adam)
                adam_step(params, grads, adam, cfg.learning_rate);
            else
                axpy_params(params, -cfg.learning_rate, grads);

            epoch_loss += batch_loss;
            ++n_batches;
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(n_batches));
    }

    result.params = std::move(params);
    // the operating threshold comes from the training rows only
    std::vector<double> train_scores = predict_scores(result.params, train);
    result.threshold = youden_threshold(train_scores, train.labels);
    return result;
}

std::vector<double> predict_scores(const StudentParams& p, const CohortTable& t) {
    std::vector<double> scores(t.ids.size());
    for (std::size_t i = 0; i < t.ids.size(); ++i) {
        ForwardTrace tr = forward(p, t.features.row(i), t.biomarkers.row(i));
        scores[i] = sigmoid(tr.logit);
    }
    return scores;
}

FoldResult run_fold(const RawCohortFile& mri, const RawCohortFile& fundus, const FoldSplit& split,
                    const TrainConfig& cfg) {
    FoldArtifacts art = prepare_fold(mri, fundus, split.train_idx, cfg);
    FitResult fit = fit_student(art.train, art.priors, art.train_graph, cfg);

    RawCohortFile val_raw = subset_rows(fundus, split.val_idx);
    CohortTable val = apply_preprocessor(val_raw, art.train.scaler);
    std::vector<double> scores = predict_scores(fit.params, val);

    FoldResult r;
    r.split = split;
    r.gated_fallback_rate =
        (cfg.distill || cfg.rel) && cfg.prior_mode == PriorMode::GatedKnn ? art.priors.fallback_rate()
                                                                          : 0.0;
    r.report = evaluate(scores, val.labels, fit.threshold);
    r.fit = std::move(fit);
    r.artifacts = std::move(art);
    return r;
}

MetricStats stats_of(std::span<const double> xs) {
    MetricStats s;
    if (xs.empty()) return s;
    double sum = std::accumulate(xs.begin(), xs.end(), 0.0);
    s.mean = sum / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size()));
    return s;
}

CvResult run_cv(const RawCohortFile& mri, const RawCohortFile& fundus, const TrainConfig& cfg) {
    validate_config(cfg);
    std::vector<FoldSplit> splits =
        stratified_kfold(fundus.labels, static_cast<std::size_t>(cfg.n_folds), cfg.seed);

    CvResult cv;
    cv.folds.resize(splits.size());
    if (cfg.jobs > 1) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= splits.size()) break;
                try {
                    cv.folds[i] = run_fold(mri, fundus, splits[i], cfg);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        };
        std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs),
                                                      splits.size());
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
    } else {
        for (std::size_t i = 0; i < splits.size(); ++i)
            cv.folds[i] = run_fold(mri, fundus, splits[i], cfg);
    }

    std::vector<double> aucs, auprcs, sens, specs, f1s, fallbacks;
    for (const auto& f : cv.folds) {
        aucs.push_back(f.report.auc);
        auprcs.push_back(f.report.auprc);
        sens.push_back(f.report.sensitivity);
        specs.push_back(f.report.specificity);
        f1s.push_back(f.report.f1);
        fallbacks.push_back(f.gated_fallback_rate);
    }
    cv.auc = stats_of(aucs);
    cv.auprc = stats_of(auprcs);
    cv.sensitivity = stats_of(sens);
    cv.specificity = stats_of(specs);
    cv.f1 = stats_of(f1s);
    cv.mean_fallback_rate = stats_of(fallbacks).mean;
    return cv;
}

}  // namespace graphkd
