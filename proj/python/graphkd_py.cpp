#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

#include "graphkd/graph.hpp"
#include "graphkd/losses.hpp"
#include "graphkd/matrix.hpp"
#include "graphkd/metrics.hpp"
#include "graphkd/prior.hpp"
#include "graphkd/synth.hpp"
#include "graphkd/tabular.hpp"
#include "graphkd/trainer.hpp"

namespace py = pybind11;
using namespace graphkd;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D float array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.data.data(), a.data(), sizeof(double) * m.data.size());
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::memcpy(a.mutable_data(), m.data.data(), sizeof(double) * m.data.size());
    return a;
}

std::vector<double> to_vec(const DoubleArray& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D float array");
    return {a.data(), a.data() + a.shape(0)};
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["auc"] = r.auc;
    d["auprc"] = r.auprc;
    d["sensitivity"] = r.sensitivity;
    d["specificity"] = r.specificity;
    d["f1"] = r.f1;
    d["threshold"] = r.threshold;
    d["n_pos"] = r.n_pos;
    d["n_neg"] = r.n_neg;
    return d;
}

py::dict stats_dict(const MetricStats& s) {
    py::dict d;
    d["mean"] = s.mean;
    d["std"] = s.stddev;
    return d;
}

}  // namespace

PYBIND11_MODULE(graphkd, m) {
    m.doc() = "Clinical-similarity-graph distillation: kNN graphs, teacher-prior "
              "imputation, student training, and exact binary-classification metrics.";

    py::enum_<PriorMode>(m, "PriorMode")
        .value("GATED_KNN", PriorMode::GatedKnn)
        .value("UNGATED_KNN", PriorMode::UngatedKnn)
        .value("GLOBAL_CLASS_MEAN", PriorMode::ClassMean)
        .value("GLOBAL_MEAN", PriorMode::GlobalMean);

    py::enum_<Optimizer>(m, "Optimizer")
        .value("SGD", Optimizer::Sgd)
        .value("ADAM", Optimizer::Adam);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("lambda_cls", &TrainConfig::lambda_cls)
        .def_readwrite("lambda_prior", &TrainConfig::lambda_prior)
        .def_readwrite("lambda_rel", &TrainConfig::lambda_rel)
        .def_readwrite("k_mri", &TrainConfig::k_mri)
        .def_readwrite("k_fundus", &TrainConfig::k_fundus)
        .def_readwrite("sigma", &TrainConfig::sigma)
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("distill", &TrainConfig::distill)
        .def_readwrite("rel", &TrainConfig::rel)
        .def_readwrite("smooth", &TrainConfig::smooth)
        .def_readwrite("prior_mode", &TrainConfig::prior_mode)
        .def_readwrite("n_folds", &TrainConfig::n_folds)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def_readwrite("embed_dim", &TrainConfig::embed_dim)
        .def_readwrite("bio_embed_dim", &TrainConfig::bio_embed_dim)
        .def_readwrite("standardize", &TrainConfig::standardize)
        .def_readwrite("shared_scaler", &TrainConfig::shared_scaler)
        .def_readwrite("sym_raw_weights", &TrainConfig::sym_raw_weights)
        .def_readwrite("jobs", &TrainConfig::jobs);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n_mri", &SynthConfig::n_mri)
        .def_readwrite("n_fundus", &SynthConfig::n_fundus)
        .def_readwrite("latent_dim", &SynthConfig::latent_dim)
        .def_readwrite("biomarker_dim", &SynthConfig::biomarker_dim)
        .def_readwrite("teacher_dim", &SynthConfig::teacher_dim)
        .def_readwrite("feature_dim", &SynthConfig::feature_dim)
        .def_readwrite("biomarker_noise", &SynthConfig::biomarker_noise)
        .def_readwrite("teacher_noise", &SynthConfig::teacher_noise)
        .def_readwrite("feature_noise", &SynthConfig::feature_noise)
        .def_readwrite("bio_label_strength", &SynthConfig::bio_label_strength)
        .def_readwrite("fundus_signal_strength", &SynthConfig::fundus_signal_strength)
        .def_readwrite("label_sharpness", &SynthConfig::label_sharpness)
        .def_readwrite("prevalence", &SynthConfig::prevalence)
        .def_readwrite("seed", &SynthConfig::seed);

    py::class_<KnnGraph>(m, "KnnGraph")
        .def_readonly("n_nodes", &KnnGraph::n_nodes)
        .def_readonly("n_targets", &KnnGraph::n_targets)
        .def_readonly("k", &KnnGraph::k)
        .def_readonly("sigma", &KnnGraph::sigma)
        .def_readonly("bipartite", &KnnGraph::bipartite)
        .def("neighbors",
             [](const KnnGraph& g, std::size_t node) {
                 if (node >= g.n_nodes) throw std::out_of_range("node out of range");
                 py::list out;
                 for (const auto& e : g.neighbors[node])
                     out.append(py::make_tuple(e.target, e.p, e.w));
                 return out;
             },
             py::arg("node"), "List of (target, normalized_weight, raw_weight) tuples");

    py::class_<SymmetricGraph>(m, "SymmetricGraph")
        .def_readonly("n_nodes", &SymmetricGraph::n_nodes)
        .def_readonly("k", &SymmetricGraph::k)
        .def_readonly("sigma", &SymmetricGraph::sigma)
        .def("edges", [](const SymmetricGraph& g) {
            py::list out;
            for (const auto& e : g.edges) out.append(py::make_tuple(e.u, e.v, e.weight));
            return out;
        });

    py::class_<PriorSet>(m, "PriorSet")
        .def_property_readonly("priors", [](const PriorSet& p) { return to_array(p.priors); })
        .def_property_readonly("gated",
                               [](const PriorSet& p) {
                                   std::vector<bool> g(p.gated.begin(), p.gated.end());
                                   return g;
                               })
        .def_readonly("neighbor_ids", &PriorSet::neighbor_ids)
        .def("fallback_rate", &PriorSet::fallback_rate);

    py::class_<RawCohortFile>(m, "Cohort")
        .def_readonly("ids", &RawCohortFile::ids)
        .def_readonly("labels", &RawCohortFile::labels)
        .def_property_readonly("biomarkers",
                               [](const RawCohortFile& r) { return to_array(r.numeric); })
        .def_property_readonly("embeddings",
                               [](const RawCohortFile& r) { return to_array(r.embeddings); })
        .def_property_readonly("features",
                               [](const RawCohortFile& r) { return to_array(r.features); });

    py::class_<SynthCohorts>(m, "SynthCohorts")
        .def_readonly("mri", &SynthCohorts::mri)
        .def_readonly("fundus", &SynthCohorts::fundus)
        .def_property_readonly("mri_latents",
                               [](const SynthCohorts& s) { return to_array(s.mri_latents); })
        .def_property_readonly("fundus_latents",
                               [](const SynthCohorts& s) { return to_array(s.fundus_latents); });

    m.def("cosine_distance",
          [](const DoubleArray& a, const DoubleArray& b) {
              return cosine_distance(to_vec(a), to_vec(b));
          },
          py::arg("a"), py::arg("b"), "1 - cos(a, b)");
    m.def("gaussian_weight", &gaussian_weight, py::arg("distance"), py::arg("sigma"),
          "exp(-d^2 / sigma^2)");

    m.def("build_knn_graph",
          [](const DoubleArray& points, std::size_t k, double sigma) {
              return build_knn_graph(to_matrix(points), k, sigma);
          },
          py::arg("points"), py::arg("k"), py::arg("sigma") = 1.0,
          "Exact cosine-kNN graph with Gaussian edge weights, row-normalized");
    m.def("build_cross_knn",
          [](const DoubleArray& queries, const DoubleArray& refs, std::size_t k, double sigma) {
              return build_cross_knn(to_matrix(queries), to_matrix(refs), k, sigma);
          },
          py::arg("queries"), py::arg("refs"), py::arg("k"), py::arg("sigma") = 1.0);
    m.def("symmetrize", &symmetrize, py::arg("graph"), py::arg("raw_weights") = true);

    m.def("smooth_embeddings",
          [](const DoubleArray& z0, const KnnGraph& g, double alpha) {
              return to_array(smooth_embeddings(to_matrix(z0), g, alpha));
          },
          py::arg("embeddings"), py::arg("graph"), py::arg("alpha") = 0.9,
          "One-step residual propagation over the graph");

    m.def("impute_priors",
          [](const DoubleArray& query_bio, const DoubleArray& ref_bio,
             const DoubleArray& ref_smoothed, const std::vector<int>& query_labels,
             const std::vector<int>& ref_labels, std::size_t k, double sigma) {
              return impute_priors(to_matrix(query_bio), to_matrix(ref_bio),
                                   to_matrix(ref_smoothed), query_labels, ref_labels, k, sigma);
          },
          py::arg("query_biomarkers"), py::arg("ref_biomarkers"), py::arg("ref_embeddings"),
          py::arg("query_labels"), py::arg("ref_labels"), py::arg("k"), py::arg("sigma") = 1.0,
          "Label-gated cross-cohort prior imputation with ungated fallback");
    m.def("ungated_knn_prior",
          [](const DoubleArray& query_bio, const DoubleArray& ref_bio,
             const DoubleArray& ref_smoothed, std::size_t k, double sigma) {
              return ungated_knn_prior(to_matrix(query_bio), to_matrix(ref_bio),
                                       to_matrix(ref_smoothed), k, sigma);
          },
          py::arg("query_biomarkers"), py::arg("ref_biomarkers"), py::arg("ref_embeddings"),
          py::arg("k"), py::arg("sigma") = 1.0);
    m.def("global_mean_prior",
          [](const DoubleArray& ref_smoothed) {
              return global_mean_prior(to_matrix(ref_smoothed));
          },
          py::arg("ref_embeddings"));
    m.def("global_class_mean_prior",
          [](const DoubleArray& ref_smoothed, const std::vector<int>& ref_labels) {
              return global_class_mean_prior(to_matrix(ref_smoothed), ref_labels);
          },
          py::arg("ref_embeddings"), py::arg("ref_labels"),
          "Returns (negative-class mean, positive-class mean), both unit norm");

    m.def("auc",
          [](const DoubleArray& scores, const std::vector<int>& labels) {
              return auc(to_vec(scores), labels);
          },
          py::arg("scores"), py::arg("labels"),
          "Rank-based AUC with half credit for ties");
    m.def("auprc",
          [](const DoubleArray& scores, const std::vector<int>& labels) {
              return auprc(to_vec(scores), labels);
          },
          py::arg("scores"), py::arg("labels"));
    m.def("confusion_metrics",
          [](const DoubleArray& scores, const std::vector<int>& labels, double threshold) {
              Confusion c = confusion_metrics(to_vec(scores), labels, threshold);
              py::dict d;
              d["sensitivity"] = c.sensitivity;
              d["specificity"] = c.specificity;
              d["f1"] = c.f1;
              return d;
          },
          py::arg("scores"), py::arg("labels"), py::arg("threshold"),
          "Positive prediction iff score > threshold");
    m.def("youden_threshold",
          [](const DoubleArray& scores, const std::vector<int>& labels) {
              return youden_threshold(to_vec(scores), labels);
          },
          py::arg("scores"), py::arg("labels"));

    m.def("stratified_kfold",
          [](const std::vector<int>& labels, std::size_t n_folds, std::uint64_t seed) {
              py::list out;
              for (const auto& s : stratified_kfold(labels, n_folds, seed))
                  out.append(py::make_tuple(s.train_idx, s.val_idx));
              return out;
          },
          py::arg("labels"), py::arg("n_folds") = 5, py::arg("seed") = 0,
          "List of (train_indices, val_indices) tuples");

    m.def("generate_cohorts", &generate_cohorts, py::arg("config"),
          "Deterministic synthetic cohort pair with a shared latent factor");

    m.def("run_cv",
          [](const RawCohortFile& mri, const RawCohortFile& fundus, const TrainConfig& cfg) {
              CvResult cv = run_cv(mri, fundus, cfg);
              py::list folds;
              for (const auto& f : cv.folds) {
                  py::dict d = report_dict(f.report);
                  d["gated_fallback_rate"] = f.gated_fallback_rate;
                  d["final_train_loss"] = f.fit.loss_curve.back();
                  folds.append(d);
              }
              py::dict out;
              out["folds"] = folds;
              out["auc"] = stats_dict(cv.auc);
              out["auprc"] = stats_dict(cv.auprc);
              out["sensitivity"] = stats_dict(cv.sensitivity);
              out["specificity"] = stats_dict(cv.specificity);
              out["f1"] = stats_dict(cv.f1);
              out["mean_gated_fallback_rate"] = cv.mean_fallback_rate;
              return out;
          },
          py::arg("mri"), py::arg("fundus"), py::arg("config"),
          "Stratified cross-validation; returns per-fold metrics and aggregates");
}
