#include "graphkd/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphkd/metrics.hpp"
#include "graphkd/rng.hpp"
#include "graphkd/student.hpp"

namespace graphkd {

void validate_synth_config(const SynthConfig& cfg) {
    if (cfg.n_mri < 2 || cfg.n_fundus < 2)
        throw std::invalid_argument("synth: each cohort needs at least 2 patients");
    if (cfg.latent_dim < 1) throw std::invalid_argument("synth: latent_dim must be >= 1");
    if (cfg.biomarker_dim < cfg.latent_dim || cfg.teacher_dim < cfg.latent_dim ||
        cfg.feature_dim < cfg.latent_dim)
        throw std::invalid_argument("synth: observation widths must be >= latent_dim");
    if (cfg.biomarker_noise < 0.0 || cfg.teacher_noise < 0.0 || cfg.feature_noise < 0.0)
        throw std::invalid_argument("synth: noise levels must be >= 0");
    if (!(cfg.prevalence > 0.0 && cfg.prevalence < 1.0))
        throw std::invalid_argument("synth: prevalence must be in (0,1)");
    if (cfg.label_sharpness < 0.0)
        throw std::invalid_argument("synth: label_sharpness must be >= 0");
}

namespace {

// Gaussian columns orthonormalized left to right, so the map preserves inner
// products of latent vectors exactly.
Matrix orthonormal_map(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
    std::vector<std::vector<double>> cols(in_dim);
    for (std::size_t j = 0; j < in_dim; ++j) {
        for (int attempt = 0; attempt < 32; ++attempt) {
            std::vector<double> c(out_dim);
            for (double& x : c) x = rng.gaussian();
            for (std::size_t p = 0; p < j; ++p) {
                double proj = dot(c, cols[p]);
                for (std::size_t r = 0; r < out_dim; ++r) c[r] -= proj * cols[p][r];
            }
            double nrm = norm2(c);
            if (nrm > 1e-8) {
                for (double& x : c) x /= nrm;
                cols[j] = std::move(c);
                break;
            }
        }
        if (cols[j].empty()) throw std::runtime_error("synth: degenerate basis draw");
    }
    Matrix a(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim; ++r)
        for (std::size_t j = 0; j < in_dim; ++j) a.at(r, j) = cols[j][r];
    return a;
}

std::vector<double> map_latent(const Matrix& a, std::span<const double> t, double noise,
                               Rng& rng) {
    std::vector<double> out(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) acc += a.at(r, c) * t[c];
        out[r] = acc + noise * rng.gaussian();
    }
    return out;
}

struct LatentDraw {
    std::vector<double> t;
    int label;
};

LatentDraw draw_patient(const SynthConfig& cfg, double offset, Rng& rng) {
    LatentDraw d;
    d.t.resize(cfg.latent_dim);
    for (double& x : d.t) x = rng.gaussian();
    double p = sigmoid(cfg.label_sharpness * d.t[0] + offset);
    d.label = rng.uniform01() < p ? 1 : 0;
    return d;
}

// Draws a cohort's latents and labels, redrawing majority-class patients in
// index order until the positive fraction sits within 10% relative of the
// target prevalence.
std::vector<LatentDraw> draw_cohort(const SynthConfig& cfg, std::size_t n, Rng& rng) {
    double offset = std::log(cfg.prevalence / (1.0 - cfg.prevalence));
    std::vector<LatentDraw> patients(n);
    std::size_t n_pos = 0;
    for (auto& p : patients) {
        p = draw_patient(cfg, offset, rng);
        n_pos += static_cast<std::size_t>(p.label);
    }

    double tol = 0.1 * cfg.prevalence;
    std::size_t attempts = 0, cursor = 0;
    const std::size_t max_attempts = 200 * n;
    while (std::abs(static_cast<double>(n_pos) / static_cast<double>(n) - cfg.prevalence) > tol) {
        if (attempts++ >= max_attempts)
            throw std::runtime_error("synth: could not balance cohort prevalence near " +
                                     std::to_string(cfg.prevalence));
        bool too_many_pos =
            static_cast<double>(n_pos) / static_cast<double>(n) > cfg.prevalence;
        while (patients[cursor].label != (too_many_pos ? 1 : 0)) cursor = (cursor + 1) % n;
        n_pos -= static_cast<std::size_t>(patients[cursor].label);
        patients[cursor] = draw_patient(cfg, offset, rng);
        n_pos += static_cast<std::size_t>(patients[cursor].label);
        cursor = (cursor + 1) % n;
    }
    return patients;
}

std::vector<double> scaled_latent(std::span<const double> t, double scale0) {
    std::vector<double> s(t.begin(), t.end());
    s[0] *= scale0;
    return s;
}

std::string make_id(char prefix, std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, i + 1);
    return buf;
}

RawCohortFile empty_cohort(const SynthConfig& cfg) {
    RawCohortFile raw;
    for (std::size_t c = 0; c < cfg.biomarker_dim; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "bio_%02zu", c);
        raw.numeric_names.push_back(buf);
    }
    return raw;
}

}  // namespace

SynthCohorts generate_cohorts(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    Rng rng(cfg.seed);

    Matrix bio_map = orthonormal_map(cfg.biomarker_dim, cfg.latent_dim, rng);
    Matrix teach_map = orthonormal_map(cfg.teacher_dim, cfg.latent_dim, rng);
    Matrix feat_map = orthonormal_map(cfg.feature_dim, cfg.latent_dim, rng);

    std::vector<LatentDraw> mri = draw_cohort(cfg, cfg.n_mri, rng);
    std::vector<LatentDraw> fundus = draw_cohort(cfg, cfg.n_fundus, rng);

    SynthCohorts out;
    out.mri = empty_cohort(cfg);
    out.fundus = empty_cohort(cfg);
    out.mri_latents = Matrix(cfg.n_mri, cfg.latent_dim);
    out.fundus_latents = Matrix(cfg.n_fundus, cfg.latent_dim);
    out.mri.numeric = Matrix(cfg.n_mri, cfg.biomarker_dim);
    out.fundus.numeric = Matrix(cfg.n_fundus, cfg.biomarker_dim);
    out.mri.categorical.resize(cfg.n_mri);
    out.fundus.categorical.resize(cfg.n_fundus);
    out.mri.embeddings = Matrix(cfg.n_mri, cfg.teacher_dim);
    out.fundus.features = Matrix(cfg.n_fundus, cfg.feature_dim);

    for (std::size_t i = 0; i < cfg.n_mri; ++i) {
        const LatentDraw& d = mri[i];
        out.mri.ids.push_back(make_id('M', i));
        out.mri.labels.push_back(d.label);
        out.mri_latents.set_row(i, d.t);
        out.mri.numeric.set_row(
            i, map_latent(bio_map, scaled_latent(d.t, cfg.bio_label_strength),
                          cfg.biomarker_noise, rng));
        std::vector<double> z = map_latent(teach_map, d.t, cfg.teacher_noise, rng);
        double nrm = norm2(z);
        if (nrm < 1e-12) throw std::runtime_error("synth: degenerate teacher embedding");
        for (double& x : z) x /= nrm;
        out.mri.embeddings.set_row(i, z);
    }
    for (std::size_t i = 0; i < cfg.n_fundus; ++i) {
        const LatentDraw& d = fundus[i];
        out.fundus.ids.push_back(make_id('F', i));
        out.fundus.labels.push_back(d.label);
        out.fundus_latents.set_row(i, d.t);
        out.fundus.numeric.set_row(
            i, map_latent(bio_map, scaled_latent(d.t, cfg.bio_label_strength),
                          cfg.biomarker_noise, rng));
        out.fundus.features.set_row(
            i, map_latent(feat_map, scaled_latent(d.t, cfg.fundus_signal_strength),
                          cfg.feature_noise, rng));
    }
    return out;
}

Schema synth_schema(const SynthConfig& cfg) {
    Schema s;
    s.columns.emplace_back("patient_id", ColumnRole::Id);
    s.columns.emplace_back("label", ColumnRole::Label);
    for (std::size_t c = 0; c < cfg.biomarker_dim; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "bio_%02zu", c);
        s.columns.emplace_back(buf, ColumnRole::Numeric);
    }
    return s;
}

double oracle_auc(const SynthCohorts& s) {
    std::vector<double> scores(s.fundus_latents.rows);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = s.fundus_latents.at(i, 0);
    return auc(scores, s.fundus.labels);
}

}  // namespace graphkd
