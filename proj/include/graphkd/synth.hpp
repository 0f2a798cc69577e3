#pragma once

#include <cstddef>
#include <cstdint>

#include "graphkd/matrix.hpp"
#include "graphkd/tabular.hpp"

namespace graphkd {

// Two disjoint cohorts drawn from one latent process. Each patient has a
// Gaussian latent t; coordinate 0 carries the label signal. Observations are
// orthonormal linear maps of t plus isotropic noise, so cosine structure in
// latent space survives into every observed view:
//   biomarkers  <- t with coordinate 0 scaled by bio_label_strength
//   teacher     <- full t (reference cohort only), L2-normalized
//   features    <- t with coordinate 0 scaled by fundus_signal_strength
struct SynthConfig {
    std::size_t n_mri = 295;
    std::size_t n_fundus = 112;
    std::size_t latent_dim = 8;
    std::size_t biomarker_dim = 16;
    std::size_t teacher_dim = 64;
    std::size_t feature_dim = 64;
    double biomarker_noise = 0.3;
    double teacher_noise = 0.1;
    double feature_noise = 0.5;
    double bio_label_strength = 0.4;
    double fundus_signal_strength = 0.6;
    double label_sharpness = 4.0;
    double prevalence = 0.5;
    std::uint64_t seed = 0;
};

void validate_synth_config(const SynthConfig& cfg);

struct SynthCohorts {
    RawCohortFile mri;     // teacher embeddings attached
    RawCohortFile fundus;  // image features attached
    Matrix mri_latents;
    Matrix fundus_latents;
};

// Deterministic per seed. Labels are Bernoulli(sigmoid(sharpness*t0 + c))
// with c = logit(prevalence); patients are redrawn (bounded) until each
// cohort's positive fraction is within 10% relative of the target.
SynthCohorts generate_cohorts(const SynthConfig& cfg);

// Column roles for the generated CSVs: patient_id, label, bio_00..bio_NN.
Schema synth_schema(const SynthConfig& cfg);

// AUC of the Bayes-optimal score (the label-carrying latent coordinate)
// on the image cohort: the ceiling any student can reach.
double oracle_auc(const SynthCohorts& s);

}  // namespace graphkd
