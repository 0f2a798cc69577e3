#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphkd/matrix.hpp"

namespace graphkd {

struct StudentDims {
    std::size_t f;  // input feature width
    std::size_t d;  // embedding width
    std::size_t m;  // biomarker width
    std::size_t h;  // biomarker embedding width
};

// Student: 2-layer feature encoder -> L2-normalized embedding z, 1-layer
// biomarker MLP, single-logit head on concat(z, bio). Activation for both
// MLPs is softplus(x) = log(1 + e^x).
struct StudentParams {
    StudentDims dims{};
    std::uint64_t seed = 0;
    Matrix enc_w1;               // d x f
    std::vector<double> enc_b1;  // d
    Matrix enc_w2;               // d x d
    std::vector<double> enc_b2;  // d
    Matrix bio_w;                // h x m
    std::vector<double> bio_b;   // h
    std::vector<double> head_w;  // d + h
    double head_b = 0.0;
};

// Same layout as StudentParams, used as a gradient accumulator.
using StudentGrads = StudentParams;

struct ForwardTrace {
    std::vector<double> features;    // inputs kept for backprop
    std::vector<double> biomarkers;
    std::vector<double> enc1;        // first-layer pre-activation
    std::vector<double> enc_act;
    std::vector<double> pre_embed;   // second-layer output, before normalization
    double pre_norm = 0.0;
    std::vector<double> embedding;   // z, unit norm
    std::vector<double> bio1;        // biomarker pre-activation
    std::vector<double> bio_embed;
    double logit = 0.0;
};

// Weights and biases uniform in +-1/sqrt(fan_in), deterministic per seed.
StudentParams init_student(StudentDims dims, std::uint64_t seed);

StudentGrads zero_grads(StudentDims dims);

ForwardTrace forward(const StudentParams& p, std::span<const double> features,
                     std::span<const double> biomarkers);

// Accumulates exact gradients into acc, given upstream dL/dz (tangent or
// ambient; the normalization Jacobian projects either way) and dL/dlogit.
void backward(const StudentParams& p, const ForwardTrace& t, std::span<const double> dz,
              double dlogit, StudentGrads& acc);

void axpy_params(StudentParams& p, double scale, const StudentGrads& g);

double softplus(double x);
double sigmoid(double x);

// Checkpoint: consecutive sidecar matrix blocks plus a text manifest of
// layer shapes and the seed.
void save_params(const std::string& bin_path, const std::string& manifest_path,
                 const StudentParams& p);
StudentParams load_params(const std::string& bin_path, const std::string& manifest_path);

}  // namespace graphkd
