#include "graphkd/student.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "graphkd/rng.hpp"

namespace graphkd {

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

void fill_uniform(Rng& rng, double bound, std::vector<double>& v) {
    for (double& x : v) x = rng.uniform(-bound, bound);
}

void affine(const Matrix& w, const std::vector<double>& b, std::span<const double> x,
            std::vector<double>& out) {
    out.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double s = b[r];
        for (std::size_t c = 0; c < w.cols; ++c) s += w.at(r, c) * x[c];
        out[r] = s;
    }
}

}  // namespace

StudentParams init_student(StudentDims dims, std::uint64_t seed) {
    if (dims.f == 0 || dims.d == 0 || dims.m == 0 || dims.h == 0)
        throw std::invalid_argument("init_student: all dims must be >= 1");
    StudentParams p;
    p.dims = dims;
    p.seed = seed;
    p.enc_w1 = Matrix(dims.d, dims.f);
    p.enc_b1.resize(dims.d);
    p.enc_w2 = Matrix(dims.d, dims.d);
    p.enc_b2.resize(dims.d);
    p.bio_w = Matrix(dims.h, dims.m);
    p.bio_b.resize(dims.h);
    p.head_w.resize(dims.d + dims.h);

    Rng rng(seed);
    double b1 = 1.0 / std::sqrt(static_cast<double>(dims.f));
    fill_uniform(rng, b1, p.enc_w1.data);
    fill_uniform(rng, b1, p.enc_b1);
    double b2 = 1.0 / std::sqrt(static_cast<double>(dims.d));
    fill_uniform(rng, b2, p.enc_w2.data);
    fill_uniform(rng, b2, p.enc_b2);
    double bb = 1.0 / std::sqrt(static_cast<double>(dims.m));
    fill_uniform(rng, bb, p.bio_w.data);
    fill_uniform(rng, bb, p.bio_b);
    double bh = 1.0 / std::sqrt(static_cast<double>(dims.d + dims.h));
    fill_uniform(rng, bh, p.head_w);
    p.head_b = rng.uniform(-bh, bh);
    return p;
}

StudentGrads zero_grads(StudentDims dims) {
    StudentGrads g;
    g.dims = dims;
    g.enc_w1 = Matrix(dims.d, dims.f);
    g.enc_b1.assign(dims.d, 0.0);
    g.enc_w2 = Matrix(dims.d, dims.d);
    g.enc_b2.assign(dims.d, 0.0);
    g.bio_w = Matrix(dims.h, dims.m);
    g.bio_b.assign(dims.h, 0.0);
    g.head_w.assign(dims.d + dims.h, 0.0);
    g.head_b = 0.0;
    return g;
}

ForwardTrace forward(const StudentParams& p, std::span<const double> features,
                     std::span<const double> biomarkers) {
    if (features.size() != p.dims.f)
        throw std::invalid_argument("forward: feature width " + std::to_string(features.size()) +
                                    " != " + std::to_string(p.dims.f));
    if (biomarkers.size() != p.dims.m)
        throw std::invalid_argument("forward: biomarker width " + std::to_string(biomarkers.size()) +
                                    " != " + std::to_string(p.dims.m));

    ForwardTrace t;
    t.features.assign(features.begin(), features.end());
    t.biomarkers.assign(biomarkers.begin(), biomarkers.end());

    affine(p.enc_w1, p.enc_b1, features, t.enc1);
    t.enc_act.resize(p.dims.d);
    for (std::size_t i = 0; i < p.dims.d; ++i) t.enc_act[i] = softplus(t.enc1[i]);
    affine(p.enc_w2, p.enc_b2, t.enc_act, t.pre_embed);

    t.pre_norm = norm2(t.pre_embed);
    if (t.pre_norm == 0.0)
        throw std::runtime_error("forward: encoder output has zero norm, cannot normalize");
    t.embedding.resize(p.dims.d);
    for (std::size_t i = 0; i < p.dims.d; ++i) t.embedding[i] = t.pre_embed[i] / t.pre_norm;

    affine(p.bio_w, p.bio_b, biomarkers, t.bio1);
    t.bio_embed.resize(p.dims.h);
    for (std::size_t i = 0; i < p.dims.h; ++i) t.bio_embed[i] = softplus(t.bio1[i]);

    double logit = p.head_b;
    for (std::size_t i = 0; i < p.dims.d; ++i) logit += p.head_w[i] * t.embedding[i];
    for (std::size_t i = 0; i < p.dims.h; ++i) logit += p.head_w[p.dims.d + i] * t.bio_embed[i];
    t.logit = logit;
    return t;
}

void backward(const StudentParams& p, const ForwardTrace& t, std::span<const double> dz,
              double dlogit, StudentGrads& acc) {
    const std::size_t d = p.dims.d, h = p.dims.h;
    if (dz.size() != d) throw std::invalid_argument("backward: dz width mismatch");

    // head
    for (std::size_t i = 0; i < d; ++i) acc.head_w[i] += dlogit * t.embedding[i];
    for (std::size_t i = 0; i < h; ++i) acc.head_w[d + i] += dlogit * t.bio_embed[i];
    acc.head_b += dlogit;

    // total gradient reaching z: upstream plus head path
    std::vector<double> gz(d);
    for (std::size_t i = 0; i < d; ++i) gz[i] = dz[i] + dlogit * p.head_w[i];

    // normalization Jacobian: (I - z z^T) / ||pre||
    double gz_dot_z = dot(gz, t.embedding);
    std::vector<double> gpre(d);
    for (std::size_t i = 0; i < d; ++i)
        gpre[i] = (gz[i] - gz_dot_z * t.embedding[i]) / t.pre_norm;

    // encoder second layer
    std::vector<double> ga1(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            acc.enc_w2.at(r, c) += gpre[r] * t.enc_act[c];
            ga1[c] += p.enc_w2.at(r, c) * gpre[r];
        }
        acc.enc_b2[r] += gpre[r];
    }

    // softplus' = sigmoid, then encoder first layer
    for (std::size_t r = 0; r < d; ++r) {
        double g1 = ga1[r] * sigmoid(t.enc1[r]);
        for (std::size_t c = 0; c < p.dims.f; ++c) acc.enc_w1.at(r, c) += g1 * t.features[c];
        acc.enc_b1[r] += g1;
    }

    // biomarker path
    for (std::size_t r = 0; r < h; ++r) {
        double gb = dlogit * p.head_w[d + r] * sigmoid(t.bio1[r]);
        for (std::size_t c = 0; c < p.dims.m; ++c) acc.bio_w.at(r, c) += gb * t.biomarkers[c];
        acc.bio_b[r] += gb;
    }
}

void axpy_params(StudentParams& p, double scale, const StudentGrads& g) {
    for (std::size_t i = 0; i < p.enc_w1.data.size(); ++i) p.enc_w1.data[i] += scale * g.enc_w1.data[i];
    for (std::size_t i = 0; i < p.enc_b1.size(); ++i) p.enc_b1[i] += scale * g.enc_b1[i];
    for (std::size_t i = 0; i < p.enc_w2.data.size(); ++i) p.enc_w2.data[i] += scale * g.enc_w2.data[i];
    for (std::size_t i = 0; i < p.enc_b2.size(); ++i) p.enc_b2[i] += scale * g.enc_b2[i];
    for (std::size_t i = 0; i < p.bio_w.data.size(); ++i) p.bio_w.data[i] += scale * g.bio_w.data[i];
    for (std::size_t i = 0; i < p.bio_b.size(); ++i) p.bio_b[i] += scale * g.bio_b[i];
    for (std::size_t i = 0; i < p.head_w.size(); ++i) p.head_w[i] += scale * g.head_w[i];
    p.head_b += scale * g.head_b;
}

namespace {

struct Block {
    const char* name;
    std::size_t rows, cols;
    const std::vector<double>* data;
};

std::vector<Block> layout(const StudentParams& p) {
    return {
        {"enc_w1", p.enc_w1.rows, p.enc_w1.cols, &p.enc_w1.data},
        {"enc_b1", 1, p.enc_b1.size(), &p.enc_b1},
        {"enc_w2", p.enc_w2.rows, p.enc_w2.cols, &p.enc_w2.data},
        {"enc_b2", 1, p.enc_b2.size(), &p.enc_b2},
        {"bio_w", p.bio_w.rows, p.bio_w.cols, &p.bio_w.data},
        {"bio_b", 1, p.bio_b.size(), &p.bio_b},
        {"head_w", 1, p.head_w.size(), &p.head_w},
    };
}

void put_f64_le(std::ofstream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::ifstream& in, const std::string& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("checkpoint truncated: " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_params(const std::string& bin_path, const std::string& manifest_path,
                 const StudentParams& p) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + bin_path);
    // Blocks stored as f64 so a reloaded checkpoint is bit-identical.
    for (const auto& blk : layout(p))
        for (double v : *blk.data) put_f64_le(out, v);
    put_f64_le(out, p.head_b);
    if (!out) throw std::runtime_error("write failed: " + bin_path);

    std::ofstream man(manifest_path);
    if (!man) throw std::runtime_error("cannot open for write: " + manifest_path);
    man << "dims," << p.dims.f << "," << p.dims.d << "," << p.dims.m << "," << p.dims.h << "\n";
    man << "seed," << p.seed << "\n";
    for (const auto& blk : layout(p)) man << blk.name << "," << blk.rows << "," << blk.cols << "\n";
    man << "head_b,1,1\n";
    if (!man) throw std::runtime_error("write failed: " + manifest_path);
}

StudentParams load_params(const std::string& bin_path, const std::string& manifest_path) {
    std::ifstream man(manifest_path);
    if (!man) throw std::runtime_error("cannot open: " + manifest_path);
    std::string line;
    StudentDims dims{};
    std::uint64_t seed = 0;
    while (std::getline(man, line)) {
        std::istringstream ss(line);
        std::string key;
        std::getline(ss, key, ',');
        if (key == "dims") {
            char comma;
            ss >> dims.f >> comma >> dims.d >> comma >> dims.m >> comma >> dims.h;
        } else if (key == "seed") {
            ss >> seed;
        }
    }
    StudentParams p = init_student(dims, seed);
    p.seed = seed;

    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + bin_path);
    auto read_into = [&](std::vector<double>& v) {
        for (double& x : v) x = get_f64_le(in, bin_path);
    };
    read_into(p.enc_w1.data);
    read_into(p.enc_b1);
    read_into(p.enc_w2.data);
    read_into(p.enc_b2);
    read_into(p.bio_w.data);
    read_into(p.bio_b);
    read_into(p.head_w);
    p.head_b = get_f64_le(in, bin_path);
    return p;
}

}  // namespace graphkd
