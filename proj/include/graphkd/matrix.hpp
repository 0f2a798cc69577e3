#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace graphkd {

// Dense row-major double matrix. Cohorts are a few hundred rows, so no BLAS.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    void set_row(std::size_t r, std::span<const double> values);

    bool empty() const { return rows == 0 || cols == 0; }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Sidecar matrix file: 8-byte header (u32 rows, u32 cols, little endian)
// followed by row-major float32 values, little endian.
void write_matrix_f32(const std::string& path, const Matrix& m);
Matrix read_matrix_f32(const std::string& path);

// Companion id list: one id per line, order matching the sidecar rows.
void write_id_list(const std::string& path, const std::vector<std::string>& ids);
std::vector<std::string> read_id_list(const std::string& path);

}  // namespace graphkd
