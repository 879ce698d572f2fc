#ifndef GRIDSEQ_MATRIX_HPP
#define GRIDSEQ_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gridseq/core.hpp"

namespace gridseq {

// Dense row-major double matrix. Vectors are 1 x n matrices so every
// learnable array shares one representation.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v) && !is_masked(v)) return false;
        return true;
    }
};

inline Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Fixed ascending-k summation per output element; the i-k-j loop order
// keeps that order while staying cache friendly.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* crow = &c.data[i * b.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// c += a^T * b, accumulating in place (hot path in backprop).
inline void matmul_at_b_add(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw ShapeError("matmul_at_b_add: shape mismatch");
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = &a.data[k * a.cols];
        const double* brow = &b.data[k * b.cols];
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = &c.data[i * c.cols];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
}

// c += a * b^T.
inline void matmul_a_bt_add(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw ShapeError("matmul_a_bt_add: shape mismatch");
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* crow = &c.data[i * c.cols];
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = &b.data[j * b.cols];
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            crow[j] += s;
        }
    }
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

// Row-wise softmax with max subtraction. Sentinel entries get weight
// exactly 0; an all-masked row yields all zeros.
inline Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double mx = 0.0;
        bool any = false;
        for (std::size_t j = 0; j < m.cols; ++j) {
            double v = m(i, j);
            if (is_masked(v)) continue;
            if (!any || v > mx) mx = v;
            any = true;
        }
        if (!any) continue;
        double denom = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            double v = m(i, j);
            double e = is_masked(v) ? 0.0 : std::exp(v - mx);
            out(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) /= denom;
    }
    return out;
}

// (v - mean) / sqrt(var + eps) * gain + bias, population variance.
inline std::vector<double> layer_norm(const std::vector<double>& v,
                                      const std::vector<double>& gain,
                                      const std::vector<double>& bias, double eps) {
    if (v.size() != gain.size() || v.size() != bias.size())
        throw ShapeError("layer_norm: length mismatch");
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (v[i] - mean) * inv * gain[i] + bias[i];
    return out;
}

// Exact GELU: x * Phi(x) with the Gaussian CDF via erf.
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

inline double gelu_derivative(double x) {
    const double phi_cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    const double phi_pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return phi_cdf + x * phi_pdf;
}

inline std::vector<double> gelu(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = gelu(v[i]);
    return out;
}

}  // namespace gridseq

#endif  // GRIDSEQ_MATRIX_HPP
