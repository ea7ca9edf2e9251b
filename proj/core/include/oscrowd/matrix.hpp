#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscrowd {

using Vec = std::vector<double>;

// Dense row-major matrix. Every shape in this project is tiny (tens by
// tens), so plain loops beat any BLAS dispatch overhead.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    static Matrix from_rows(const std::vector<Vec>& rows_in) {
        if (rows_in.empty()) return Matrix();
        Matrix m(rows_in.size(), rows_in.front().size());
        for (std::size_t r = 0; r < m.rows; ++r) {
            if (rows_in[r].size() != m.cols)
                throw std::invalid_argument("Matrix::from_rows: ragged input");
            for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = rows_in[r][c];
        }
        return m;
    }

    Vec row(std::size_t r) const {
        return Vec(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                   data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    }
};

inline void check_shape(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("shape error: " + what);
}

// out = a * b^T   (a: n x k, b: m x k, out: n x m)
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    check_shape(a.cols == b.cols, "matmul_bt inner dimensions");
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
            out(i, j) = s;
        }
    return out;
}

// out = a * b     (a: n x k, b: k x m, out: n x m)
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    check_shape(a.cols == b.rows, "matmul inner dimensions");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

// out = a^T * b   (a: k x n, b: k x m, out: n x m)
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
    check_shape(a.rows == b.rows, "matmul_at inner dimensions");
    Matrix out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k)
        for (std::size_t i = 0; i < a.cols; ++i) {
            double aki = a(k, i);
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aki * b(k, j);
        }
    return out;
}

inline double squared_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("squared_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace oscrowd
