#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvad {

using Vector = std::vector<double>;

// Row-major dense matrix of f64.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), a(r * c, fill) {}

    double* operator[](std::size_t r) { return a.data() + r * cols; }
    const double* operator[](std::size_t r) const { return a.data() + r * cols; }

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    std::size_t size() const { return a.size(); }
    double* data() { return a.data(); }
    const double* data() const { return a.data(); }

    void fill(double v) { a.assign(a.size(), v); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

inline bool all_finite(const Vector& v) { return all_finite(v.data(), v.size()); }
inline bool all_finite(const Matrix& m) { return all_finite(m.data(), m.size()); }

inline void require_size(const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(n) + ", got " +
                                    std::to_string(v.size()));
}

} // namespace mvad
