#include "mvad/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, one accumulator, no reassociation tricks:
// this is the semantics the SIMD variants are tested against.

namespace mvad::kernels {
namespace {

void matvec_s(const double* W, const double* x, double* y,
              std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = W + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void matvec_acc_s(const double* W, const double* x, double* y,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = W + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] += acc;
    }
}

void matvec_t_acc_s(const double* W, const double* dy, double* dx,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = W + i * cols;
        const double a = dy[i];
        for (std::size_t j = 0; j < cols; ++j) dx[j] += a * row[j];
    }
}

void ger_acc_s(double* W, const double* dy, const double* x,
               std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = W + i * cols;
        const double a = dy[i];
        for (std::size_t j = 0; j < cols; ++j) row[j] += a * x[j];
    }
}

double dot_s(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_s(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sumsq_s(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

void axpy_s(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_s(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void hadamard_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void adam_step_s(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, long k) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(k));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table = {
        "scalar",
        matvec_s, matvec_acc_s, matvec_t_acc_s, ger_acc_s,
        dot_s,    sum_s,        sumsq_s,
        axpy_s,   scale_s,      add_s, sub_s, hadamard_s,
        adam_step_s,
    };
    return table;
}

} // namespace mvad::kernels
