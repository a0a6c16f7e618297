#pragma once

// Runtime-dispatched arithmetic kernels.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at startup (overridable with MVAD_KERNELS=scalar|avx2 or
// force_backend()). The elementwise kernels (axpy, ger_acc, matvec_t_acc,
// adam_step, ...) produce bit-identical results across variants; the
// reduction kernels (dot, sum, sumsq, matvec) reassociate and agree only up
// to rounding. tests/test_kernels.cpp holds the equivalence suite.

#include <cstddef>

namespace mvad::kernels {

struct Ops {
    const char* name;

    // y = W x            (W row-major, rows x cols)
    void (*matvec)(const double* W, const double* x, double* y,
                   std::size_t rows, std::size_t cols);
    // y += W x
    void (*matvec_acc)(const double* W, const double* x, double* y,
                       std::size_t rows, std::size_t cols);
    // dx += W^T dy
    void (*matvec_t_acc)(const double* W, const double* dy, double* dx,
                         std::size_t rows, std::size_t cols);
    // W += dy x^T        (rank-1 update, gradient accumulation)
    void (*ger_acc)(double* W, const double* dy, const double* x,
                    std::size_t rows, std::size_t cols);

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*sumsq)(const double* a, std::size_t n);

    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x *= a
    void (*scale)(double a, double* x, std::size_t n);
    // out = a + b / a - b / a .* b
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);

    // One Adam step with bias correction; k is the already-incremented step
    // counter (k >= 1).
    void (*adam_step)(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, long k);
};

// Kernel table in use. Picks AVX2 when the CPU supports it, else scalar.
const Ops& active();

const Ops& scalar_ops();

// AVX2 table, or nullptr when unsupported (non-x86 build or older CPU).
const Ops* avx2_ops();

// Pin the backend for the rest of the process ("scalar" or "avx2").
// Throws std::invalid_argument for unknown or unavailable backends.
void force_backend(const char* name);

} // namespace mvad::kernels
