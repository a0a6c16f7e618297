#include "mvad/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2 kernel variants (4 x f64 lanes).
//
// Elementwise kernels avoid FMA on purpose: mul-then-add rounds exactly like
// the scalar reference, so those kernels are bit-identical across backends.
// The reductions (dot/sum/sumsq/matvec) use FMA and lane accumulators and are
// only equivalent up to rounding.

namespace mvad::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double row_dot(const double* row, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc);
    }
    double r = hsum(acc);
    for (; j < n; ++j) r += row[j] * x[j];
    return r;
}

void matvec_v(const double* W, const double* x, double* y,
              std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) y[i] = row_dot(W + i * cols, x, cols);
}

void matvec_acc_v(const double* W, const double* x, double* y,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) y[i] += row_dot(W + i * cols, x, cols);
}

void matvec_t_acc_v(const double* W, const double* dy, double* dx,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = W + i * cols;
        const __m256d a = _mm256_set1_pd(dy[i]);
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d d = _mm256_loadu_pd(dx + j);
            d = _mm256_add_pd(d, _mm256_mul_pd(a, _mm256_loadu_pd(row + j)));
            _mm256_storeu_pd(dx + j, d);
        }
        for (; j < cols; ++j) dx[j] += dy[i] * row[j];
    }
}

void ger_acc_v(double* W, const double* dy, const double* x,
               std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = W + i * cols;
        const __m256d a = _mm256_set1_pd(dy[i]);
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d w = _mm256_loadu_pd(row + j);
            w = _mm256_add_pd(w, _mm256_mul_pd(a, _mm256_loadu_pd(x + j)));
            _mm256_storeu_pd(row + j, w);
        }
        for (; j < cols; ++j) row[j] += dy[i] * x[j];
    }
}

double dot_v(const double* a, const double* b, std::size_t n) {
    return row_dot(a, b, n);
}

double sum_v(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

double sumsq_v(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(x, x, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * a[i];
    return r;
}

void axpy_v(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_v(double a, double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

void add_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void hadamard_v(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void adam_step_v(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, long k) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(k));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(k));
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_add_pd(_mm256_mul_pd(b1, mi), _mm256_mul_pd(omb1, gi));
        vi = _mm256_add_pd(_mm256_mul_pd(b2, vi),
                           _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, bc1v);
        const __m256d vhat = _mm256_div_pd(vi, bc2v);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        __m256d pi = _mm256_loadu_pd(p + i);
        pi = _mm256_sub_pd(pi, _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom));
        _mm256_storeu_pd(p + i, pi);
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

const Ops* avx2_ops_table() {
    static const Ops table = {
        "avx2",
        matvec_v, matvec_acc_v, matvec_t_acc_v, ger_acc_v,
        dot_v,    sum_v,        sumsq_v,
        axpy_v,   scale_v,      add_v, sub_v, hadamard_v,
        adam_step_v,
    };
    return &table;
}

} // namespace mvad::kernels
