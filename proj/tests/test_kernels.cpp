#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvad/kernels.hpp"
#include "mvad/rng.hpp"

#include <cmath>
#include <vector>

using namespace mvad;
using kernels::Ops;

namespace {

std::vector<double> randvec(Rng& rng, std::size_t n, double lo = -1.0,
                            double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace

TEST_CASE("dispatch selects a known backend and can be forced") {
    const Ops& t = kernels::active();
    CHECK((std::string(t.name) == "scalar" || std::string(t.name) == "avx2"));

    kernels::force_backend("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    if (kernels::avx2_ops()) {
        kernels::force_backend("avx2");
        CHECK(std::string(kernels::active().name) == "avx2");
    }
    CHECK_THROWS(kernels::force_backend("sse9"));
    kernels::force_backend("scalar");
}

TEST_CASE("scalar vs avx2: elementwise kernels are bit-identical") {
    const Ops* vec = kernels::avx2_ops();
    if (!vec) {
        MESSAGE("AVX2 unavailable; skipping equivalence checks");
        return;
    }
    const Ops& ref = kernels::scalar_ops();
    Rng rng(7);

    // Sizes straddling the 4-lane width, including remainders.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 16u, 33u, 67u, 256u}) {
        auto x = randvec(rng, n), base = randvec(rng, n);
        const double a = rng.uniform(-2.0, 2.0);

        auto y1 = base, y2 = base;
        ref.axpy(a, x.data(), y1.data(), n);
        vec->axpy(a, x.data(), y2.data(), n);
        CHECK(bit_equal(y1, y2));

        y1 = base;
        y2 = base;
        ref.scale(a, y1.data(), n);
        vec->scale(a, y2.data(), n);
        CHECK(bit_equal(y1, y2));

        std::vector<double> o1(n), o2(n);
        ref.add(x.data(), base.data(), o1.data(), n);
        vec->add(x.data(), base.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));
        ref.sub(x.data(), base.data(), o1.data(), n);
        vec->sub(x.data(), base.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));
        ref.hadamard(x.data(), base.data(), o1.data(), n);
        vec->hadamard(x.data(), base.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));
    }
}

TEST_CASE("scalar vs avx2: rank-1 update and transposed matvec bit-identical") {
    const Ops* vec = kernels::avx2_ops();
    if (!vec) return;
    const Ops& ref = kernels::scalar_ops();
    Rng rng(11);

    for (auto [rows, cols] : std::vector<std::pair<std::size_t, std::size_t>>{
             {1, 1}, {3, 5}, {4, 4}, {8, 7}, {128, 17}, {128, 32}, {13, 67}}) {
        auto W0 = randvec(rng, rows * cols);
        auto dy = randvec(rng, rows);
        auto x = randvec(rng, cols);

        auto W1 = W0, W2 = W0;
        ref.ger_acc(W1.data(), dy.data(), x.data(), rows, cols);
        vec->ger_acc(W2.data(), dy.data(), x.data(), rows, cols);
        CHECK(bit_equal(W1, W2));

        auto dx1 = randvec(rng, cols);
        auto dx2 = dx1;
        ref.matvec_t_acc(W0.data(), dy.data(), dx1.data(), rows, cols);
        vec->matvec_t_acc(W0.data(), dy.data(), dx2.data(), rows, cols);
        CHECK(bit_equal(dx1, dx2));
    }
}

TEST_CASE("scalar vs avx2: adam_step bit-identical") {
    const Ops* vec = kernels::avx2_ops();
    if (!vec) return;
    const Ops& ref = kernels::scalar_ops();
    Rng rng(13);

    for (std::size_t n : {1u, 5u, 64u, 113u}) {
        auto p0 = randvec(rng, n), g = randvec(rng, n);
        auto m0 = randvec(rng, n, 0.0, 0.1), v0 = randvec(rng, n, 0.0, 0.1);
        for (long k = 1; k <= 3; ++k) {
            auto p1 = p0, p2 = p0, m1 = m0, m2 = m0, v1 = v0, v2 = v0;
            ref.adam_step(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3,
                          0.9, 0.999, 1e-8, k);
            vec->adam_step(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-3,
                           0.9, 0.999, 1e-8, k);
            CHECK(bit_equal(p1, p2));
            CHECK(bit_equal(m1, m2));
            CHECK(bit_equal(v1, v2));
        }
    }
}

TEST_CASE("scalar vs avx2: reductions agree to rounding") {
    const Ops* vec = kernels::avx2_ops();
    if (!vec) return;
    const Ops& ref = kernels::scalar_ops();
    Rng rng(17);

    for (std::size_t n : {1u, 3u, 4u, 9u, 31u, 128u, 513u}) {
        auto a = randvec(rng, n), b = randvec(rng, n);
        // Tolerance scaled by the sum of magnitudes: reassociation error only.
        double mag = 1.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);

        CHECK(std::fabs(ref.dot(a.data(), b.data(), n) -
                        vec->dot(a.data(), b.data(), n)) <= 1e-13 * mag);
        CHECK(std::fabs(ref.sum(a.data(), n) - vec->sum(a.data(), n)) <=
              1e-13 * mag);
        CHECK(std::fabs(ref.sumsq(a.data(), n) - vec->sumsq(a.data(), n)) <=
              1e-13 * mag);
    }

    for (auto [rows, cols] : std::vector<std::pair<std::size_t, std::size_t>>{
             {1, 1}, {4, 3}, {128, 17}, {128, 32}, {7, 65}}) {
        auto W = randvec(rng, rows * cols);
        auto x = randvec(rng, cols);
        std::vector<double> y1(rows), y2(rows);
        ref.matvec(W.data(), x.data(), y1.data(), rows, cols);
        vec->matvec(W.data(), x.data(), y2.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            double mag = 1.0;
            for (std::size_t j = 0; j < cols; ++j)
                mag += std::fabs(W[i * cols + j] * x[j]);
            CHECK(std::fabs(y1[i] - y2[i]) <= 1e-13 * mag);
        }

        auto acc = randvec(rng, rows);
        auto y3 = acc, y4 = acc;
        ref.matvec_acc(W.data(), x.data(), y3.data(), rows, cols);
        vec->matvec_acc(W.data(), x.data(), y4.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            CHECK(y3[i] == doctest::Approx(y4[i]).epsilon(1e-12));
    }
}
