#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvad/activations.hpp"
#include "mvad/adam.hpp"
#include "mvad/dense.hpp"
#include "mvad/lstm_cell.hpp"
#include "mvad/rng.hpp"
#include "mvad/tensor.hpp"

#include "support/finite_diff.hpp"

#include <cmath>

using namespace mvad;

TEST_CASE("rng: identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
    Rng c = Rng(5).fork(3), d = Rng(5).fork(3);
    CHECK(c.next_u64() == d.next_u64());
    CHECK(Rng(5).fork(3).next_u64() != Rng(5).fork(4).next_u64());
}

TEST_CASE("rng: normal moments at 1e5 samples") {
    Rng rng(2024);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("softplus: positive, exact at 0, stable at +-700") {
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(softplus(-700.0) > 0.0);
    CHECK(std::isfinite(softplus(700.0)));
    CHECK(softplus(700.0) == doctest::Approx(700.0));
    for (double x = -30.0; x <= 30.0; x += 0.37) CHECK(softplus(x) > 0.0);
}

TEST_CASE("lstm: all-zero parameters give h = 0, c = 0") {
    LstmCellParams p(3, 4); // all zeros by construction
    LstmState st;
    st.reset(4);
    Rng rng(1);
    Vector x = {0.3, -1.2, 0.7};
    lstm_cell_step(x, st, p);
    for (double v : st.h) CHECK(v == 0.0);
    for (double v : st.c) CHECK(v == 0.0);
}

TEST_CASE("lstm: hidden state stays inside (-1, 1)") {
    Rng rng(9);
    LstmCellParams p(2, 3);
    p.init(rng);
    // Crank the weights so the gates saturate.
    for (auto& w : p.W.a) w *= 50.0;
    for (auto& w : p.U.a) w *= 50.0;
    LstmState st;
    st.reset(3);
    for (int t = 0; t < 30; ++t) {
        Vector x = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
        lstm_cell_step(x, st, p);
        for (double v : st.h) CHECK(std::fabs(v) < 1.0);
    }
}

TEST_CASE("lstm: shape mismatch raises") {
    LstmCellParams p(3, 4);
    LstmState st;
    st.reset(4);
    Vector wrong = {1.0, 2.0};
    CHECK_THROWS_AS(lstm_cell_step(wrong, st, p), std::invalid_argument);
}

TEST_CASE("lstm: deterministic forward") {
    Rng rng(33);
    LstmCellParams p(3, 5);
    p.init(rng);
    Vector x = {0.1, -0.4, 0.9};
    LstmState a, b;
    a.reset(5);
    b.reset(5);
    lstm_cell_step(x, a, p);
    lstm_cell_step(x, b, p);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.h[i] == b.h[i]);
        CHECK(a.c[i] == b.c[i]);
    }
}

TEST_CASE("lstm: backward matches central finite differences") {
    Rng rng(77);
    const std::size_t I = 3, H = 4;
    LstmCellParams p(I, H);
    p.init(rng);
    Vector x(I), h0(H), c0(H), wh(H), wc(H);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (auto& v : h0) v = rng.uniform(-0.5, 0.5);
    for (auto& v : c0) v = rng.uniform(-0.5, 0.5);
    for (auto& v : wh) v = rng.uniform(-1.0, 1.0);
    for (auto& v : wc) v = rng.uniform(-1.0, 1.0);

    // Scalar probe loss: fixed projection of the step outputs.
    auto f = [&]() {
        LstmState st;
        st.h = h0;
        st.c = c0;
        lstm_cell_step(x, st, p);
        double s = 0.0;
        for (std::size_t j = 0; j < H; ++j) s += wh[j] * st.h[j] + wc[j] * st.c[j];
        return s;
    };

    LstmStepCache cache;
    LstmState st;
    st.h = h0;
    st.c = c0;
    lstm_cell_step(x, st, p, &cache);

    LstmCellParams grads(I, H);
    Vector dx, dhp, dcp;
    lstm_cell_backward(cache, p, wh, wc, grads, dx, dhp, dcp);

    CHECK(testsup::max_grad_rel_err(f, p.W.data(), grads.W.data(), p.W.size()) < 1e-5);
    CHECK(testsup::max_grad_rel_err(f, p.U.data(), grads.U.data(), p.U.size()) < 1e-5);
    CHECK(testsup::max_grad_rel_err(f, p.b.data(), grads.b.data(), p.b.size()) < 1e-5);
    CHECK(testsup::max_grad_rel_err(f, x.data(), dx.data(), I) < 1e-5);
    CHECK(testsup::max_grad_rel_err(f, h0.data(), dhp.data(), H) < 1e-5);
    CHECK(testsup::max_grad_rel_err(f, c0.data(), dcp.data(), H) < 1e-5);
}

TEST_CASE("dense: identity map") {
    DenseParams p(3, 3, Activation::identity);
    p.W = Matrix::identity(3);
    Vector x = {0.5, -2.0, 3.25}, y;
    dense_forward(x, p, y);
    CHECK(y == x);
}

TEST_CASE("dense: activation values at zero pre-activation") {
    DenseParams sp(2, 2, Activation::softplus);
    DenseParams th(2, 2, Activation::tanh);
    Vector x = {0.0, 0.0}, y;
    dense_forward(x, sp, y);
    CHECK(y[0] == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    dense_forward(x, th, y);
    CHECK(y[0] == 0.0);
}

TEST_CASE("dense: squared-error gradient matches closed form 2(Wx+b-y)x^T") {
    Rng rng(5);
    DenseParams p(3, 2, Activation::identity);
    p.init(rng);
    Vector x = {0.2, -0.7, 1.1}, target = {0.4, -0.1};

    DenseCache cache;
    Vector y;
    dense_forward(x, p, y, &cache);
    Vector dy(2);
    for (int i = 0; i < 2; ++i) dy[i] = 2.0 * (y[i] - target[i]);

    DenseParams grads(3, 2, Activation::identity);
    dense_backward(cache, p, dy, grads, nullptr);

    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(grads.W(o, i) ==
                  doctest::Approx(2.0 * (y[o] - target[o]) * x[i]).epsilon(1e-12));
}

TEST_CASE("dense: unit upstream with unit inputs gives all-ones gradients") {
    DenseParams p(3, 2, Activation::identity);
    Vector x = {1.0, 1.0, 1.0};
    DenseCache cache;
    Vector y;
    dense_forward(x, p, y, &cache);
    Vector ones = {1.0, 1.0};
    DenseParams grads(3, 2, Activation::identity);
    dense_backward(cache, p, ones, grads, nullptr);
    for (double g : grads.W.a) CHECK(g == 1.0);
    for (double g : grads.b) CHECK(g == 1.0);
}

TEST_CASE("dense: backward matches finite differences for every activation") {
    Rng rng(21);
    for (Activation act :
         {Activation::identity, Activation::tanh, Activation::softplus}) {
        DenseParams p(4, 3, act);
        p.init(rng);
        Vector x(4), w(3);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        for (auto& v : w) v = rng.uniform(-1.0, 1.0);

        auto f = [&]() {
            Vector y;
            dense_forward(x, p, y);
            double s = 0.0;
            for (std::size_t i = 0; i < 3; ++i) s += w[i] * y[i];
            return s;
        };

        DenseCache cache;
        Vector y;
        dense_forward(x, p, y, &cache);
        DenseParams grads(4, 3, act);
        Vector dx(4, 0.0);
        dense_backward(cache, p, w, grads, &dx);

        CHECK(testsup::max_grad_rel_err(f, p.W.data(), grads.W.data(), p.W.size()) < 1e-5);
        CHECK(testsup::max_grad_rel_err(f, p.b.data(), grads.b.data(), p.b.size()) < 1e-5);
        CHECK(testsup::max_grad_rel_err(f, x.data(), dx.data(), 4) < 1e-5);
    }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    Vector p = {1.0, -2.0, 3.0}, g = {0.0, 0.0, 0.0};
    Adam opt(3);
    std::vector<TensorRef> pr = {{p.data(), 3}}, gr = {{g.data(), 3}};
    opt.step(pr, gr);
    opt.step(pr, gr);
    CHECK(p == Vector{1.0, -2.0, 3.0});
}

TEST_CASE("adam: first-step magnitude is lr * |g| / (|g| + eps)") {
    for (double g0 : {0.5, -3.0, 1e-4}) {
        Vector p = {0.0}, g = {g0};
        AdamConfig cfg;
        Adam opt(1, cfg);
        std::vector<TensorRef> pr = {{p.data(), 1}}, gr = {{g.data(), 1}};
        opt.step(pr, gr);
        const double expect = cfg.lr * std::fabs(g0) / (std::fabs(g0) + cfg.eps);
        CHECK(std::fabs(p[0]) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(p[0] * g0 < 0.0); // step opposes the gradient

    }
}

TEST_CASE("adam: constant gradient moves monotonically against its sign") {
    Vector p = {1.0}, g = {2.5};
    Adam opt(1);
    std::vector<TensorRef> pr = {{p.data(), 1}}, gr = {{g.data(), 1}};
    double prev = p[0];
    for (int i = 0; i < 5; ++i) {
        opt.step(pr, gr);
        CHECK(p[0] < prev);
        prev = p[0];
    }
}

TEST_CASE("clip_global_norm scales only above the threshold") {
    Vector a = {3.0, 0.0}, b = {0.0, 4.0}; // global norm 5
    std::vector<TensorRef> refs = {{a.data(), 2}, {b.data(), 2}};
    CHECK(clip_global_norm(refs, 10.0) == doctest::Approx(5.0));
    CHECK(a[0] == 3.0);
    CHECK(clip_global_norm(refs, 2.5) == doctest::Approx(5.0));
    CHECK(a[0] == doctest::Approx(1.5));
    CHECK(b[1] == doctest::Approx(2.0));
    double ss = a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1];
    CHECK(std::sqrt(ss) == doctest::Approx(2.5));
}
