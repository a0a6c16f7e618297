#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvad/activations.hpp"
#include "mvad/lstm_vae.hpp"

#include "support/finite_diff.hpp"

#include <cmath>

using namespace mvad;

// ---------------------------------------------------------------------------
// prior schedule
// ---------------------------------------------------------------------------

TEST_CASE("prior_mean: endpoints and linear midpoint") {
    PriorSchedule s{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}, 3};
    CHECK(prior_mean(1, s) == Vector{0.0, 0.0, 0.0});
    CHECK(prior_mean(3, s) == Vector{2.0, 2.0, 2.0});
    CHECK(prior_mean(2, s) == Vector{1.0, 1.0, 1.0});
    CHECK_THROWS_AS(prior_mean(0, s), std::out_of_range);
    CHECK_THROWS_AS(prior_mean(4, s), std::out_of_range);

    PriorSchedule single{{0.5}, {9.0}, 1};
    CHECK(prior_mean(1, single) == Vector{0.5});
}

// ---------------------------------------------------------------------------
// KL term (frozen analytic values)
// ---------------------------------------------------------------------------

TEST_CASE("kl_term: analytic fixtures") {
    // Identical Gaussians.
    DiagGaussian q{{0.7, -0.3, 1.1}, {1.0, 1.0, 1.0}};
    CHECK(kl_term(q, q.mean) == doctest::Approx(0.0).epsilon(1e-12));

    // K=1, mean gap 2, unit variance: 0.5*(1 + 4 - 1 - 0) = 2.
    DiagGaussian q1{{0.0}, {1.0}};
    CHECK(kl_term(q1, Vector{2.0}) == doctest::Approx(2.0).epsilon(1e-9));

    // K=2, matched means, var 0.5: 0.5*(1.0 + 0 - 2 - log 0.25).
    DiagGaussian q2{{0.4, -0.2}, {0.5, 0.5}};
    const double expect = 0.5 * (1.0 - 2.0 - std::log(0.25));
    CHECK(expect == doctest::Approx(0.19314718055994531).epsilon(1e-12));
    CHECK(kl_term(q2, q2.mean) == doctest::Approx(expect).epsilon(1e-9));

    CHECK_THROWS_AS(kl_term(DiagGaussian{{0.0}, {0.0}}, Vector{0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(kl_term(DiagGaussian{{0.0}, {-1.0}}, Vector{0.0}),
                    std::domain_error);
}

TEST_CASE("kl_term: non-negative over random Gaussians, zero only at the prior") {
    Rng rng(41);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = 1 + trial % 5;
        DiagGaussian q;
        Vector mu_p(k);
        q.mean.resize(k);
        q.var.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            q.mean[i] = rng.uniform(-3.0, 3.0);
            q.var[i] = std::exp(rng.uniform(-3.0, 2.0));
            mu_p[i] = rng.uniform(-3.0, 3.0);
        }
        const double kl = kl_term(q, mu_p);
        CHECK(kl >= -1e-12);

        bool at_prior = true;
        for (std::size_t i = 0; i < k; ++i)
            at_prior = at_prior && std::fabs(q.mean[i] - mu_p[i]) < 1e-13 &&
                       std::fabs(q.var[i] - 1.0) < 1e-13;
        if (kl <= 1e-12) CHECK(at_prior);
        if (at_prior) CHECK(kl <= 1e-12);
    }
    // Exact zero point.
    DiagGaussian q{{1.0, -2.0}, {1.0, 1.0}};
    CHECK(std::fabs(kl_term(q, q.mean)) <= 1e-12);
}

// ---------------------------------------------------------------------------
// Gaussian NLL (frozen analytic values)
// ---------------------------------------------------------------------------

TEST_CASE("gaussian_nll: analytic fixtures") {
    const double half_log_2pi = 0.91893853320467274178;
    CHECK(gaussian_nll(Vector{0.3}, DiagGaussian{{0.3}, {1.0}}) ==
          doctest::Approx(half_log_2pi).epsilon(1e-9));
    CHECK(gaussian_nll(Vector{1.3}, DiagGaussian{{0.3}, {1.0}}) ==
          doctest::Approx(half_log_2pi + 0.5).epsilon(1e-9));
    CHECK(gaussian_nll(Vector{0.1, -0.2}, DiagGaussian{{0.1, -0.2}, {1.0, 1.0}}) ==
          doctest::Approx(2.0 * half_log_2pi).epsilon(1e-9));
    CHECK_THROWS_AS(gaussian_nll(Vector{0.0}, DiagGaussian{{0.0}, {0.0}}),
                    std::domain_error);
}

TEST_CASE("gaussian_nll: minimized over the mean at mu = x") {
    DiagGaussian r{{0.42, -0.13, 0.8}, {0.5, 2.0, 1.3}};
    Vector x = r.mean;
    auto f = [&]() { return gaussian_nll(x, r); };
    for (std::size_t i = 0; i < 3; ++i) {
        const double g = testsup::central_diff(f, &r.mean[i]);
        CHECK(std::fabs(g) < 1e-7);
    }
    // And strictly increasing when moving away.
    const double at_min = gaussian_nll(x, r);
    r.mean[0] += 0.3;
    CHECK(gaussian_nll(x, r) > at_min);
}

// ---------------------------------------------------------------------------
// sampling / corruption
// ---------------------------------------------------------------------------

TEST_CASE("sample_diag_gaussian: zero variance returns the mean exactly") {
    Rng rng(3);
    Vector mu = {0.5, -1.25, 3.0}, var = {0.0, 0.0, 0.0};
    CHECK(sample_diag_gaussian(mu, var, rng) == mu);
    CHECK_THROWS_AS(sample_diag_gaussian(mu, Vector{-0.1, 1.0, 1.0}, rng),
                    std::domain_error);
}

TEST_CASE("sample_diag_gaussian: deterministic under a fixed seed") {
    Vector mu = {0.0, 0.0}, var = {1.0, 2.0};
    Rng a(99), b(99);
    CHECK(sample_diag_gaussian(mu, var, a) == sample_diag_gaussian(mu, var, b));
}

TEST_CASE("sample_diag_gaussian: moments at 1e5 samples") {
    Rng rng(123);
    Vector mu = {0.0}, var = {1.0};
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = sample_diag_gaussian(mu, var, rng)[0];
        s += z;
        s2 += z * z;
    }
    const double mean = s / n;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(s2 / n - mean * mean - 1.0) < 0.03);
}

TEST_CASE("corrupt: zero noise is the identity; std matches at 1e5 draws") {
    Rng rng(7);
    Vector x = {0.25, 0.75};
    CHECK(corrupt(x, 0.0, rng) == x);

    Rng a(11), b(11);
    CHECK(corrupt(x, 0.1, a) == corrupt(x, 0.1, b));

    Rng rng2(2020);
    const int n = 50000; // 1e5 scalar draws over 2 dims
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vector c = corrupt(x, 0.1, rng2);
        for (int d = 0; d < 2; ++d) {
            const double e = c[d] - x[d];
            s += e;
            s2 += e * e;
        }
    }
    const double m = s / (2 * n);
    const double sd = std::sqrt(s2 / (2 * n) - m * m);
    CHECK(sd > 0.098);
    CHECK(sd < 0.102);
}

// ---------------------------------------------------------------------------
// encoder / decoder steps
// ---------------------------------------------------------------------------

namespace {
LstmVaeConfig tiny_config() {
    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 2;
    cfg.enc_hidden = 4;
    cfg.dec_hidden = 4;
    cfg.seed = 17;
    return cfg;
}
} // namespace

TEST_CASE("encode/decode: positive variance, determinism, reset semantics") {
    auto cfg = tiny_config();
    Rng rng(cfg.seed);
    auto p = LstmVaeParams::create(cfg, rng);

    RecurrentState enc;
    CHECK_THROWS_AS(encode_step(Vector{0.1, 0.2}, p, enc), std::logic_error);

    enc.reset(cfg.enc_hidden);
    Vector x = {0.3, 0.8};
    auto q1 = encode_step(x, p, enc);
    for (double v : q1.var) CHECK(v > 0.0);

    // Re-running from a fresh reset reproduces the trace: no state leakage.
    RecurrentState enc2;
    enc2.reset(cfg.enc_hidden);
    auto q2 = encode_step(x, p, enc2);
    CHECK(q1.mean == q2.mean);
    CHECK(q1.var == q2.var);

    RecurrentState dec;
    CHECK_THROWS_AS(decode_step(q1.mean, p, dec), std::logic_error);
    dec.reset(cfg.dec_hidden);
    auto r = decode_step(q1.mean, p, dec);
    for (double v : r.var) CHECK(v > 0.0);
}

TEST_CASE("encode: zero-weight model emits the head biases at every step") {
    auto cfg = tiny_config();
    auto p = LstmVaeParams::shaped_like(cfg);
    p.enc_mu.b = {0.37, -0.2};
    p.enc_var.b = {0.5, -0.5};

    RecurrentState enc;
    enc.reset(cfg.enc_hidden);
    for (int t = 0; t < 5; ++t) {
        auto q = encode_step(Vector{0.1 * t, -0.3}, p, enc);
        CHECK(q.mean[0] == doctest::Approx(0.37).epsilon(1e-12));
        CHECK(q.mean[1] == doctest::Approx(-0.2).epsilon(1e-12));
        CHECK(q.var[0] == doctest::Approx(softplus(0.5)).epsilon(1e-12));
        CHECK(q.var[1] == doctest::Approx(softplus(-0.5)).epsilon(1e-12));
    }
}

TEST_CASE("decode: zero-weight model emits the head biases at every step") {
    auto cfg = tiny_config();
    auto p = LstmVaeParams::shaped_like(cfg);
    p.dec_mu.b = {0.9, 0.1};
    RecurrentState dec;
    dec.reset(cfg.dec_hidden);
    for (int t = 0; t < 4; ++t) {
        auto r = decode_step(Vector{0.0, 1.0}, p, dec);
        CHECK(r.mean[0] == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(r.mean[1] == doctest::Approx(0.1).epsilon(1e-12));
    }
}

// ---------------------------------------------------------------------------
// sequence loss
// ---------------------------------------------------------------------------

TEST_CASE("sequence_loss: T=1 equals kl_term + gaussian_nll") {
    auto cfg = tiny_config();
    cfg.sigma_noise = 0.0;
    Rng prng(cfg.seed);
    auto p = LstmVaeParams::create(cfg, prng);
    PriorSchedule prior = cfg.prior_for(1);

    Matrix seq(1, 2);
    seq(0, 0) = 0.4;
    seq(0, 1) = 0.6;

    Rng loss_rng(55);
    const double loss = sequence_loss(seq, cfg, p, prior, loss_rng);

    // Replay the same draws by hand.
    Rng replay(55);
    Vector x = {0.4, 0.6};
    Vector xc = corrupt(x, 0.0, replay); // consumes D draws
    RecurrentState enc, dec;
    enc.reset(cfg.enc_hidden);
    dec.reset(cfg.dec_hidden);
    auto q = encode_step(xc, p, enc);
    Vector z = sample_diag_gaussian(q.mean, q.var, replay);
    auto r = decode_step(z, p, dec);
    const double expect = kl_term(q, prior_mean(1, prior)) + gaussian_nll(x, r);
    CHECK(loss == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sequence_loss: finite on random data in [0,1]") {
    auto cfg = tiny_config();
    Rng prng(3);
    auto p = LstmVaeParams::create(cfg, prng);
    PriorSchedule prior = cfg.prior_for(20);
    Matrix seq(20, 2);
    Rng data_rng(8);
    for (auto& v : seq.a) v = data_rng.uniform();
    Rng loss_rng(9);
    CHECK(std::isfinite(sequence_loss(seq, cfg, p, prior, loss_rng)));
}

// ---------------------------------------------------------------------------
// full-loss gradient vs finite differences (frozen latent noise)
// ---------------------------------------------------------------------------

namespace {

// One randomized instance of the full-gradient check; returns max rel error.
double vae_grad_check(std::uint64_t seed) {
    Rng rng(seed);
    LstmVaeConfig cfg;
    cfg.input_dim = 1 + rng.below(3);  // D <= 3
    cfg.latent_dim = 1 + rng.below(2); // K <= 2
    cfg.enc_hidden = 3;
    cfg.dec_hidden = 3;
    cfg.sigma_noise = 0.1;
    cfg.seed = seed;

    const std::size_t T = 1 + rng.below(5); // T <= 5
    Rng prng = rng.fork(1);
    auto p = LstmVaeParams::create(cfg, prng);
    PriorSchedule prior = cfg.prior_for(T);

    Matrix x(T, cfg.input_dim), eps_x(T, cfg.input_dim), eps_z(T, cfg.latent_dim);
    Rng drng = rng.fork(2);
    for (auto& v : x.a) v = drng.uniform();
    for (auto& v : eps_x.a) v = drng.normal();
    for (auto& v : eps_z.a) v = drng.normal();

    auto grads = LstmVaeParams::shaped_like(cfg);
    sequence_loss_grad(x, cfg, p, prior, eps_x, eps_z, grads);

    auto f = [&]() {
        auto scratch = LstmVaeParams::shaped_like(cfg);
        return sequence_loss_grad(x, cfg, p, prior, eps_x, eps_z, scratch);
    };

    double worst = 0.0;
    auto analytic = grads.tensors();
    auto live = p.tensors();
    for (std::size_t t = 0; t < live.size(); ++t) {
        worst = std::max(worst,
                         testsup::max_grad_rel_err(f, live[t].data,
                                                   analytic[t].data, live[t].size));
    }
    return worst;
}

} // namespace

TEST_CASE("lstm-vae: full-loss gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double err = vae_grad_check(seed);
        INFO("seed ", seed, " max rel err ", err);
        CHECK(err < 1e-4);
    }
}

// ---------------------------------------------------------------------------
// early stopping + training
// ---------------------------------------------------------------------------

TEST_CASE("early stopper: flat history with patience 4 stops after epoch 5") {
    EarlyStopper s(4, 1e-4);
    CHECK_FALSE(s.observe(5.0)); // epoch 1, improves on +inf
    CHECK_FALSE(s.observe(5.0));
    CHECK_FALSE(s.observe(5.0));
    CHECK_FALSE(s.observe(5.0));
    CHECK(s.observe(5.0)); // epoch 5: 4 stale epochs
    CHECK(s.best_epoch() == 1);
    CHECK(s.epochs_seen() == 5);
}

TEST_CASE("early stopper: improvement resets the stale counter") {
    EarlyStopper s(2, 1e-4);
    CHECK_FALSE(s.observe(5.0));
    CHECK_FALSE(s.observe(5.0));
    CHECK_FALSE(s.observe(4.0)); // reset
    CHECK_FALSE(s.observe(4.0));
    CHECK(s.observe(4.0));
    CHECK(s.best_epoch() == 3);
}

namespace {

// Noisy two-channel sine sequences, the toy training corpus.
std::vector<Matrix> toy_set(std::size_t n, std::size_t T, std::uint64_t seed) {
    std::vector<Matrix> out;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix m(T, 2);
        const double phase = rng.uniform(0.0, 0.4);
        for (std::size_t t = 0; t < T; ++t) {
            const double u = static_cast<double>(t) / static_cast<double>(T - 1);
            m(t, 0) = 0.5 + 0.4 * std::sin(6.28318 * (u + phase)) +
                      0.02 * rng.normal();
            m(t, 1) = 0.5 + 0.3 * std::cos(3.14159 * u + phase) +
                      0.02 * rng.normal();
        }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace

TEST_CASE("train: validation loss improves over epoch 1 on the toy set") {
    auto train = toy_set(20, 50, 100);
    auto val = toy_set(6, 50, 200);

    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 2;
    cfg.enc_hidden = 8;
    cfg.dec_hidden = 8;
    cfg.max_epochs = 25;
    cfg.batch_size = 8;
    cfg.seed = 7;

    auto res = train_lstm_vae(train, val, cfg);
    REQUIRE(res.history.epochs.size() >= 20);
    CHECK(res.history.best_val < res.history.epochs.front().val_loss);
    CHECK(res.history.best_epoch >= 1);

    // Ten-epoch moving average of the training loss decreases (the trend
    // check that tolerates Monte-Carlo noise in single epochs).
    double first10 = 0.0, second10 = 0.0;
    for (int i = 0; i < 10; ++i) {
        first10 += res.history.epochs[i].train_loss;
        second10 += res.history.epochs[10 + i].train_loss;
    }
    CHECK(second10 < first10);
}

TEST_CASE("train: two-phase warm start continues from the first phase") {
    auto pool = toy_set(16, 30, 500);
    auto pool_val = toy_set(4, 30, 501);
    auto fine = toy_set(10, 30, 600);
    auto fine_val = toy_set(4, 30, 601);

    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 2;
    cfg.enc_hidden = 8;
    cfg.dec_hidden = 8;
    cfg.max_epochs = 10;
    cfg.seed = 77;

    auto phase1 = train_lstm_vae(pool, pool_val, cfg);
    auto cold = train_lstm_vae(fine, fine_val, cfg);
    auto warm = train_lstm_vae(fine, fine_val, cfg, &phase1.params);

    // Warm start is actually used: the fine-tuned weights differ from the
    // cold run's, and the first-epoch validation loss benefits from phase 1.
    bool differs = false;
    warm.params.visit([&](const char* name, const std::vector<double>& v) {
        cold.params.visit([&](const char* name_b, const std::vector<double>& vb) {
            if (std::string(name) == name_b && v != vb) differs = true;
        });
    });
    CHECK(differs);
    CHECK(warm.history.epochs.front().val_loss <
          cold.history.epochs.front().val_loss);
}

TEST_CASE("train: fixed seed reproduces identical parameters bitwise") {
    auto train = toy_set(8, 20, 300);
    auto val = toy_set(3, 20, 400);

    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 2;
    cfg.enc_hidden = 6;
    cfg.dec_hidden = 6;
    cfg.max_epochs = 5;
    cfg.seed = 31;

    auto a = train_lstm_vae(train, val, cfg);
    auto b = train_lstm_vae(train, val, cfg);
    bool same = true;
    a.params.visit([&](const char* name, const std::vector<double>& va) {
        b.params.visit([&](const char* name_b, const std::vector<double>& vb) {
            if (std::string(name) == name_b && va != vb) same = false;
        });
    });
    CHECK(same);
}

TEST_CASE("train: rejects empty and ragged datasets") {
    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 1;
    cfg.enc_hidden = 4;
    cfg.dec_hidden = 4;
    std::vector<Matrix> empty;
    auto some = toy_set(3, 10, 1);
    CHECK_THROWS_AS(train_lstm_vae(empty, some, cfg), std::invalid_argument);
    CHECK_THROWS_AS(train_lstm_vae(some, empty, cfg), std::invalid_argument);
    auto ragged = toy_set(3, 10, 2);
    ragged.push_back(Matrix(11, 2));
    CHECK_THROWS_AS(train_lstm_vae(ragged, some, cfg), std::invalid_argument);
}
