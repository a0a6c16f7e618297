#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvad/detector.hpp"
#include "mvad/svr.hpp"

#include <cmath>
#include <sstream>

using namespace mvad;

// ---------------------------------------------------------------------------
// expected_score / ThresholdRegressor analytics
// ---------------------------------------------------------------------------

TEST_CASE("regressor: single support point analytic values") {
    // f(z) = 1 * k(z0, z) + 0.
    auto r = ThresholdRegressor::from_parts({{1.0, 2.0}}, {1.0}, 0.0, 1.0);
    CHECK(r.predict({1.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-12));
    // Far away the kernel dies out and only the bias remains.
    CHECK(r.predict({1e3, 1e3}) == doctest::Approx(0.0));

    auto rb = ThresholdRegressor::from_parts({{0.0}}, {1.0}, 0.7, 1.0);
    CHECK(rb.predict({1e4}) == doctest::Approx(0.7));
}

TEST_CASE("regressor: midpoint between two support points, distance 2") {
    // Support at -1 and +1, query 0: both at distance 1 -> 2 e^-1 + b.
    auto r = ThresholdRegressor::from_parts({{-1.0}, {1.0}}, {1.0, 1.0}, 0.25, 1.0);
    CHECK(r.predict({0.0}) ==
          doctest::Approx(2.0 * std::exp(-1.0) + 0.25).epsilon(1e-12));
}

TEST_CASE("regressor: unfitted prediction throws; constant mode") {
    ThresholdRegressor r;
    CHECK_THROWS_AS(r.predict({0.0}), std::logic_error);
    auto c = ThresholdRegressor::constant(1.7);
    CHECK(c.predict({5.0, -2.0}) == 1.7);
    CHECK(c.is_constant());
}

TEST_CASE("svr: constant targets recovered within the tube") {
    Rng rng(3);
    std::vector<Vector> z;
    Vector s;
    for (int i = 0; i < 60; ++i) {
        z.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
        s.push_back(1.7);
    }
    SvrConfig cfg;
    auto r = ThresholdRegressor::fit_svr(z, s, cfg);
    for (int i = 0; i < 10; ++i) {
        Vector q = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        CHECK(std::fabs(r.predict(q) - 1.7) <= cfg.epsilon + 1e-6);
    }
}

TEST_CASE("svr: two separated clusters fit within 0.2 at the centers") {
    Rng rng(9);
    std::vector<Vector> z;
    Vector s;
    for (int i = 0; i < 80; ++i) {
        const bool hi = i % 2 == 0;
        const double cx = hi ? 4.0 : -4.0;
        z.push_back({cx + 0.3 * rng.normal(), 0.3 * rng.normal()});
        s.push_back(hi ? 3.0 : 1.0);
    }
    auto r = ThresholdRegressor::fit_svr(z, s, SvrConfig{});
    CHECK(std::fabs(r.predict({4.0, 0.0}) - 3.0) <= 0.2);
    CHECK(std::fabs(r.predict({-4.0, 0.0}) - 1.0) <= 0.2);
}

TEST_CASE("svr: deterministic fit") {
    Rng rng(11);
    std::vector<Vector> z;
    Vector s;
    for (int i = 0; i < 50; ++i) {
        z.push_back({rng.normal(), rng.normal()});
        s.push_back(1.0 + 0.2 * z.back()[0] * z.back()[0]);
    }
    auto a = ThresholdRegressor::fit_svr(z, s, SvrConfig{});
    auto b = ThresholdRegressor::fit_svr(z, s, SvrConfig{});
    Vector q = {0.3, -0.8};
    CHECK(a.predict(q) == b.predict(q));
}

TEST_CASE("svr: subsampling cap keeps the fit usable") {
    Rng rng(13);
    std::vector<Vector> z;
    Vector s;
    for (int i = 0; i < 3000; ++i) {
        z.push_back({rng.uniform(-1.0, 1.0)});
        s.push_back(2.0);
    }
    SvrConfig cfg;
    cfg.max_train_points = 200;
    auto r = ThresholdRegressor::fit_svr(z, s, cfg);
    CHECK(r.support_size() <= 400); // alpha and alpha* pairs at most
    CHECK(std::fabs(r.predict({0.0}) - 2.0) <= cfg.epsilon + 1e-6);
}

// ---------------------------------------------------------------------------
// detector scoring and online loop
// ---------------------------------------------------------------------------

namespace {

// Detector whose decoder ignores everything and reconstructs N(b, softplus(c)).
TrainedDetector degenerate_detector(std::size_t D, const Vector& mu_bias,
                                    double var_pre) {
    TrainedDetector det;
    det.config.input_dim = D;
    det.config.latent_dim = 2;
    det.config.enc_hidden = 4;
    det.config.dec_hidden = 4;
    det.params = LstmVaeParams::shaped_like(det.config);
    det.params.dec_mu.b = mu_bias;
    det.params.dec_var.b.assign(D, var_pre);
    det.prior = det.config.prior_for(10);
    det.norm.min.assign(D, 0.0);
    det.norm.max.assign(D, 1.0);
    det.resample_len = 10;
    det.regressor = ThresholdRegressor::constant(0.0);
    return det;
}

} // namespace

TEST_CASE("anomaly_score: exact D/2 log 2pi for a perfect unit-variance model") {
    const std::size_t D = 4;
    Vector x = {0.2, 0.4, 0.6, 0.8};
    // softplus(pre) = 1 at pre = log(e - 1).
    const double pre_unit = std::log(std::exp(1.0) - 1.0);
    TrainedDetector det = degenerate_detector(D, x, pre_unit);

    DetectorState st;
    CHECK_THROWS_AS(anomaly_score(x, det, st, nullptr), std::logic_error);
    st.reset(det);
    Vector z;
    const double s = anomaly_score(x, det, st, &z);
    CHECK(s == doctest::Approx(2.0 * 1.8378770664093454).epsilon(1e-9));
    CHECK(s == doctest::Approx(3.675754132818691).epsilon(1e-9));
    CHECK(z.size() == 2);
    CHECK(st.t == 1);
}

TEST_CASE("anomaly_score: deterministic and monotone in the residual") {
    const std::size_t D = 2;
    const double pre_unit = std::log(std::exp(1.0) - 1.0);
    TrainedDetector det = degenerate_detector(D, {0.5, 0.5}, pre_unit);

    DetectorState a, b;
    a.reset(det);
    b.reset(det);
    Vector x = {0.5, 0.7};
    Vector za, zb;
    CHECK(anomaly_score(x, det, a, &za) == anomaly_score(x, det, b, &zb));

    double prev = -1e9;
    for (double off : {0.0, 0.3, 0.8, 1.5, 3.0}) {
        DetectorState st;
        st.reset(det);
        const double s = anomaly_score({0.5 + off, 0.5}, det, st, nullptr);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("detect_step: threshold comparisons from the detection rule") {
    // s = 5.0, f_hat = 3.0: anomaly iff 5 > 3 + c.
    const std::size_t D = 1;
    TrainedDetector det = degenerate_detector(D, {0.0}, std::log(std::exp(1.0) - 1.0));
    det.regressor = ThresholdRegressor::constant(3.0);

    // Choose x so the score is exactly 5.0: s = 0.5*(x^2 + log 2pi).
    const double x = std::sqrt(10.0 - std::log(2.0 * 3.14159265358979323846));
    {
        DetectorState st;
        st.reset(det);
        ScoreTrace tr;
        CHECK(detect_step({x}, det, st, 1.0, tr)); // 5 > 4
        CHECK(tr.verdict);
        CHECK(tr.first_detection == 1);
    }
    {
        DetectorState st;
        st.reset(det);
        ScoreTrace tr;
        CHECK_FALSE(detect_step({x}, det, st, 3.0, tr)); // 5 < 8... 5 > 6 false
        CHECK_FALSE(tr.verdict);
        CHECK_FALSE(tr.first_detection.has_value());
    }
}

TEST_CASE("run_detection: latching, earliest index, trace shape") {
    const std::size_t D = 1;
    TrainedDetector det = degenerate_detector(D, {0.0}, std::log(std::exp(1.0) - 1.0));
    det.regressor = ThresholdRegressor::constant(0.0);

    Matrix seq(40, 1);
    for (std::size_t t = 0; t < 40; ++t) seq(t, 0) = 0.0;
    seq(36, 0) = 5.0; // only step 37 (1-based) crosses
    seq(38, 0) = 5.0;

    const double c = 2.0;
    ScoreTrace tr = run_detection(seq, det, c);
    REQUIRE(tr.records.size() == 40);
    CHECK(tr.verdict);
    CHECK(tr.first_detection == 37);

    // Quiet sequence: verdict false, no index.
    Matrix quiet(20, 1);
    ScoreTrace tq = run_detection(quiet, det, 2.0);
    CHECK_FALSE(tq.verdict);
    CHECK_FALSE(tq.first_detection.has_value());

    // Online/offline equivalence: drive detect_step externally.
    DetectorState st;
    st.reset(det);
    ScoreTrace manual;
    for (std::size_t t = 0; t < 40; ++t)
        detect_step({seq(t, 0)}, det, st, c, manual);
    REQUIRE(manual.records.size() == tr.records.size());
    for (std::size_t i = 0; i < manual.records.size(); ++i) {
        CHECK(manual.records[i].score == tr.records[i].score);
        CHECK(manual.records[i].decision == tr.records[i].decision);
    }
    CHECK(manual.first_detection == tr.first_detection);
}

TEST_CASE("decisions depend only on the sign of s - f_hat - c") {
    // Shifting both score and expectation by the same constant leaves
    // decisions unchanged: verified through the constant-regressor detector.
    const std::size_t D = 1;
    const double pre_unit = std::log(std::exp(1.0) - 1.0);
    TrainedDetector det = degenerate_detector(D, {0.0}, pre_unit);
    det.regressor = ThresholdRegressor::constant(1.0);

    Matrix seq(10, 1);
    for (std::size_t t = 0; t < 10; ++t) seq(t, 0) = 0.3 * static_cast<double>(t);
    ScoreTrace a = run_detection(seq, det, 0.7);

    TrainedDetector det2 = det;
    det2.regressor = ThresholdRegressor::constant(1.0 + 5.0);
    ScoreTrace b = run_detection(seq, det2, 0.7 - 5.0);
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].decision == b.records[i].decision);
}

TEST_CASE("monotone sensitivity: higher c flags a subset") {
    const std::size_t D = 1;
    TrainedDetector det = degenerate_detector(D, {0.0}, std::log(std::exp(1.0) - 1.0));
    det.regressor = ThresholdRegressor::constant(0.0);
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix seq(15, 1);
        for (auto& v : seq.a) v = rng.uniform(0.0, 2.5);
        bool fired_hi = run_detection(seq, det, 2.0).verdict;
        bool fired_lo = run_detection(seq, det, 0.5).verdict;
        if (fired_hi) CHECK(fired_lo);
    }
}

TEST_CASE("trace CSV export carries all columns") {
    const std::size_t D = 1;
    TrainedDetector det = degenerate_detector(D, {0.0}, std::log(std::exp(1.0) - 1.0));
    Matrix seq(3, 1);
    seq(0, 0) = 0.1;
    ScoreTrace tr = run_detection(seq, det, 1.0);
    std::ostringstream os;
    write_trace_csv(tr, os);
    const std::string text = os.str();
    CHECK(text.find("t,s,s_hat,threshold,decision,z_1,z_2") == 0);
    // One header plus three rows.
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    CHECK(lines == 4);
}

// ---------------------------------------------------------------------------
// threshold fitting over a trained-ish model
// ---------------------------------------------------------------------------

TEST_CASE("fit_threshold_regressor: constant scores give a flat map") {
    // Zero-weight model scores every step identically, so the fitted map must
    // be flat and the residuals near zero.
    LstmVaeConfig cfg;
    cfg.input_dim = 2;
    cfg.latent_dim = 2;
    cfg.enc_hidden = 4;
    cfg.dec_hidden = 4;
    auto params = LstmVaeParams::shaped_like(cfg);
    params.dec_mu.b = {0.5, 0.5};
    params.dec_var.b.assign(2, std::log(std::exp(1.0) - 1.0));

    std::vector<Matrix> val;
    for (int i = 0; i < 3; ++i) {
        Matrix m(12, 2);
        for (auto& v : m.a) v = 0.5;
        val.push_back(std::move(m));
    }
    auto fit = fit_threshold_regressor(val, cfg, params, cfg.prior_for(12),
                                       SvrConfig{});
    const double expect = 2.0 * 0.91893853320467274; // D/2 log 2pi at exact mean
    CHECK(std::fabs(fit.val_score_mean - expect) < 1e-9);
    CHECK(std::fabs(fit.regressor.predict({0.0, 0.0}) - expect) <= 0.1 + 1e-6);
    for (double r : fit.residuals) CHECK(std::fabs(r) <= 0.1 + 1e-6);
    CHECK(fit.per_execution_max.size() == 3);

    std::vector<Matrix> empty;
    CHECK_THROWS_AS(
        fit_threshold_regressor(empty, cfg, params, cfg.prior_for(12), SvrConfig{}),
        std::invalid_argument);
}
