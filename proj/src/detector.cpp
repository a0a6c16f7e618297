#include "mvad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mvad {

double anomaly_score(const Vector& x_t, const TrainedDetector& det,
                     DetectorState& st, Vector* z_out) {
    if (!st.enc.live || !st.dec.live)
        throw std::logic_error("anomaly_score: detector state not reset");
    require_size(x_t, det.config.input_dim, "anomaly_score: x_t");

    const DiagGaussian q = encode_step(x_t, det.params, st.enc);
    const DiagGaussian r = decode_step(q.mean, det.params, st.dec);
    ++st.t;
    if (z_out) *z_out = q.mean;
    return gaussian_nll(x_t, r);
}

bool detect_step(const Vector& x_t, const TrainedDetector& det,
                 DetectorState& st, double c, ScoreTrace& trace) {
    ScoreRecord rec;
    rec.z.reserve(det.config.latent_dim);
    rec.score = anomaly_score(x_t, det, st, &rec.z);
    rec.t = st.t;
    rec.expected = det.regressor.predict(rec.z);
    rec.threshold = rec.expected + c;
    rec.decision = rec.score > rec.threshold;
    if (rec.decision && !st.latched) {
        st.latched = true;
        trace.first_detection = rec.t;
    }
    trace.verdict = trace.verdict || rec.decision;
    trace.records.push_back(std::move(rec));
    return trace.records.back().decision;
}

ScoreTrace run_detection(const Matrix& x_seq, const TrainedDetector& det,
                         double c) {
    if (x_seq.rows == 0)
        throw std::invalid_argument("run_detection: empty sequence");
    DetectorState st;
    st.reset(det);
    ScoreTrace trace;
    trace.records.reserve(x_seq.rows);
    for (std::size_t t = 0; t < x_seq.rows; ++t) {
        Vector x(x_seq[t], x_seq[t] + x_seq.cols);
        detect_step(x, det, st, c, trace);
    }
    return trace;
}

Matrix preprocess_for(const Execution& e, const TrainedDetector& det) {
    if (!det.channels.empty() && e.channels != det.channels)
        throw std::invalid_argument(
            "execution '" + e.id + "' channel layout does not match the checkpoint");
    if (e.signal.cols != det.norm.dims())
        throw std::invalid_argument("execution '" + e.id + "' channel count " +
                                    std::to_string(e.signal.cols) +
                                    " != checkpoint " +
                                    std::to_string(det.norm.dims()));
    return normalize_apply(resample(e.signal, det.resample_len), det.norm);
}

ScoreTrace run_detection_raw(const Execution& e, const TrainedDetector& det,
                             double c) {
    return run_detection(preprocess_for(e, det), det, c);
}

double max_residual(const ScoreTrace& trace) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : trace.records) m = std::max(m, r.score - r.expected);
    return m;
}

void write_trace_csv(const ScoreTrace& trace, std::ostream& out) {
    const std::size_t K = trace.records.empty() ? 0 : trace.records[0].z.size();
    out << "t,s,s_hat,threshold,decision";
    for (std::size_t k = 1; k <= K; ++k) out << ",z_" << k;
    out << "\n";
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : trace.records) {
        out << r.t << "," << fmt(r.score) << "," << fmt(r.expected) << ","
            << fmt(r.threshold) << "," << (r.decision ? 1 : 0);
        for (double z : r.z) out << "," << fmt(z);
        out << "\n";
    }
}

ThresholdFit fit_threshold_regressor(const std::vector<Matrix>& val_set,
                                     const LstmVaeConfig& cfg,
                                     const LstmVaeParams& params,
                                     const PriorSchedule& prior, SvrConfig svr,
                                     bool corrupt_inputs,
                                     std::uint64_t noise_seed) {
    if (val_set.empty())
        throw std::invalid_argument("fit_threshold_regressor: empty validation set");
    (void)prior;

    std::vector<Vector> zs;
    Vector scores;
    std::vector<std::pair<std::size_t, std::size_t>> spans; // per sequence

    Rng noise(noise_seed);
    for (const auto& seq : val_set) {
        RecurrentState enc, dec;
        enc.reset(cfg.enc_hidden);
        dec.reset(cfg.dec_hidden);
        const std::size_t begin = scores.size();
        for (std::size_t t = 0; t < seq.rows; ++t) {
            Vector x(seq[t], seq[t] + seq.cols);
            const Vector enc_in =
                corrupt_inputs ? corrupt(x, cfg.sigma_noise, noise) : x;
            const DiagGaussian q = encode_step(enc_in, params, enc);
            const DiagGaussian r = decode_step(q.mean, params, dec);
            zs.push_back(q.mean);
            scores.push_back(gaussian_nll(x, r));
        }
        spans.emplace_back(begin, scores.size());
    }

    ThresholdFit fit;
    if (svr.gamma <= 0.0) svr.gamma = 1.0 / static_cast<double>(cfg.latent_dim);
    fit.regressor = ThresholdRegressor::fit_svr(zs, scores, svr);

    double mean = 0.0;
    for (double s : scores) mean += s;
    fit.val_score_mean = mean / static_cast<double>(scores.size());

    fit.residuals.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        fit.residuals[i] = scores[i] - fit.regressor.predict(zs[i]);

    for (const auto& [b, e] : spans) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = b; i < e; ++i) m = std::max(m, fit.residuals[i]);
        fit.per_execution_max.push_back(m);
    }
    Vector sorted = fit.per_execution_max;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t q95 =
        std::min(sorted.size() - 1,
                 static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size())));
    fit.c_default = sorted[q95];
    return fit;
}

} // namespace mvad
