#pragma once

#include "mvad/execution.hpp"
#include "mvad/lstm_vae.hpp"
#include "mvad/preprocess.hpp"
#include "mvad/svr.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mvad {

// Fully fitted detector: model weights, preprocessing statistics, prior
// schedule, threshold regressor, calibration constants. Immutable once built;
// concurrent detection sessions each own a DetectorState.
struct TrainedDetector {
    LstmVaeConfig config;
    LstmVaeParams params;
    PriorSchedule prior;
    NormStats norm;
    std::size_t resample_len = 140;
    std::vector<std::string> channels;
    ThresholdRegressor regressor;
    double val_score_mean = 0.0; // fixed-threshold stand-in
    double c_default = 0.0;      // 95th pct of validation per-execution max residual
};

struct DetectorState {
    RecurrentState enc, dec;
    std::size_t t = 0; // steps consumed
    bool latched = false;

    void reset(const TrainedDetector& det) {
        enc.reset(det.config.enc_hidden);
        dec.reset(det.config.dec_hidden);
        t = 0;
        latched = false;
    }
};

struct ScoreRecord {
    std::size_t t = 0; // 1-based step
    Vector z;
    double score = 0.0;    // s_t
    double expected = 0.0; // f_hat(z_t)
    double threshold = 0.0;
    bool decision = false; // step-level crossing
};

struct ScoreTrace {
    std::vector<ScoreRecord> records;
    bool verdict = false;
    std::optional<std::size_t> first_detection; // 1-based
};

// Eq.-style anomaly score: encode with the posterior mean (no corruption, no
// sampling), decode, and return the NLL of x_t under the reconstruction.
// Advances both recurrent states.
double anomaly_score(const Vector& x_t, const TrainedDetector& det,
                     DetectorState& st, Vector* z_out = nullptr);

// One online step at sensitivity c. Appends a record, latches the verdict on
// the first crossing, and returns this step's decision.
bool detect_step(const Vector& x_t, const TrainedDetector& det,
                 DetectorState& st, double c, ScoreTrace& trace);

// Scores a whole preprocessed sequence (state reset at t=1).
ScoreTrace run_detection(const Matrix& x_seq, const TrainedDetector& det,
                         double c);

// Resamples/normalizes a raw execution with the detector's statistics first.
Matrix preprocess_for(const Execution& e, const TrainedDetector& det);
ScoreTrace run_detection_raw(const Execution& e, const TrainedDetector& det,
                             double c);

// Per-execution detection statistic max_t (s_t - f_hat(z_t)): the execution
// fires at sensitivity c iff the statistic exceeds c.
double max_residual(const ScoreTrace& trace);

// CSV export: t, s, s_hat, threshold, decision, z_1..z_K.
void write_trace_csv(const ScoreTrace& trace, std::ostream& out);

struct ThresholdFit {
    ThresholdRegressor regressor;
    double val_score_mean = 0.0;
    double c_default = 0.0;
    Vector residuals;               // all validation step residuals s - f_hat
    Vector per_execution_max;       // per-sequence max residual
};

// Runs the model over the (non-anomalous, preprocessed) validation set,
// collects (z_t, s_t) pairs, and fits the RBF epsilon-SVR expected-score map.
// Optionally corrupts the encoder inputs while collecting pairs.
ThresholdFit fit_threshold_regressor(const std::vector<Matrix>& val_set,
                                     const LstmVaeConfig& cfg,
                                     const LstmVaeParams& params,
                                     const PriorSchedule& prior, SvrConfig svr,
                                     bool corrupt_inputs = false,
                                     std::uint64_t noise_seed = 0);

} // namespace mvad
