#pragma once

#include "mvad/detector.hpp"
#include "mvad/method.hpp"

namespace mvad {

struct LstmVaeMethodConfig {
    LstmVaeConfig model;
    SvrConfig svr;
    bool fixed_threshold = false; // constant expected score instead of the SVR
    bool svr_corrupt_inputs = false;
};

// The LSTM-VAE detector behind the shared method interface: residuals
// s_t - f_hat(z_t) are the per-step scores and c is the sensitivity knob.
class LstmVaeMethod final : public DetectorMethod {
public:
    explicit LstmVaeMethod(LstmVaeMethodConfig cfg) : cfg_(std::move(cfg)) {}

    std::string name() const override {
        return cfg_.fixed_threshold ? "lstm_vae_fixed" : "lstm_vae";
    }
    void fit(const std::vector<Matrix>& train, const std::vector<Matrix>& val,
             std::uint64_t seed) override;
    ScoreSeries score_execution(const Matrix& seq,
                                const std::string& id) const override;
    const Vector& validation_values() const override { return val_values_; }
    const Vector& validation_exec_maxima() const override { return val_maxima_; }
    std::uint64_t state_hash() const override;

    const TrainedDetector& detector() const { return det_; }
    TrainedDetector& detector() { return det_; }
    const TrainHistory& history() const { return history_; }

    // Re-derives the per-fold score series against an alternative regressor
    // (the fixed-threshold ablation shares one trained model).
    ScoreSeries score_with(const Matrix& seq, const ThresholdRegressor& reg) const;

private:
    LstmVaeMethodConfig cfg_;
    TrainedDetector det_;
    TrainHistory history_;
    Vector val_values_, val_maxima_;
};

std::uint64_t detector_state_hash(const TrainedDetector& det);

} // namespace mvad
