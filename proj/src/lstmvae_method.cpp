#include "mvad/lstmvae_method.hpp"

#include "mvad/hash.hpp"

#include <algorithm>
#include <cmath>

namespace mvad {

void LstmVaeMethod::fit(const std::vector<Matrix>& train,
                        const std::vector<Matrix>& val, std::uint64_t seed) {
    LstmVaeConfig model_cfg = cfg_.model;
    model_cfg.seed = seed;

    TrainResult tr = train_lstm_vae(train, val, model_cfg);
    history_ = tr.history;

    det_.config = model_cfg;
    det_.params = std::move(tr.params);
    det_.prior = std::move(tr.prior);
    det_.resample_len = train.front().rows;

    ThresholdFit fit = fit_threshold_regressor(val, det_.config, det_.params,
                                               det_.prior, cfg_.svr,
                                               cfg_.svr_corrupt_inputs, seed);
    det_.val_score_mean = fit.val_score_mean;
    det_.c_default = fit.c_default;
    det_.regressor = cfg_.fixed_threshold
                         ? ThresholdRegressor::constant(fit.val_score_mean)
                         : std::move(fit.regressor);

    // Validation residuals against the active regressor define the sweep
    // range; recompute for the fixed variant.
    if (cfg_.fixed_threshold) {
        val_values_.clear();
        val_maxima_.clear();
        for (const auto& seq : val) {
            ScoreTrace t = run_detection(seq, det_, 0.0);
            double worst = -1e300;
            for (const auto& r : t.records) {
                val_values_.push_back(r.score - r.expected);
                worst = std::max(worst, r.score - r.expected);
            }
            val_maxima_.push_back(worst);
        }
        Vector sorted = val_maxima_;
        std::sort(sorted.begin(), sorted.end());
        det_.c_default = sorted[std::min(
            sorted.size() - 1,
            static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size())))];
    } else {
        val_values_ = std::move(fit.residuals);
        val_maxima_ = std::move(fit.per_execution_max);
    }
}

ScoreSeries LstmVaeMethod::score_execution(const Matrix& seq,
                                           const std::string&) const {
    return score_with(seq, det_.regressor);
}

ScoreSeries LstmVaeMethod::score_with(const Matrix& seq,
                                      const ThresholdRegressor& reg) const {
    TrainedDetector alt = det_; // cheap relative to scoring; params shared copy
    alt.regressor = reg;
    ScoreTrace t = run_detection(seq, alt, 0.0);
    ScoreSeries s;
    s.values.reserve(t.records.size());
    s.step_index.reserve(t.records.size());
    for (const auto& r : t.records) {
        s.values.push_back(r.score - r.expected);
        s.step_index.push_back(r.t);
    }
    return s;
}

std::uint64_t detector_state_hash(const TrainedDetector& det) {
    Fnv1a h;
    det.params.visit([&](const char* name, const std::vector<double>& v) {
        h.update(name, std::char_traits<char>::length(name));
        h.update(v);
    });
    h.update(det.norm.min);
    h.update(det.norm.max);
    for (const auto& sv : det.regressor.support()) h.update(sv);
    h.update(det.regressor.coefficients());
    const double b = det.regressor.bias();
    h.update(&b, sizeof(b));
    h.update(&det.val_score_mean, sizeof(det.val_score_mean));
    h.update(&det.c_default, sizeof(det.c_default));
    return h.digest();
}

std::uint64_t LstmVaeMethod::state_hash() const { return detector_state_hash(det_); }

} // namespace mvad
