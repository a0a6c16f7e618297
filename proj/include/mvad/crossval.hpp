#pragma once

#include "mvad/benchmark.hpp"
#include "mvad/lstmvae_method.hpp"
#include "mvad/method.hpp"
#include "mvad/roc.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mvad {

struct EvalConfig {
    std::size_t resample_len = 140;
    std::size_t sweep_count = 41;
    std::size_t jobs = 0; // 0 = hardware concurrency
    std::uint64_t seed = 1;
    bool features_layout = false; // 17ch -> 4 features before fitting
};

struct ExecOutcome {
    std::string id, group, type;
    int label = 0;
    double statistic = 0.0;
    long onset = -1;           // resampled steps; -1 when non-anomalous
    long first_detection = -1; // at the fold's default operating point; -1 none
};

struct EvalReport {
    std::string method;
    std::string layout; // "17ch" or "4feat"
    std::vector<std::string> fold_groups;
    Vector fold_aucs;
    double pooled_auc = 0.0;
    double mean_auc = 0.0;
    std::vector<RocPoint> pooled_roc;
    Vector sweep_values;
    Vector fold_default_ops;
    std::vector<std::uint64_t> fold_state_hashes;
    std::vector<ExecOutcome> outcomes;
    std::vector<std::string> warnings;
};

struct DelayStats {
    std::size_t total_anomalous = 0;
    std::size_t detected = 0;
    std::size_t detected_at_or_after_onset = 0;
    double median_delay = 0.0; // steps, over detected executions
};

DelayStats detection_delays(const EvalReport& r, const std::string& type_filter = "");

using MethodFactory = std::function<std::unique_ptr<DetectorMethod>()>;

// Leave-one-group-out cross-validation. Per fold: the other groups'
// non-anomalous executions are split train/val, preprocessing statistics are
// fitted on train only, the method is fitted and the held-out group (both
// classes) is scored. Pooled ROC/AUC evaluates all folds' decisions on a
// shared sweep grid; per-fold AUCs use the same grid.
EvalReport cross_validate(const Dataset& ds, const MethodFactory& factory,
                          const EvalConfig& cfg);

// Trains the LSTM-VAE once per fold and evaluates the same model under the
// state-based threshold and the fixed (mean expected score) threshold.
struct AblationReports {
    EvalReport state_based;
    EvalReport fixed;
};
AblationReports threshold_ablation_cv(const Dataset& ds,
                                      const LstmVaeMethodConfig& method_cfg,
                                      const EvalConfig& cfg);

void write_report_json(const EvalReport& r, const std::string& path);
void write_roc_csv(const EvalReport& r, const std::string& path);

} // namespace mvad
