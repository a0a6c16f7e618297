#include "mvad/crossval.hpp"

#include "mvad/hash.hpp"
#include "mvad/preprocess.hpp"
#include "mvad/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

using nlohmann::json;

namespace mvad {

namespace {

struct FoldData {
    std::string group;
    std::vector<Matrix> train, val;
    std::vector<Matrix> test;
    std::vector<const Execution*> test_meta;
    std::vector<long> test_onsets; // resampled; -1 for non-anomalous
    bool skipped = false;
    std::string warning;
};

Matrix preprocess_one(const Execution& e, const EvalConfig& cfg,
                      const NormStats* norm) {
    const Execution* src = &e;
    Execution reduced;
    if (cfg.features_layout && is_17_channel(e)) {
        reduced = extract_features(e);
        src = &reduced;
    }
    Matrix m = resample(src->signal, cfg.resample_len);
    return norm ? normalize_apply(m, *norm) : m;
}

FoldData build_fold(const Dataset& ds, const std::string& group,
                    const EvalConfig& cfg) {
    FoldData fold;
    fold.group = group;

    bool any_anomalous = false;
    for (const auto& e : ds.executions)
        if (e.group == group && e.anomalous) any_anomalous = true;
    if (!any_anomalous) {
        fold.skipped = true;
        fold.warning = "fold " + group + " skipped: no anomalous executions";
        return fold;
    }

    // Raw resampled matrices first; normalization is fitted on train only.
    std::vector<Matrix> train_raw, val_raw;
    std::size_t nonanom_idx = 0;
    for (const auto& e : ds.executions) {
        if (e.group == group || e.anomalous) continue;
        Matrix m = preprocess_one(e, cfg, nullptr);
        if (nonanom_idx % 4 == 3)
            val_raw.push_back(std::move(m));
        else
            train_raw.push_back(std::move(m));
        ++nonanom_idx;
    }
    if (train_raw.empty() || val_raw.empty()) {
        fold.skipped = true;
        fold.warning = "fold " + group + " skipped: not enough non-anomalous data";
        return fold;
    }

    NormStats norm = normalize_fit(train_raw);
    for (auto& m : train_raw) fold.train.push_back(normalize_apply(m, norm));
    for (auto& m : val_raw) fold.val.push_back(normalize_apply(m, norm));

    for (const auto& e : ds.executions) {
        if (e.group != group) continue;
        Matrix raw = preprocess_one(e, cfg, nullptr);
        fold.test.push_back(normalize_apply(raw, norm));
        fold.test_meta.push_back(&e);
        fold.test_onsets.push_back(
            e.anomalous ? static_cast<long>(resample_index(
                              static_cast<std::size_t>(e.onset), e.length(),
                              cfg.resample_len))
                        : -1);
    }
    return fold;
}

struct FoldScores {
    std::string group;
    std::vector<ScoreSeries> series; // one per test execution
    std::vector<const Execution*> meta;
    std::vector<long> onsets;
    Vector val_values;
    Vector val_maxima;
    std::uint64_t state_hash = 0;
    bool skipped = false;
    std::string warning;
};

double quantile95(Vector v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t i = std::min(
        v.size() - 1, static_cast<std::size_t>(0.95 * static_cast<double>(v.size())));
    return v[i];
}

EvalReport assemble(const std::string& method_name, const EvalConfig& cfg,
                    std::vector<FoldScores>&& folds, bool features) {
    EvalReport rep;
    rep.method = method_name;
    rep.layout = features ? "4feat" : "17ch";

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& f : folds) {
        if (f.skipped) {
            rep.warnings.push_back(f.warning);
            continue;
        }
        for (double v : f.val_values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    rep.sweep_values = sweep_grid(lo, hi, cfg.sweep_count, 1.0);

    Vector pooled_stats;
    std::vector<int> pooled_labels;
    for (auto& f : folds) {
        if (f.skipped) continue;
        rep.fold_groups.push_back(f.group);
        rep.fold_state_hashes.push_back(f.state_hash);
        const double c_def = quantile95(f.val_maxima);
        rep.fold_default_ops.push_back(c_def);

        Vector stats;
        std::vector<int> labels;
        for (std::size_t i = 0; i < f.series.size(); ++i) {
            const Execution& e = *f.meta[i];
            ExecOutcome oc;
            oc.id = e.id;
            oc.group = e.group;
            oc.type = e.anomaly_type;
            oc.label = e.anomalous ? 1 : 0;
            oc.statistic = f.series[i].maximum();
            oc.onset = f.onsets[i];
            oc.first_detection = f.series[i].first_above(c_def);
            stats.push_back(oc.statistic);
            labels.push_back(oc.label);
            pooled_stats.push_back(oc.statistic);
            pooled_labels.push_back(oc.label);
            rep.outcomes.push_back(std::move(oc));
        }
        rep.fold_aucs.push_back(auc(roc_curve(rep.sweep_values, stats, labels)));
    }
    if (pooled_stats.empty())
        throw std::runtime_error("cross_validate: every fold was skipped");

    rep.pooled_roc = roc_curve(rep.sweep_values, pooled_stats, pooled_labels);
    rep.pooled_auc = auc(rep.pooled_roc);
    double s = 0.0;
    for (double a : rep.fold_aucs) s += a;
    rep.mean_auc = s / static_cast<double>(rep.fold_aucs.size());
    return rep;
}

// Runs one worker per fold, bounded by cfg.jobs threads.
template <typename Fn>
void parallel_folds(std::size_t n, std::size_t jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold) {
    return Rng(master).fork(1000 + fold).next_u64();
}

} // namespace

EvalReport cross_validate(const Dataset& ds, const MethodFactory& factory,
                          const EvalConfig& cfg) {
    const auto groups = ds.group_names();
    if (groups.size() < 2)
        throw std::invalid_argument("cross_validate: need >= 2 groups");

    std::vector<FoldScores> results(groups.size());
    std::string method_name;
    {
        auto probe = factory();
        method_name = probe->name();
    }

    parallel_folds(groups.size(), cfg.jobs, [&](std::size_t gi) {
        FoldData fold = build_fold(ds, groups[gi], cfg);
        FoldScores& out = results[gi];
        out.group = fold.group;
        out.skipped = fold.skipped;
        out.warning = fold.warning;
        if (fold.skipped) {
            std::fprintf(stderr, "[cross_validate] warning: %s\n",
                         fold.warning.c_str());
            return;
        }
        auto method = factory();
        method->fit(fold.train, fold.val, fold_seed(cfg.seed, gi));
        out.val_values = method->validation_values();
        out.val_maxima = method->validation_exec_maxima();
        out.state_hash = method->state_hash();
        out.meta = fold.test_meta;
        out.onsets = fold.test_onsets;
        for (std::size_t i = 0; i < fold.test.size(); ++i)
            out.series.push_back(
                method->score_execution(fold.test[i], fold.test_meta[i]->id));
    });

    return assemble(method_name, cfg, std::move(results), cfg.features_layout);
}

AblationReports threshold_ablation_cv(const Dataset& ds,
                                      const LstmVaeMethodConfig& method_cfg,
                                      const EvalConfig& cfg) {
    const auto groups = ds.group_names();
    if (groups.size() < 2)
        throw std::invalid_argument("threshold_ablation_cv: need >= 2 groups");

    std::vector<FoldScores> state_results(groups.size());
    std::vector<FoldScores> fixed_results(groups.size());

    parallel_folds(groups.size(), cfg.jobs, [&](std::size_t gi) {
        FoldData fold = build_fold(ds, groups[gi], cfg);
        FoldScores& st = state_results[gi];
        FoldScores& fx = fixed_results[gi];
        st.group = fx.group = fold.group;
        st.skipped = fx.skipped = fold.skipped;
        st.warning = fx.warning = fold.warning;
        if (fold.skipped) {
            std::fprintf(stderr, "[threshold_ablation] warning: %s\n",
                         fold.warning.c_str());
            return;
        }

        LstmVaeMethodConfig mc = method_cfg;
        mc.fixed_threshold = false;
        LstmVaeMethod method(mc);
        method.fit(fold.train, fold.val, fold_seed(cfg.seed, gi));

        st.val_values = method.validation_values();
        st.val_maxima = method.validation_exec_maxima();
        st.state_hash = method.state_hash();
        st.meta = fx.meta = fold.test_meta;
        st.onsets = fx.onsets = fold.test_onsets;

        const ThresholdRegressor fixed_reg =
            ThresholdRegressor::constant(method.detector().val_score_mean);

        // Fixed-threshold validation residuals for its own sweep grid.
        for (const auto& seq : fold.val) {
            ScoreSeries s = method.score_with(seq, fixed_reg);
            double worst = -1e300;
            for (double v : s.values) {
                fx.val_values.push_back(v);
                worst = std::max(worst, v);
            }
            fx.val_maxima.push_back(worst);
        }
        fx.state_hash = st.state_hash;

        for (std::size_t i = 0; i < fold.test.size(); ++i) {
            st.series.push_back(
                method.score_execution(fold.test[i], fold.test_meta[i]->id));
            ScoreSeries fixed_series =
                method.score_with(fold.test[i], fixed_reg);
            fx.series.push_back(std::move(fixed_series));
        }
    });

    AblationReports out;
    out.state_based = assemble("lstm_vae", cfg, std::move(state_results),
                               cfg.features_layout);
    out.fixed = assemble("lstm_vae_fixed", cfg, std::move(fixed_results),
                         cfg.features_layout);
    return out;
}

DelayStats detection_delays(const EvalReport& r, const std::string& type_filter) {
    DelayStats st;
    Vector delays;
    for (const auto& oc : r.outcomes) {
        if (!oc.label) continue;
        if (!type_filter.empty() && oc.type != type_filter) continue;
        ++st.total_anomalous;
        if (oc.first_detection < 0) continue;
        ++st.detected;
        if (oc.first_detection >= oc.onset) ++st.detected_at_or_after_onset;
        delays.push_back(static_cast<double>(oc.first_detection - oc.onset));
    }
    if (!delays.empty()) {
        std::sort(delays.begin(), delays.end());
        const std::size_t n = delays.size();
        st.median_delay = (n % 2 == 1) ? delays[n / 2]
                                       : 0.5 * (delays[n / 2 - 1] + delays[n / 2]);
    }
    return st;
}

void write_report_json(const EvalReport& r, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["method"] = r.method;
    j["layout"] = r.layout;
    j["fold_groups"] = r.fold_groups;
    j["fold_aucs"] = r.fold_aucs;
    j["pooled_auc"] = r.pooled_auc;
    j["mean_auc"] = r.mean_auc;
    j["sweep_values"] = r.sweep_values;
    j["fold_default_ops"] = r.fold_default_ops;
    j["warnings"] = r.warnings;
    json hashes = json::array();
    for (auto h : r.fold_state_hashes) hashes.push_back(hash_hex(h));
    j["fold_state_hashes"] = hashes;

    json roc = json::array();
    for (const auto& p : r.pooled_roc) {
        json pt;
        pt["value"] = std::isfinite(p.value) ? json(p.value) : json();
        pt["tpr"] = p.tpr;
        pt["fpr"] = p.fpr;
        roc.push_back(pt);
    }
    j["pooled_roc"] = roc;

    json outcomes = json::array();
    for (const auto& oc : r.outcomes) {
        outcomes.push_back({{"id", oc.id},
                            {"group", oc.group},
                            {"type", oc.type},
                            {"label", oc.label},
                            {"statistic", oc.statistic},
                            {"onset", oc.onset},
                            {"first_detection", oc.first_detection}});
    }
    j["outcomes"] = outcomes;

    const DelayStats all = detection_delays(r);
    const DelayStats bump = detection_delays(r, "force_bump");
    j["delays"] = {{"total_anomalous", all.total_anomalous},
                   {"detected", all.detected},
                   {"median_delay_steps", all.median_delay},
                   {"force_bump_detected", bump.detected},
                   {"force_bump_median_delay_steps", bump.median_delay}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

void write_roc_csv(const EvalReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ROC CSV: " + path);
    out << "value,fpr,tpr\n";
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& p : r.pooled_roc)
        out << fmt(p.value) << "," << fmt(p.fpr) << "," << fmt(p.tpr) << "\n";
}

} // namespace mvad
