// mvad: train, run, and evaluate multimodal time-series anomaly detectors.
//
// Subcommands:
//   generate   write a synthetic multimodal benchmark dataset
//   train      fit a detector on the non-anomalous split and write a checkpoint
//   detect     score one execution online against a checkpoint
//   evaluate   leave-one-group-out ROC/AUC comparison across methods
//
// Exit codes: 0 success / no anomaly, 2 anomaly detected, 1 error.

#include "mvad/checkpoint.hpp"
#include "mvad/crossval.hpp"
#include "mvad/hash.hpp"
#include "mvad/run_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mvad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAnomaly = 2;

RunConfig load_config_with_overrides(const std::string& config_path,
                                     const std::vector<std::string>& sets) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + config_path);
        in >> j;
    }
    // --set section.key=value overrides, parsed as JSON scalars.
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects section.key=value, got: " + kv);
        const std::string path = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
            parsed = value; // bare strings
        }
        nlohmann::json* slot = &j;
        std::size_t start = 0;
        for (;;) {
            const auto dot = path.find('.', start);
            const std::string key = path.substr(start, dot - start);
            if (key.empty()) throw std::runtime_error("--set: empty key in " + kv);
            if (dot == std::string::npos) {
                (*slot)[key] = parsed;
                break;
            }
            slot = &(*slot)[key];
            start = dot + 1;
        }
    }
    return run_config_from_json(j);
}

std::vector<Matrix> preprocess_split(const Dataset& ds,
                                     const std::vector<std::string>& ids,
                                     std::size_t T, const NormStats* norm) {
    std::vector<Matrix> out;
    for (const auto& id : ids) {
        const Execution* e = ds.find(id);
        if (!e) throw std::runtime_error("manifest references unknown id: " + id);
        Matrix m = resample(e->signal, T);
        out.push_back(norm ? normalize_apply(m, *norm) : std::move(m));
    }
    return out;
}

void require_non_anomalous(const Dataset& ds, const std::vector<std::string>& ids,
                           const char* split) {
    for (const auto& id : ids) {
        const Execution* e = ds.find(id);
        if (e && e->anomalous)
            throw std::runtime_error(std::string("refusing to train: anomalous "
                                                 "execution '") +
                                     id + "' in the " + split + " split");
    }
}

int cmd_generate(const RunConfig& cfg, const std::string& out_dir, bool force) {
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force)
        throw std::runtime_error("output directory " + out_dir +
                                 " is not empty (use --force to overwrite)");
    cfg.benchmark.validate();
    Dataset ds = generate_benchmark(cfg.benchmark);
    save_dataset(ds, out_dir, &cfg.benchmark);
    save_run_config(cfg, (fs::path(out_dir) / "run_config.json").string());
    std::size_t anomalous = 0;
    for (const auto& e : ds.executions)
        if (e.anomalous) ++anomalous;
    std::printf("wrote %zu executions (%zu anomalous) across %zu groups to %s\n",
                ds.executions.size(), anomalous, cfg.benchmark.groups,
                out_dir.c_str());
    return kExitOk;
}

int cmd_train(const RunConfig& cfg_in, const std::string& dataset_dir,
              const std::string& out_dir, const std::string& method,
              const std::string& pretrain_dir) {
    RunConfig cfg = cfg_in;
    Dataset ds = load_dataset(dataset_dir);
    if (ds.train_ids.empty() || ds.val_ids.empty())
        throw std::runtime_error("dataset manifest lacks train/val splits");
    require_non_anomalous(ds, ds.train_ids, "train");
    require_non_anomalous(ds, ds.val_ids, "val");

    const Execution* probe = ds.find(ds.train_ids.front());
    const std::size_t D = probe->dims();
    const std::size_t T = cfg.resample_len;

    auto train_raw = preprocess_split(ds, ds.train_ids, T, nullptr);
    NormStats norm = normalize_fit(train_raw);
    std::vector<Matrix> train;
    for (auto& m : train_raw) train.push_back(normalize_apply(m, norm));
    auto val = preprocess_split(ds, ds.val_ids, T, &norm);

    fs::create_directories(out_dir);
    save_run_config(cfg, (fs::path(out_dir) / "run_config.json").string());
    const std::string ckpt = (fs::path(out_dir) / "checkpoint.json").string();

    if (method == "lstm_vae") {
        cfg.model.input_dim = D;
        cfg.model.seed = cfg.seed;

        const LstmVaeParams* warm = nullptr;
        LstmVaeParams warm_params;
        TrainHistory pre_history;
        if (!pretrain_dir.empty()) {
            Dataset pre = load_dataset(pretrain_dir);
            if (pre.train_ids.empty() || pre.val_ids.empty())
                throw std::runtime_error("pretrain dataset lacks train/val splits");
            require_non_anomalous(pre, pre.train_ids, "pretrain");
            auto pre_train_raw = preprocess_split(pre, pre.train_ids, T, nullptr);
            NormStats pre_norm = normalize_fit(pre_train_raw);
            std::vector<Matrix> pre_train;
            for (auto& m : pre_train_raw)
                pre_train.push_back(normalize_apply(m, pre_norm));
            auto pre_val = preprocess_split(pre, pre.val_ids, T, &pre_norm);
            LstmVaeConfig pre_cfg = cfg.model;
            pre_cfg.seed = Rng(cfg.seed).fork(77).next_u64();
            TrainResult pr = train_lstm_vae(pre_train, pre_val, pre_cfg);
            warm_params = std::move(pr.params);
            pre_history = pr.history;
            warm = &warm_params;
            std::printf("pre-training: %zu epochs, best val %.4f\n",
                        pre_history.epochs.size(), pre_history.best_val);
        }

        TrainResult tr = train_lstm_vae(train, val, cfg.model, warm);
        ThresholdFit fit =
            fit_threshold_regressor(val, cfg.model, tr.params, tr.prior, cfg.svr,
                                    cfg.svr_corrupt_inputs, cfg.seed);

        TrainedDetector det;
        det.config = cfg.model;
        det.params = std::move(tr.params);
        det.prior = std::move(tr.prior);
        det.norm = std::move(norm);
        det.resample_len = T;
        det.channels = probe->channels;
        det.regressor = std::move(fit.regressor);
        det.val_score_mean = fit.val_score_mean;
        det.c_default = fit.c_default;
        save_checkpoint(det, ckpt);

        std::ofstream hist((fs::path(out_dir) / "history.csv").string());
        hist << "epoch,train_loss,val_loss\n";
        for (std::size_t i = 0; i < tr.history.epochs.size(); ++i)
            hist << (i + 1) << "," << tr.history.epochs[i].train_loss << ","
                 << tr.history.epochs[i].val_loss << "\n";

        std::printf("trained lstm_vae: %zu epochs (best %zu, val %.4f), "
                    "c_default %.4f\n",
                    tr.history.epochs.size(), tr.history.best_epoch,
                    tr.history.best_val, det.c_default);
        std::printf("checkpoint: %s (hash %s)\n", ckpt.c_str(),
                    hash_hex(hash_file(ckpt)).c_str());
        return kExitOk;
    }

    if (!pretrain_dir.empty())
        throw std::runtime_error("two-phase training is implemented for "
                                 "lstm_vae only");
    auto det = make_baseline(method, cfg.baselines);
    det->fit(train, val, cfg.seed);
    Vector maxima = det->validation_exec_maxima();
    std::sort(maxima.begin(), maxima.end());
    const double default_op =
        maxima.empty() ? 0.0
                       : maxima[std::min(maxima.size() - 1,
                                         static_cast<std::size_t>(
                                             0.95 * static_cast<double>(
                                                        maxima.size())))];
    save_baseline_checkpoint(*det, probe->channels, norm, T,
                             cfg.baselines.window, default_op, ckpt);
    std::printf("trained %s; checkpoint: %s (hash %s)\n", method.c_str(),
                ckpt.c_str(), hash_hex(hash_file(ckpt)).c_str());
    return kExitOk;
}

int cmd_detect(const std::string& ckpt_path, const std::string& exec_path,
               double c, bool c_given, const std::string& trace_path) {
    const std::string kind = checkpoint_kind(ckpt_path);
    Execution e = load_execution(exec_path);

    ScoreTrace trace;
    if (kind == "lstm_vae") {
        TrainedDetector det = load_detector_checkpoint(ckpt_path);
        const double c_eff = c_given ? c : det.c_default;
        Matrix seq = preprocess_for(e, det);

        // Online loop: one row to stdout per step, as processed.
        DetectorState st;
        st.reset(det);
        std::printf("t,s,s_hat,threshold,decision");
        for (std::size_t k = 1; k <= det.config.latent_dim; ++k)
            std::printf(",z_%zu", k);
        std::printf("\n");
        for (std::size_t t = 0; t < seq.rows; ++t) {
            Vector x(seq[t], seq[t] + seq.cols);
            detect_step(x, det, st, c_eff, trace);
            const ScoreRecord& r = trace.records.back();
            std::printf("%zu,%.17g,%.17g,%.17g,%d", r.t, r.score, r.expected,
                        r.threshold, r.decision ? 1 : 0);
            for (double z : r.z) std::printf(",%.17g", z);
            std::printf("\n");
            std::fflush(stdout);
        }
    } else {
        BaselineCheckpoint ck = load_baseline_checkpoint(ckpt_path);
        if (e.channels != ck.channels)
            throw std::runtime_error("execution '" + e.id +
                                     "' channel layout does not match the checkpoint");
        Matrix seq = normalize_apply(resample(e.signal, ck.resample_len), ck.norm);
        const double c_eff = c_given ? c : 0.0;
        const double threshold = ck.default_op + c_eff;

        ScoreSeries series = ck.detector->score_execution(seq, e.id);
        std::printf("t,s,s_hat,threshold,decision\n");
        for (std::size_t i = 0; i < series.values.size(); ++i) {
            ScoreRecord rec;
            rec.t = series.step_index[i];
            rec.score = series.values[i];
            rec.expected = ck.default_op;
            rec.threshold = threshold;
            rec.decision = rec.score > threshold;
            if (rec.decision && !trace.first_detection)
                trace.first_detection = rec.t;
            trace.verdict = trace.verdict || rec.decision;
            trace.records.push_back(rec);
            std::printf("%zu,%.17g,%.17g,%.17g,%d\n", rec.t, rec.score,
                        rec.expected, rec.threshold, rec.decision ? 1 : 0);
            std::fflush(stdout);
        }
    }

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw std::runtime_error("cannot write trace: " + trace_path);
        write_trace_csv(trace, out);
    }

    if (trace.verdict) {
        std::printf("# verdict: anomaly first_detection=%zu\n",
                    *trace.first_detection);
        return kExitAnomaly;
    }
    std::printf("# verdict: no_anomaly\n");
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& dataset_dir,
                 const std::string& out_dir,
                 const std::vector<std::string>& methods,
                 const std::string& layout, bool ablation) {
    Dataset ds = load_dataset(dataset_dir);
    fs::create_directories(out_dir);
    save_run_config(cfg, (fs::path(out_dir) / "run_config.json").string());

    std::vector<bool> layouts;
    if (layout == "17ch")
        layouts = {false};
    else if (layout == "4feat")
        layouts = {true};
    else if (layout == "both")
        layouts = {false, true};
    else
        throw std::runtime_error("layout must be 17ch, 4feat, or both");

    auto emit = [&](const EvalReport& rep) {
        const std::string tag = rep.method + "_" + rep.layout;
        write_report_json(rep, (fs::path(out_dir) / ("report_" + tag + ".json")).string());
        write_roc_csv(rep, (fs::path(out_dir) / ("roc_" + tag + ".csv")).string());
        std::printf("%-16s %-6s pooled AUC %.4f  mean AUC %.4f  folds %zu\n",
                    rep.method.c_str(), rep.layout.c_str(), rep.pooled_auc,
                    rep.mean_auc, rep.fold_aucs.size());
    };

    for (bool features : layouts) {
        EvalConfig ecfg = cfg.eval;
        ecfg.features_layout = features;
        for (const auto& method : methods) {
            if (method == "lstm_vae") {
                LstmVaeMethodConfig mc;
                mc.model = cfg.model;
                mc.svr = cfg.svr;
                mc.svr_corrupt_inputs = cfg.svr_corrupt_inputs;
                if (ablation) {
                    AblationReports reps = threshold_ablation_cv(ds, mc, ecfg);
                    emit(reps.state_based);
                    emit(reps.fixed);
                } else {
                    auto factory = [&]() {
                        return std::make_unique<LstmVaeMethod>(mc);
                    };
                    emit(cross_validate(ds, factory, ecfg));
                }
            } else {
                auto factory = [&]() { return make_baseline(method, cfg.baselines); };
                emit(cross_validate(ds, factory, ecfg));
            }
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal time-series anomaly detection toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global --config/--set may follow the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config file")
        ->envname("MVAD_CONFIG");
    app.add_option("--set", overrides,
                   "config override, section.key=value (repeatable)");

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic benchmark dataset");
    std::string gen_out;
    bool gen_force = false;
    gen->add_option("--out", gen_out, "output dataset directory")->required();
    gen->add_flag("--force", gen_force, "overwrite a non-empty directory");

    // train
    auto* train = app.add_subcommand("train", "fit a detector and write a checkpoint");
    std::string train_dataset, train_out, train_method = "lstm_vae", pretrain_dir;
    train->add_option("--dataset", train_dataset, "dataset directory")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--method", train_method,
                      "lstm_vae | ae | osvm | encdecad | random");
    train->add_option("--pretrain", pretrain_dir,
                      "dataset directory for the two-phase pre-training pool");

    // detect
    auto* detect = app.add_subcommand("detect", "score one execution online");
    std::string det_ckpt, det_exec, det_trace;
    double det_c = 0.0;
    detect->add_option("--checkpoint", det_ckpt, "checkpoint file")->required();
    detect->add_option("--execution", det_exec, "execution CSV file")->required();
    auto* c_opt = detect->add_option("-c,--sensitivity", det_c,
                                     "sensitivity constant added to the "
                                     "expected score (default: calibrated)");
    detect->add_option("--trace", det_trace, "write the score trace CSV here");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "cross-validated ROC/AUC comparison");
    std::string eval_dataset, eval_out, eval_layout = "17ch";
    std::vector<std::string> eval_methods = {"lstm_vae", "encdecad", "ae", "osvm",
                                             "random"};
    bool no_ablation = false;
    eval->add_option("--dataset", eval_dataset, "dataset directory")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--methods", eval_methods, "methods to evaluate")
        ->delimiter(',');
    eval->add_option("--layout", eval_layout, "17ch | 4feat | both");
    eval->add_flag("--no-ablation", no_ablation,
                   "skip the fixed-threshold ablation for lstm_vae");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config_with_overrides(config_path, overrides);
        if (gen->parsed()) return cmd_generate(cfg, gen_out, gen_force);
        if (train->parsed())
            return cmd_train(cfg, train_dataset, train_out, train_method,
                             pretrain_dir);
        if (detect->parsed())
            return cmd_detect(det_ckpt, det_exec, det_c, c_opt->count() > 0,
                              det_trace);
        if (eval->parsed())
            return cmd_evaluate(cfg, eval_dataset, eval_out, eval_methods,
                                eval_layout, !no_ablation);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
