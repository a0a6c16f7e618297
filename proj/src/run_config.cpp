#include "mvad/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace mvad {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " +
                                        where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& slot) {
    if (j.contains(key)) slot = j.at(key).get<T>();
}

} // namespace

void RunConfig::resolve() {
    eval.resample_len = resample_len;
    eval.seed = seed;
    model.seed = seed;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    reject_unknown(j,
                   {"seed", "resample_len", "svr_corrupt_inputs", "benchmark",
                    "model", "svr", "baselines", "eval"},
                   "top level");
    maybe(j, "seed", cfg.seed);
    maybe(j, "resample_len", cfg.resample_len);
    maybe(j, "svr_corrupt_inputs", cfg.svr_corrupt_inputs);

    cfg.benchmark.seed = cfg.seed;
    if (j.contains("benchmark")) {
        const json& b = j.at("benchmark");
        reject_unknown(b,
                       {"groups", "executions_per_group", "anomaly_fraction",
                        "t_raw_min", "t_raw_max", "rate_hz", "layout",
                        "observation_noise", "group_scale", "anomaly_magnitude",
                        "seed"},
                       "benchmark");
        maybe(b, "groups", cfg.benchmark.groups);
        maybe(b, "executions_per_group", cfg.benchmark.executions_per_group);
        maybe(b, "anomaly_fraction", cfg.benchmark.anomaly_fraction);
        maybe(b, "t_raw_min", cfg.benchmark.t_raw_min);
        maybe(b, "t_raw_max", cfg.benchmark.t_raw_max);
        maybe(b, "rate_hz", cfg.benchmark.rate_hz);
        maybe(b, "layout", cfg.benchmark.layout);
        maybe(b, "observation_noise", cfg.benchmark.observation_noise);
        maybe(b, "group_scale", cfg.benchmark.group_scale);
        maybe(b, "anomaly_magnitude", cfg.benchmark.anomaly_magnitude);
        maybe(b, "seed", cfg.benchmark.seed);
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m,
                       {"latent_dim", "enc_hidden", "dec_hidden", "sigma_noise",
                        "learning_rate", "max_epochs", "patience", "batch_size",
                        "grad_clip", "improve_tol", "prior_start", "prior_end"},
                       "model");
        maybe(m, "latent_dim", cfg.model.latent_dim);
        maybe(m, "enc_hidden", cfg.model.enc_hidden);
        maybe(m, "dec_hidden", cfg.model.dec_hidden);
        maybe(m, "sigma_noise", cfg.model.sigma_noise);
        maybe(m, "learning_rate", cfg.model.learning_rate);
        maybe(m, "max_epochs", cfg.model.max_epochs);
        maybe(m, "patience", cfg.model.patience);
        maybe(m, "batch_size", cfg.model.batch_size);
        maybe(m, "grad_clip", cfg.model.grad_clip);
        maybe(m, "improve_tol", cfg.model.improve_tol);
        maybe(m, "prior_start", cfg.model.prior_start);
        maybe(m, "prior_end", cfg.model.prior_end);
    }

    if (j.contains("svr")) {
        const json& s = j.at("svr");
        reject_unknown(s, {"C", "epsilon", "gamma", "tol", "max_iter",
                           "max_train_points"},
                       "svr");
        maybe(s, "C", cfg.svr.C);
        maybe(s, "epsilon", cfg.svr.epsilon);
        maybe(s, "gamma", cfg.svr.gamma);
        maybe(s, "tol", cfg.svr.tol);
        maybe(s, "max_iter", cfg.svr.max_iter);
        maybe(s, "max_train_points", cfg.svr.max_train_points);
    }

    if (j.contains("baselines")) {
        const json& b = j.at("baselines");
        reject_unknown(b,
                       {"window", "ae_hidden", "ae_bottleneck", "ae_lr",
                        "ae_max_epochs", "ae_patience", "ae_batch", "ed_hidden",
                        "ed_lr", "ed_max_epochs", "ed_patience", "ed_batch",
                        "ed_grad_clip", "osvm_nu", "osvm_gamma", "osvm_tol",
                        "osvm_max_iter", "max_train_windows",
                        "osvm_max_train_windows"},
                       "baselines");
        maybe(b, "window", cfg.baselines.window);
        maybe(b, "ae_hidden", cfg.baselines.ae_hidden);
        maybe(b, "ae_bottleneck", cfg.baselines.ae_bottleneck);
        maybe(b, "ae_lr", cfg.baselines.ae_lr);
        maybe(b, "ae_max_epochs", cfg.baselines.ae_max_epochs);
        maybe(b, "ae_patience", cfg.baselines.ae_patience);
        maybe(b, "ae_batch", cfg.baselines.ae_batch);
        maybe(b, "ed_hidden", cfg.baselines.ed_hidden);
        maybe(b, "ed_lr", cfg.baselines.ed_lr);
        maybe(b, "ed_max_epochs", cfg.baselines.ed_max_epochs);
        maybe(b, "ed_patience", cfg.baselines.ed_patience);
        maybe(b, "ed_batch", cfg.baselines.ed_batch);
        maybe(b, "ed_grad_clip", cfg.baselines.ed_grad_clip);
        maybe(b, "osvm_nu", cfg.baselines.osvm_nu);
        maybe(b, "osvm_gamma", cfg.baselines.osvm_gamma);
        maybe(b, "osvm_tol", cfg.baselines.osvm_tol);
        maybe(b, "osvm_max_iter", cfg.baselines.osvm_max_iter);
        maybe(b, "max_train_windows", cfg.baselines.max_train_windows);
        maybe(b, "osvm_max_train_windows", cfg.baselines.osvm_max_train_windows);
    }

    if (j.contains("eval")) {
        const json& e = j.at("eval");
        reject_unknown(e, {"sweep_count", "jobs"}, "eval");
        maybe(e, "sweep_count", cfg.eval.sweep_count);
        maybe(e, "jobs", cfg.eval.jobs);
    }

    cfg.resolve();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["resample_len"] = cfg.resample_len;
    j["svr_corrupt_inputs"] = cfg.svr_corrupt_inputs;
    j["benchmark"] = {{"groups", cfg.benchmark.groups},
                      {"executions_per_group", cfg.benchmark.executions_per_group},
                      {"anomaly_fraction", cfg.benchmark.anomaly_fraction},
                      {"t_raw_min", cfg.benchmark.t_raw_min},
                      {"t_raw_max", cfg.benchmark.t_raw_max},
                      {"rate_hz", cfg.benchmark.rate_hz},
                      {"layout", cfg.benchmark.layout},
                      {"observation_noise", cfg.benchmark.observation_noise},
                      {"group_scale", cfg.benchmark.group_scale},
                      {"anomaly_magnitude", cfg.benchmark.anomaly_magnitude},
                      {"seed", cfg.benchmark.seed}};
    j["model"] = {{"latent_dim", cfg.model.latent_dim},
                  {"enc_hidden", cfg.model.enc_hidden},
                  {"dec_hidden", cfg.model.dec_hidden},
                  {"sigma_noise", cfg.model.sigma_noise},
                  {"learning_rate", cfg.model.learning_rate},
                  {"max_epochs", cfg.model.max_epochs},
                  {"patience", cfg.model.patience},
                  {"batch_size", cfg.model.batch_size},
                  {"grad_clip", cfg.model.grad_clip},
                  {"improve_tol", cfg.model.improve_tol},
                  {"prior_start", cfg.model.prior_start},
                  {"prior_end", cfg.model.prior_end}};
    j["svr"] = {{"C", cfg.svr.C},
                {"epsilon", cfg.svr.epsilon},
                {"gamma", cfg.svr.gamma},
                {"tol", cfg.svr.tol},
                {"max_iter", cfg.svr.max_iter},
                {"max_train_points", cfg.svr.max_train_points}};
    j["baselines"] = {{"window", cfg.baselines.window},
                      {"ae_hidden", cfg.baselines.ae_hidden},
                      {"ae_bottleneck", cfg.baselines.ae_bottleneck},
                      {"ae_lr", cfg.baselines.ae_lr},
                      {"ae_max_epochs", cfg.baselines.ae_max_epochs},
                      {"ae_patience", cfg.baselines.ae_patience},
                      {"ae_batch", cfg.baselines.ae_batch},
                      {"ed_hidden", cfg.baselines.ed_hidden},
                      {"ed_lr", cfg.baselines.ed_lr},
                      {"ed_max_epochs", cfg.baselines.ed_max_epochs},
                      {"ed_patience", cfg.baselines.ed_patience},
                      {"ed_batch", cfg.baselines.ed_batch},
                      {"ed_grad_clip", cfg.baselines.ed_grad_clip},
                      {"osvm_nu", cfg.baselines.osvm_nu},
                      {"osvm_gamma", cfg.baselines.osvm_gamma},
                      {"osvm_tol", cfg.baselines.osvm_tol},
                      {"osvm_max_iter", cfg.baselines.osvm_max_iter},
                      {"max_train_windows", cfg.baselines.max_train_windows},
                      {"osvm_max_train_windows",
                       cfg.baselines.osvm_max_train_windows}};
    j["eval"] = {{"sweep_count", cfg.eval.sweep_count}, {"jobs", cfg.eval.jobs}};
    return j;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config snapshot: " + path);
    out << run_config_to_json(cfg).dump(2) << "\n";
}

} // namespace mvad
