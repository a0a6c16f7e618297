#pragma once

#include "mvad/baselines.hpp"
#include "mvad/benchmark.hpp"
#include "mvad/crossval.hpp"
#include "mvad/lstm_vae.hpp"
#include "mvad/svr.hpp"

#include <json.hpp>

#include <string>

namespace mvad {

// Every knob of every module plus the master seed. A config file may set any
// subset; unknown keys are rejected. The full resolved config is serialized
// into each output directory.
struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t resample_len = 140;
    bool svr_corrupt_inputs = false;
    BenchmarkConfig benchmark;
    LstmVaeConfig model;
    SvrConfig svr;
    BaselineConfig baselines;
    EvalConfig eval;

    // Mirrors the shared fields into the sub-configs.
    void resolve();
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);
void save_run_config(const RunConfig& cfg, const std::string& path);

} // namespace mvad
