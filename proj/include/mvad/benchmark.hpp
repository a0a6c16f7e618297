#pragma once

#include "mvad/execution.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvad {

// Synthetic anomaly families. Each is a signal-level analog of a class of
// physical faults: impulse, drift, burst, sensor dropout, path deviation,
// and full freeze.
inline const std::vector<std::string>& anomaly_families() {
    static const std::vector<std::string> f = {
        "force_bump", "drift", "audio_burst",
        "dropout",    "trajectory_deviation", "freeze"};
    return f;
}

struct BenchmarkConfig {
    std::size_t groups = 8;
    std::size_t executions_per_group = 40;
    double anomaly_fraction = 0.45;
    std::size_t t_raw_min = 120; // source lengths drawn uniformly in range
    std::size_t t_raw_max = 200;
    double rate_hz = 20.0;
    std::string layout = "17ch"; // "17ch" or "4feat"
    double observation_noise = 0.02;
    double group_scale = 1.0;   // spread of group-to-group style differences
    double anomaly_magnitude = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Dataset {
    std::vector<Execution> executions;
    // Suggested split of the non-anomalous executions for standalone training.
    std::vector<std::string> train_ids, val_ids;

    const Execution* find(const std::string& id) const;
    std::vector<std::string> group_names() const;
};

// Deterministic synthetic benchmark mirroring the multimodal structure:
// bursty nonnegative sound energy, contact-bump forces, force-correlated
// torques, approach/retreat position trajectories, per-group style offsets,
// and one injected anomaly family per anomalous execution with its onset
// recorded.
Dataset generate_benchmark(const BenchmarkConfig& cfg);

// Directory of execution CSVs plus manifest.json listing files and splits.
void save_dataset(const Dataset& ds, const std::string& dir,
                  const BenchmarkConfig* provenance = nullptr);
Dataset load_dataset(const std::string& dir);

} // namespace mvad
