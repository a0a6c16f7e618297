#pragma once

#include "mvad/baselines.hpp"
#include "mvad/detector.hpp"

#include <memory>
#include <string>

namespace mvad {

// Versioned JSON checkpoint container shared by every method. Weight arrays
// are base64 blobs of raw little-endian doubles, so files round-trip
// bit-exactly and identical fits produce identical bytes.

void save_checkpoint(const TrainedDetector& det, const std::string& path);
TrainedDetector load_detector_checkpoint(const std::string& path);

// "lstm_vae" or a baseline method name.
std::string checkpoint_kind(const std::string& path);

struct BaselineCheckpoint {
    std::string method;
    std::unique_ptr<DetectorMethod> detector;
    std::vector<std::string> channels;
    NormStats norm;
    std::size_t resample_len = 0;
    std::size_t window = 3;
    double default_op = 0.0; // q95 of validation per-execution maxima
};

void save_baseline_checkpoint(const DetectorMethod& method,
                              const std::vector<std::string>& channels,
                              const NormStats& norm, std::size_t resample_len,
                              std::size_t window, double default_op,
                              const std::string& path);
BaselineCheckpoint load_baseline_checkpoint(const std::string& path);

} // namespace mvad
