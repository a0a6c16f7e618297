#pragma once

#include "mvad/execution.hpp"
#include "mvad/tensor.hpp"

#include <vector>

namespace mvad {

// Per-channel linear interpolation onto T uniformly spaced points spanning
// the source time axis. Endpoints are preserved.
Matrix resample(const Matrix& src, std::size_t T);

// Source-rate step index mapped onto the resampled axis.
std::size_t resample_index(std::size_t src_index, std::size_t src_len,
                           std::size_t T);

// Per-channel min/max from the training split; applied identically to every
// split. Out-of-range test values are left unclipped.
struct NormStats {
    Vector min, max;
    std::size_t dims() const { return min.size(); }
};

NormStats normalize_fit(const std::vector<Matrix>& train);
Matrix normalize_apply(const Matrix& m, const NormStats& s);

// 17-channel layout to the 4 hand-engineered features: sound energy and
// first joint torque pass through, accumulated force integrates ||f||_2 dt,
// and the last channel is the spoon-mouth distance.
Execution extract_features(const Execution& e);

} // namespace mvad
