#pragma once

#include "mvad/tensor.hpp"

#include <cstddef>
#include <vector>

namespace mvad {

struct TensorRef {
    double* data = nullptr;
    std::size_t size = 0;
};

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a fixed list of parameter tensors. Moment
// buffers are zero-initialized and laid out flat in tensor order.
class Adam {
public:
    Adam(std::size_t total_size, AdamConfig cfg = {});

    // One update; `params` and `grads` must cover the construction size in a
    // stable order. The step counter increments before bias correction.
    void step(const std::vector<TensorRef>& params,
              const std::vector<TensorRef>& grads);

    long step_count() const { return k_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    Vector m_, v_;
    long k_ = 0;
};

// Scales all gradients in place so the global L2 norm is at most `max_norm`;
// returns the pre-clip norm.
double clip_global_norm(const std::vector<TensorRef>& grads, double max_norm);

inline std::size_t total_size(const std::vector<TensorRef>& refs) {
    std::size_t n = 0;
    for (const auto& r : refs) n += r.size;
    return n;
}

} // namespace mvad
