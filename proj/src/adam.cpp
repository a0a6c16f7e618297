#include "mvad/adam.hpp"

#include "mvad/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mvad {

Adam::Adam(std::size_t total, AdamConfig cfg)
    : cfg_(cfg), m_(total, 0.0), v_(total, 0.0) {}

void Adam::step(const std::vector<TensorRef>& params,
                const std::vector<TensorRef>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("Adam::step: tensor list mismatch");
    ++k_;
    const auto& k = kernels::active();
    std::size_t off = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size != grads[t].size)
            throw std::invalid_argument("Adam::step: tensor shape mismatch");
        if (off + params[t].size > m_.size())
            throw std::invalid_argument("Adam::step: more parameters than state");
        k.adam_step(params[t].data, grads[t].data, m_.data() + off,
                    v_.data() + off, params[t].size, cfg_.lr, cfg_.beta1,
                    cfg_.beta2, cfg_.eps, k_);
        off += params[t].size;
    }
    if (off != m_.size())
        throw std::invalid_argument("Adam::step: fewer parameters than state");
}

double clip_global_norm(const std::vector<TensorRef>& grads, double max_norm) {
    const auto& k = kernels::active();
    double ss = 0.0;
    for (const auto& g : grads) ss += k.sumsq(g.data, g.size);
    const double norm = std::sqrt(ss);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (const auto& g : grads) k.scale(s, g.data, g.size);
    }
    return norm;
}

} // namespace mvad
