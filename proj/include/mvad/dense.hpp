#pragma once

#include "mvad/rng.hpp"
#include "mvad/tensor.hpp"

namespace mvad {

enum class Activation { identity, tanh, softplus };

struct DenseParams {
    std::size_t in = 0, out = 0;
    Activation act = Activation::identity;
    Matrix W; // out x in
    Vector b; // out

    DenseParams() = default;
    DenseParams(std::size_t in_dim, std::size_t out_dim, Activation a);

    void init(Rng& rng);
    void zero();
    std::size_t param_count() const { return W.size() + b.size(); }
};

struct DenseCache {
    Vector x;   // input
    Vector pre; // W x + b
    Vector y;   // act(pre)
};

// y = act(W x + b)
void dense_forward(const Vector& x, const DenseParams& p, Vector& y,
                   DenseCache* cache = nullptr);

// Accumulates dW/db into `grads`; adds W^T d(pre) into dx when non-null.
void dense_backward(const DenseCache& cache, const DenseParams& p,
                    const Vector& dy, DenseParams& grads, Vector* dx);

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& s);

} // namespace mvad
