#pragma once

#include "mvad/rng.hpp"
#include "mvad/tensor.hpp"

namespace mvad {

// Single LSTM cell. The stacked 4H dimension is ordered
// [input, forget, candidate, output].
struct LstmCellParams {
    std::size_t input_size = 0;  // I
    std::size_t hidden_size = 0; // H
    Matrix W; // 4H x I
    Matrix U; // 4H x H
    Vector b; // 4H

    LstmCellParams() = default;
    LstmCellParams(std::size_t input, std::size_t hidden);

    // Uniform +-1/sqrt(fan_in) weights; biases zero except forget gate = 1.
    void init(Rng& rng);

    void zero();
    std::size_t param_count() const { return W.size() + U.size() + b.size(); }
};

struct LstmState {
    Vector h, c;
    void reset(std::size_t hidden) {
        h.assign(hidden, 0.0);
        c.assign(hidden, 0.0);
    }
};

// Everything the backward pass needs from one forward step.
struct LstmStepCache {
    Vector x, h_prev, c_prev;
    Vector gi, gf, gg, go; // post-nonlinearity gate values
    Vector c, tanh_c;
};

// Advances (h, c) one step:
//   c = sigmoid(f) .* c_prev + sigmoid(i) .* tanh(g),  h = sigmoid(o) .* tanh(c)
// with gate pre-activations W x + U h_prev + b.
void lstm_cell_step(const Vector& x, LstmState& state, const LstmCellParams& p,
                    LstmStepCache* cache = nullptr);

// Reverse-mode step. dh/dc are the loss gradients w.r.t. this step's h and c
// outputs; parameter gradients accumulate into `grads` (same shapes as the
// params); dx is overwritten, dh_prev/dc_prev are overwritten for the caller
// to carry to step t-1.
void lstm_cell_backward(const LstmStepCache& cache, const LstmCellParams& p,
                        const Vector& dh, const Vector& dc,
                        LstmCellParams& grads, Vector& dx, Vector& dh_prev,
                        Vector& dc_prev);

} // namespace mvad
