#include "mvad/lstm_cell.hpp"

#include "mvad/activations.hpp"
#include "mvad/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mvad {

LstmCellParams::LstmCellParams(std::size_t input, std::size_t hidden)
    : input_size(input), hidden_size(hidden),
      W(4 * hidden, input), U(4 * hidden, hidden), b(4 * hidden, 0.0) {}

void LstmCellParams::init(Rng& rng) {
    const double wi = 1.0 / std::sqrt(static_cast<double>(input_size));
    const double wh = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    for (auto& v : W.a) v = rng.uniform(-wi, wi);
    for (auto& v : U.a) v = rng.uniform(-wh, wh);
    b.assign(4 * hidden_size, 0.0);
    // Forget-gate bias 1 keeps early cell states alive over long unrolls.
    for (std::size_t j = hidden_size; j < 2 * hidden_size; ++j) b[j] = 1.0;
}

void LstmCellParams::zero() {
    W.fill(0.0);
    U.fill(0.0);
    b.assign(b.size(), 0.0);
}

void lstm_cell_step(const Vector& x, LstmState& state, const LstmCellParams& p,
                    LstmStepCache* cache) {
    const std::size_t H = p.hidden_size;
    require_size(x, p.input_size, "lstm_cell_step: x");
    require_size(state.h, H, "lstm_cell_step: h");
    require_size(state.c, H, "lstm_cell_step: c");

    const auto& k = kernels::active();

    // Gate pre-activations: a = W x + U h_prev + b.
    Vector a = p.b;
    k.matvec_acc(p.W.data(), x.data(), a.data(), 4 * H, p.input_size);
    k.matvec_acc(p.U.data(), state.h.data(), a.data(), 4 * H, H);

    Vector gi(H), gf(H), gg(H), go(H), c_new(H), tc(H), h_new(H);
    for (std::size_t j = 0; j < H; ++j) {
        gi[j] = sigmoid(a[j]);
        gf[j] = sigmoid(a[H + j]);
        gg[j] = std::tanh(a[2 * H + j]);
        go[j] = sigmoid(a[3 * H + j]);
        c_new[j] = gf[j] * state.c[j] + gi[j] * gg[j];
        tc[j] = std::tanh(c_new[j]);
        h_new[j] = go[j] * tc[j];
    }

    if (cache) {
        cache->x = x;
        cache->h_prev = state.h;
        cache->c_prev = state.c;
        cache->gi = std::move(gi);
        cache->gf = std::move(gf);
        cache->gg = std::move(gg);
        cache->go = std::move(go);
        cache->c = c_new;
        cache->tanh_c = std::move(tc);
    }
    state.h = std::move(h_new);
    state.c = std::move(c_new);
}

void lstm_cell_backward(const LstmStepCache& cache, const LstmCellParams& p,
                        const Vector& dh, const Vector& dc,
                        LstmCellParams& grads, Vector& dx, Vector& dh_prev,
                        Vector& dc_prev) {
    const std::size_t H = p.hidden_size;
    const std::size_t I = p.input_size;
    require_size(dh, H, "lstm_cell_backward: dh");
    require_size(dc, H, "lstm_cell_backward: dc");

    // da holds gradients w.r.t. gate pre-activations, stacked like b.
    Vector da(4 * H);
    dc_prev.assign(H, 0.0);
    for (std::size_t j = 0; j < H; ++j) {
        const double d_o = dh[j] * cache.tanh_c[j];
        const double dcj = dc[j] + dh[j] * cache.go[j] * dtanh_from_y(cache.tanh_c[j]);
        const double d_i = dcj * cache.gg[j];
        const double d_f = dcj * cache.c_prev[j];
        const double d_g = dcj * cache.gi[j];
        da[j] = d_i * dsigmoid_from_y(cache.gi[j]);
        da[H + j] = d_f * dsigmoid_from_y(cache.gf[j]);
        da[2 * H + j] = d_g * dtanh_from_y(cache.gg[j]);
        da[3 * H + j] = d_o * dsigmoid_from_y(cache.go[j]);
        dc_prev[j] = dcj * cache.gf[j];
    }

    const auto& k = kernels::active();
    k.ger_acc(grads.W.data(), da.data(), cache.x.data(), 4 * H, I);
    k.ger_acc(grads.U.data(), da.data(), cache.h_prev.data(), 4 * H, H);
    k.axpy(1.0, da.data(), grads.b.data(), 4 * H);

    dx.assign(I, 0.0);
    k.matvec_t_acc(p.W.data(), da.data(), dx.data(), 4 * H, I);
    dh_prev.assign(H, 0.0);
    k.matvec_t_acc(p.U.data(), da.data(), dh_prev.data(), 4 * H, H);
}

} // namespace mvad
