#include "mvad/dense.hpp"

#include "mvad/activations.hpp"
#include "mvad/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mvad {

DenseParams::DenseParams(std::size_t in_dim, std::size_t out_dim, Activation a)
    : in(in_dim), out(out_dim), act(a), W(out_dim, in_dim), b(out_dim, 0.0) {}

void DenseParams::init(Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : W.a) v = rng.uniform(-s, s);
    b.assign(out, 0.0);
}

void DenseParams::zero() {
    W.fill(0.0);
    b.assign(b.size(), 0.0);
}

void dense_forward(const Vector& x, const DenseParams& p, Vector& y,
                   DenseCache* cache) {
    require_size(x, p.in, "dense_forward: x");
    Vector pre = p.b;
    kernels::active().matvec_acc(p.W.data(), x.data(), pre.data(), p.out, p.in);

    y.resize(p.out);
    switch (p.act) {
        case Activation::identity:
            y = pre;
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < p.out; ++i) y[i] = std::tanh(pre[i]);
            break;
        case Activation::softplus:
            for (std::size_t i = 0; i < p.out; ++i) y[i] = softplus(pre[i]);
            break;
    }
    if (cache) {
        cache->x = x;
        cache->pre = std::move(pre);
        cache->y = y;
    }
}

void dense_backward(const DenseCache& cache, const DenseParams& p,
                    const Vector& dy, DenseParams& grads, Vector* dx) {
    require_size(dy, p.out, "dense_backward: dy");

    Vector da(p.out);
    switch (p.act) {
        case Activation::identity:
            da = dy;
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < p.out; ++i)
                da[i] = dy[i] * dtanh_from_y(cache.y[i]);
            break;
        case Activation::softplus:
            // d softplus(u) / du = sigmoid(u)
            for (std::size_t i = 0; i < p.out; ++i)
                da[i] = dy[i] * sigmoid(cache.pre[i]);
            break;
    }

    const auto& k = kernels::active();
    k.ger_acc(grads.W.data(), da.data(), cache.x.data(), p.out, p.in);
    k.axpy(1.0, da.data(), grads.b.data(), p.out);
    if (dx) {
        if (dx->size() != p.in)
            throw std::invalid_argument("dense_backward: dx size mismatch");
        k.matvec_t_acc(p.W.data(), da.data(), dx->data(), p.out, p.in);
    }
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::softplus: return "softplus";
    }
    return "identity";
}

Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "tanh") return Activation::tanh;
    if (s == "softplus") return Activation::softplus;
    throw std::invalid_argument("unknown activation: " + s);
}

} // namespace mvad
