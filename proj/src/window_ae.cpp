#include "mvad/baselines.hpp"

#include "mvad/adam.hpp"
#include "mvad/hash.hpp"
#include "mvad/kernels.hpp"
#include "mvad/lstm_vae.hpp" // EarlyStopper
#include "mvad/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvad {

namespace {

std::vector<Vector> collect_training_windows(const std::vector<Matrix>& seqs,
                                             std::size_t L, std::size_t cap) {
    auto windows = make_windows(seqs, L);
    std::vector<Vector> out;
    if (windows.size() > cap) {
        const double stride =
            static_cast<double>(windows.size()) / static_cast<double>(cap);
        for (std::size_t i = 0; i < cap; ++i)
            out.push_back(std::move(windows[static_cast<std::size_t>(i * stride)].values));
    } else {
        for (auto& w : windows) out.push_back(std::move(w.values));
    }
    return out;
}

} // namespace

void WindowAeDetector::fit(const std::vector<Matrix>& train,
                           const std::vector<Matrix>& val, std::uint64_t seed) {
    if (train.empty() || val.empty())
        throw std::invalid_argument("ae: empty dataset");
    const std::size_t LD = train.front().cols * cfg_.window;

    layers_.clear();
    layers_.emplace_back(LD, cfg_.ae_hidden, Activation::tanh);
    layers_.emplace_back(cfg_.ae_hidden, cfg_.ae_bottleneck, Activation::tanh);
    layers_.emplace_back(cfg_.ae_bottleneck, cfg_.ae_hidden, Activation::tanh);
    layers_.emplace_back(cfg_.ae_hidden, LD, Activation::identity);

    Rng root(seed);
    Rng init_rng = root.fork(0);
    Rng shuffle_rng = root.fork(1);
    for (auto& l : layers_) l.init(init_rng);

    auto train_w = collect_training_windows(train, cfg_.window, cfg_.max_train_windows);
    auto val_w = collect_training_windows(val, cfg_.window, cfg_.max_train_windows);
    if (train_w.empty() || val_w.empty())
        throw std::invalid_argument("ae: sequences shorter than the window");

    std::vector<DenseParams> grads = layers_;
    for (auto& g : grads) g.zero();
    auto refs = [](std::vector<DenseParams>& ls) {
        std::vector<TensorRef> r;
        for (auto& l : ls) {
            r.push_back({l.W.data(), l.W.size()});
            r.push_back({l.b.data(), l.b.size()});
        }
        return r;
    };
    auto param_refs = refs(layers_);
    auto grad_refs = refs(grads);
    Adam opt(total_size(param_refs), AdamConfig{cfg_.ae_lr, 0.9, 0.999, 1e-8});

    auto forward_cached = [&](const Vector& x, std::vector<DenseCache>& caches) {
        caches.resize(layers_.size());
        Vector h = x;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Vector next;
            dense_forward(h, layers_[l], next, &caches[l]);
            h = std::move(next);
        }
        return h;
    };

    // One window's squared-error loss and gradient accumulation.
    auto backward_window = [&](const Vector& x) {
        std::vector<DenseCache> caches;
        Vector xhat = forward_cached(x, caches);
        double loss = 0.0;
        Vector dy(LD);
        for (std::size_t i = 0; i < LD; ++i) {
            const double d = xhat[i] - x[i];
            loss += d * d;
            dy[i] = 2.0 * d;
        }
        for (std::size_t l = layers_.size(); l-- > 0;) {
            Vector dx(layers_[l].in, 0.0);
            dense_backward(caches[l], layers_[l], dy, grads[l], l > 0 ? &dx : nullptr);
            dy = std::move(dx);
        }
        return loss;
    };

    auto val_loss = [&]() {
        double s = 0.0;
        for (const auto& w : val_w) s += window_score(w);
        return s / static_cast<double>(val_w.size());
    };

    EarlyStopper stopper(cfg_.ae_patience, 1e-6);
    std::vector<DenseParams> best = layers_;
    std::vector<std::size_t> order(train_w.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg_.ae_max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg_.ae_batch) {
            const std::size_t stop = std::min(order.size(), start + cfg_.ae_batch);
            for (auto& g : grads) g.zero();
            for (std::size_t i = start; i < stop; ++i) backward_window(train_w[order[i]]);
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grad_refs) kernels::active().scale(inv, g.data, g.size);
            opt.step(param_refs, grad_refs);
        }
        const bool stop = stopper.observe(val_loss());
        if (stopper.best_epoch() == epoch) best = layers_;
        if (stop) break;
    }
    layers_ = std::move(best);

    val_values_.clear();
    val_maxima_.clear();
    for (const auto& seq : val) {
        double worst = -1e300;
        for (const auto& w : make_windows(seq, cfg_.window)) {
            const double s = window_score(w.values);
            val_values_.push_back(s);
            worst = std::max(worst, s);
        }
        if (worst > -1e300) val_maxima_.push_back(worst);
    }
}

Vector WindowAeDetector::reconstruct(const Vector& window) const {
    if (layers_.empty()) throw std::logic_error("ae: not fitted");
    Vector h = window;
    for (const auto& l : layers_) {
        Vector next;
        dense_forward(h, l, next);
        h = std::move(next);
    }
    return h;
}

double WindowAeDetector::window_score(const Vector& window) const {
    const Vector xhat = reconstruct(window);
    double s = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double d = xhat[i] - window[i];
        s += d * d;
    }
    return s;
}

ScoreSeries WindowAeDetector::score_execution(const Matrix& seq,
                                              const std::string&) const {
    ScoreSeries s;
    for (const auto& w : make_windows(seq, cfg_.window)) {
        s.values.push_back(window_score(w.values));
        s.step_index.push_back(w.end_index);
    }
    return s;
}

std::uint64_t WindowAeDetector::state_hash() const {
    Fnv1a h;
    for (const auto& l : layers_) {
        h.update(l.W.a);
        h.update(l.b);
    }
    return h.digest();
}

} // namespace mvad
