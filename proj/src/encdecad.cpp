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

struct EdGrads {
    LstmCellParams enc, dec;
    DenseParams head;
    void zero() {
        enc.zero();
        dec.zero();
        head.zero();
    }
};

std::vector<TensorRef> ed_refs(LstmCellParams& enc, LstmCellParams& dec,
                               DenseParams& head) {
    return {
        {enc.W.data(), enc.W.size()}, {enc.U.data(), enc.U.size()},
        {enc.b.data(), enc.b.size()}, {dec.W.data(), dec.W.size()},
        {dec.U.data(), dec.U.size()}, {dec.b.data(), dec.b.size()},
        {head.W.data(), head.W.size()}, {head.b.data(), head.b.size()},
    };
}

} // namespace

void EncDecAdDetector::fit(const std::vector<Matrix>& train,
                           const std::vector<Matrix>& val, std::uint64_t seed) {
    if (train.empty() || val.empty())
        throw std::invalid_argument("encdecad: empty dataset");
    const std::size_t D = train.front().cols;
    const std::size_t L = cfg_.window;
    const std::size_t H = cfg_.ed_hidden;

    enc_ = LstmCellParams(D, H);
    dec_ = LstmCellParams(D, H);
    head_ = DenseParams(H, D, Activation::identity);
    Rng root(seed);
    Rng init_rng = root.fork(0);
    Rng shuffle_rng = root.fork(1);
    enc_.init(init_rng);
    dec_.init(init_rng);
    head_.init(init_rng);

    auto windows = make_windows(train, L);
    std::vector<Vector> train_w;
    if (windows.size() > cfg_.max_train_windows) {
        const double stride = static_cast<double>(windows.size()) /
                              static_cast<double>(cfg_.max_train_windows);
        for (std::size_t i = 0; i < cfg_.max_train_windows; ++i)
            train_w.push_back(std::move(windows[static_cast<std::size_t>(i * stride)].values));
    } else {
        for (auto& w : windows) train_w.push_back(std::move(w.values));
    }
    if (train_w.empty())
        throw std::invalid_argument("encdecad: sequences shorter than the window");

    EdGrads grads{LstmCellParams(D, H), LstmCellParams(D, H),
                  DenseParams(H, D, Activation::identity)};
    auto param_refs = ed_refs(enc_, dec_, head_);
    auto grad_refs = ed_refs(grads.enc, grads.dec, grads.head);
    Adam opt(total_size(param_refs), AdamConfig{cfg_.ed_lr, 0.9, 0.999, 1e-8});

    auto backward_window = [&](const Vector& w) {
        return encdecad_window_loss_grad(w, L, enc_, dec_, head_, grads.enc,
                                         grads.dec, grads.head);
    };

    // Validation uses inference-mode errors, matching the score path.
    auto val_loss = [&]() {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& seq : val)
            for (const auto& w : make_windows(seq, L)) {
                const Vector e = error_vector(w.values);
                s += kernels::active().sumsq(e.data(), e.size());
                ++n;
            }
        return s / static_cast<double>(n > 0 ? n : 1);
    };

    EarlyStopper stopper(cfg_.ed_patience, 1e-6);
    LstmCellParams best_enc = enc_, best_dec = dec_;
    DenseParams best_head = head_;
    std::vector<std::size_t> order(train_w.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg_.ed_max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg_.ed_batch) {
            const std::size_t stop = std::min(order.size(), start + cfg_.ed_batch);
            grads.zero();
            for (std::size_t i = start; i < stop; ++i) backward_window(train_w[order[i]]);
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grad_refs) kernels::active().scale(inv, g.data, g.size);
            clip_global_norm(grad_refs, cfg_.ed_grad_clip);
            opt.step(param_refs, grad_refs);
        }
        const bool stop = stopper.observe(val_loss());
        if (stopper.best_epoch() == epoch) {
            best_enc = enc_;
            best_dec = dec_;
            best_head = head_;
        }
        if (stop) break;
    }
    enc_ = std::move(best_enc);
    dec_ = std::move(best_dec);
    head_ = std::move(best_head);

    // Error-vector Gaussian from validation reconstructions.
    std::vector<Vector> errors;
    for (const auto& seq : val)
        for (const auto& w : make_windows(seq, L))
            errors.push_back(error_vector(w.values));
    if (errors.empty()) throw std::invalid_argument("encdecad: no validation windows");
    error_model_ = ErrorModel::fit(errors);

    val_values_.clear();
    val_maxima_.clear();
    for (const auto& seq : val) {
        double worst = -1e300;
        for (const auto& w : make_windows(seq, L)) {
            const double s = error_model_.mahalanobis_sq(error_vector(w.values));
            val_values_.push_back(s);
            worst = std::max(worst, s);
        }
        if (worst > -1e300) val_maxima_.push_back(worst);
    }
}

Vector EncDecAdDetector::error_vector(const Vector& w) const {
    if (enc_.hidden_size == 0) throw std::logic_error("encdecad: not fitted");
    const std::size_t H = enc_.hidden_size;
    const std::size_t L = cfg_.window;
    const std::size_t D = enc_.input_size;
    if (w.size() != L * D)
        throw std::invalid_argument("encdecad: window size mismatch");

    LstmState st;
    st.reset(H);
    for (std::size_t j = 0; j < L; ++j) {
        Vector x(w.begin() + static_cast<long>(j * D),
                 w.begin() + static_cast<long>((j + 1) * D));
        lstm_cell_step(x, st, enc_);
    }
    LstmState dst = st;
    Vector errors(L * D);
    Vector prev; // previous reconstruction feeds back at inference
    for (std::size_t j = 0; j < L; ++j) {
        const Vector u = (j == 0) ? Vector(D, 0.0) : prev;
        lstm_cell_step(u, dst, dec_);
        Vector xhat;
        dense_forward(dst.h, head_, xhat);
        for (std::size_t d = 0; d < D; ++d)
            errors[j * D + d] = w[(L - 1 - j) * D + d] - xhat[d];
        prev = std::move(xhat);
    }
    return errors;
}

ScoreSeries EncDecAdDetector::score_execution(const Matrix& seq,
                                              const std::string&) const {
    ScoreSeries s;
    for (const auto& w : make_windows(seq, cfg_.window)) {
        s.values.push_back(error_model_.mahalanobis_sq(error_vector(w.values)));
        s.step_index.push_back(w.end_index);
    }
    return s;
}

std::uint64_t EncDecAdDetector::state_hash() const {
    Fnv1a h;
    h.update(enc_.W.a);
    h.update(enc_.U.a);
    h.update(enc_.b);
    h.update(dec_.W.a);
    h.update(dec_.U.a);
    h.update(dec_.b);
    h.update(head_.W.a);
    h.update(head_.b);
    h.update(error_model_.mean);
    h.update(error_model_.var);
    return h.digest();
}


double encdecad_window_loss_grad(const Vector& w, std::size_t L,
                                 const LstmCellParams& enc,
                                 const LstmCellParams& dec,
                                 const DenseParams& head, LstmCellParams& genc,
                                 LstmCellParams& gdec, DenseParams& ghead) {
    const std::size_t D = enc.input_size;
    const std::size_t H = enc.hidden_size;
    if (w.size() != L * D)
        throw std::invalid_argument("encdecad: window size mismatch");

    // Reversed targets.
    std::vector<Vector> target(L, Vector(D));
    for (std::size_t j = 0; j < L; ++j)
        for (std::size_t d = 0; d < D; ++d) target[j][d] = w[(L - 1 - j) * D + d];

    std::vector<LstmStepCache> enc_cache(L), dec_cache(L);
    std::vector<DenseCache> head_cache(L);
    LstmState st;
    st.reset(H);
    for (std::size_t j = 0; j < L; ++j) {
        Vector x(w.begin() + static_cast<long>(j * D),
                 w.begin() + static_cast<long>((j + 1) * D));
        lstm_cell_step(x, st, enc, &enc_cache[j]);
    }
    LstmState dst = st; // decoder starts from the encoder summary
    double loss = 0.0;
    std::vector<Vector> dy(L, Vector(D));
    for (std::size_t j = 0; j < L; ++j) {
        Vector u = (j == 0) ? Vector(D, 0.0) : target[j - 1];
        lstm_cell_step(u, dst, dec, &dec_cache[j]);
        Vector xhat;
        dense_forward(dst.h, head, xhat, &head_cache[j]);
        for (std::size_t d = 0; d < D; ++d) {
            const double diff = xhat[d] - target[j][d];
            loss += diff * diff;
            dy[j][d] = 2.0 * diff;
        }
    }

    Vector dh(H, 0.0), dc(H, 0.0), du, dh_tmp, dc_tmp;
    for (std::size_t j = L; j-- > 0;) {
        Vector dh_local(H, 0.0);
        dense_backward(head_cache[j], head, dy[j], ghead, &dh_local);
        for (std::size_t k = 0; k < H; ++k) dh_local[k] += dh[k];
        lstm_cell_backward(dec_cache[j], dec, dh_local, dc, gdec, du, dh_tmp,
                           dc_tmp);
        dh = dh_tmp;
        dc = dc_tmp;
    }
    // Decoder initial state is the encoder's final state.
    for (std::size_t j = L; j-- > 0;) {
        lstm_cell_backward(enc_cache[j], enc, dh, dc, genc, du, dh_tmp, dc_tmp);
        dh = dh_tmp;
        dc = dc_tmp;
    }
    return loss;
}

} // namespace mvad
